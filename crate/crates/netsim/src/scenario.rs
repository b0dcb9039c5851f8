use std::collections::BTreeMap;

use pvm_core::{BlockId, Bound, Round, Slot, Timing, ValidatorId};
use pvm_forkchoice::ForkChoiceKind;
use pvm_validator::Variant;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::SimError;

pub const SCHEMA_VERSION: u32 = 1;

/// Everything needed to reproduce one execution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub n: usize,
    pub delta: u64,
    pub eta: Bound,
    pub tau: Bound,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Bound>,
    pub kappa: u64,
    /// Number of slots simulated.
    pub horizon: Slot,
    /// Declared lower bound on the fraction of honest active validators.
    #[serde(default = "default_h0")]
    pub h0: f64,
    #[serde(default)]
    pub variant: Variant,
    pub fc_kind: ForkChoiceKind,
    #[serde(default)]
    pub proposer_schedule: ProposerSchedule,
    #[serde(default)]
    pub sleep_schedule: Vec<SleepSpan>,
    #[serde(default)]
    pub corruption_schedule: Vec<Corruption>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tpa: Option<Tpa>,
    #[serde(default = "default_strategy")]
    pub strategy: String,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub strategy_params: serde_json::Value,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tiebreak_pin: Option<BlockId>,
    /// Delivery latency of honest messages in synchronous periods; `Δ` if unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_h0() -> f64 {
    0.5
}

fn default_strategy() -> String {
    "null".to_string()
}

/// Verdicts a scenario file claims for itself.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compliant: Option<bool>,
    /// Property name to `"pass"`, `"fail"`, `"vacuous"` or `"excluded"`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, String>,
}

/// Asynchrony holds in the slots strictly between `t1` and `t2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tpa {
    pub t1: Slot,
    pub t2: Slot,
}

impl Tpa {
    pub fn len(&self) -> u64 {
        self.t2 - self.t1
    }

    pub fn is_empty(&self) -> bool {
        self.t2 <= self.t1 + 1
    }

    pub fn is_async_slot(&self, t: Slot) -> bool {
        t > self.t1 && t < self.t2
    }

    pub fn is_async_round(&self, timing: &Timing, r: Round) -> bool {
        self.is_async_slot(timing.slot_of(r))
    }

    /// Messages in flight during the period arrive by this round.
    pub fn delivery_cap(&self, timing: &Timing) -> Round {
        timing.propose_round(self.t2) + timing.delta
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Awake {
    Asleep,
    Awake,
}

/// `validator` is in `state` for rounds `[from_round, to_round)`; later
/// spans override earlier ones. Validators are awake by default.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SleepSpan {
    pub validator: ValidatorId,
    pub from_round: Round,
    #[serde(default)]
    pub to_round: Option<Round>,
    pub state: Awake,
}

impl SleepSpan {
    pub fn asleep(validator: ValidatorId, from_round: Round, to_round: Option<Round>) -> Self {
        SleepSpan { validator, from_round, to_round, state: Awake::Asleep }
    }

    pub fn covers(&self, r: Round) -> bool {
        r >= self.from_round && self.to_round.is_none_or(|to| r < to)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corruption {
    pub validator: ValidatorId,
    pub round: Round,
}

/// Seeded uniform proposer election with per-slot overrides.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProposerSchedule {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<Slot, ValidatorId>,
}

fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl ProposerSchedule {
    pub fn proposer(&self, seed: u64, n: usize, slot: Slot) -> ValidatorId {
        if let Some(v) = self.overrides.get(&slot) {
            return *v;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ mix(slot)));
        ValidatorId(rng.gen_range(0..n as u32))
    }
}

impl Scenario {
    pub fn timing(&self) -> Timing {
        Timing::new(self.delta)
    }

    pub fn total_rounds(&self) -> Round {
        self.horizon * 3 * self.delta
    }

    pub fn latency(&self) -> u64 {
        self.latency.unwrap_or(self.delta)
    }

    pub fn proposer(&self, slot: Slot) -> ValidatorId {
        self.proposer_schedule.proposer(self.seed, self.n, slot)
    }

    /// Whether `v` is scheduled to be awake at round `r`.
    pub fn scheduled_awake(&self, v: ValidatorId, r: Round) -> bool {
        let mut awake = true;
        for s in &self.sleep_schedule {
            if s.validator == v && s.covers(r) {
                awake = s.state == Awake::Awake;
            }
        }
        awake
    }

    pub fn validators(&self) -> impl Iterator<Item = ValidatorId> {
        (0..self.n as u32).map(ValidatorId)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScenario(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {}", self.schema_version));
        }
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.delta == 0 {
            return bad("delta must be positive".into());
        }
        if self.horizon == 0 {
            return bad("horizon must be positive".into());
        }
        if self.eta == Bound::Finite(0) {
            return bad("eta must be at least 1".into());
        }
        if let Some(lat) = self.latency {
            if lat == 0 || lat > self.delta {
                return bad(format!("latency {lat} outside [1, {}]", self.delta));
            }
        }
        match self.fc_kind.expiry() {
            Some(e) if e != self.eta => {
                return bad(format!("fc_kind {} disagrees with eta {}", self.fc_kind, self.eta))
            }
            None if !self.eta.is_infinite() => {
                return bad(format!("fc_kind {} has no expiry but eta is {}", self.fc_kind, self.eta))
            }
            _ => {}
        }
        if let Some(pi) = self.pi {
            if !(pi < self.tau || (pi.is_infinite() && self.tau.is_infinite())) {
                return bad(format!("pi {pi} must be smaller than tau {}", self.tau));
            }
        }
        let n = self.n as u32;
        let check_id = |v: ValidatorId, what: &str| {
            if v.0 >= n {
                Err(SimError::InvalidScenario(format!("{what} references {v} but n = {n}")))
            } else {
                Ok(())
            }
        };
        for s in &self.sleep_schedule {
            check_id(s.validator, "sleep_schedule")?;
            if s.to_round.is_some_and(|to| to < s.from_round) {
                return bad(format!("sleep span for {} ends before it starts", s.validator));
            }
        }
        for c in &self.corruption_schedule {
            check_id(c.validator, "corruption_schedule")?;
        }
        for v in self.proposer_schedule.overrides.values() {
            check_id(*v, "proposer_schedule")?;
        }
        if let Some(tpa) = self.tpa {
            if tpa.t1 >= tpa.t2 {
                return bad(format!("tpa ({}, {}) is empty or reversed", tpa.t1, tpa.t2));
            }
        }
        if !(0.0..=1.0).contains(&self.h0) {
            return bad(format!("h0 {} outside [0, 1]", self.h0));
        }
        Ok(())
    }
}
