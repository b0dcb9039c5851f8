use std::collections::BTreeMap;

use pvm_core::{Block, Bound, Round, Slot, Timing, ValidatorId};
use pvm_forkchoice::ForkChoiceKind;
use pvm_netsim::{Corruption, Expected, ProposerSchedule, Scenario, SleepSpan, Tpa, Variant};
use serde::{Deserialize, Serialize};

use crate::attacks::{AsyncWakeupParams, BaitParams, Branch, Cycle, DaCycleParams, GoldfishParams, StaleVotesParams};
use crate::random::RandomParams;
use crate::script::Split;
use crate::AdversaryError;

/// Knobs accepted by the attack builders. Unset fields take the defaults
/// of the respective construction.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackParams {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub eta: Option<Bound>,
    pub tau: Option<Bound>,
    pub pi: Option<Bound>,
    pub delta: Option<u64>,
    pub kappa: Option<u64>,
    /// Idle slots before the switch in the LMD attack.
    pub wait: Option<u64>,
    pub cycles: Option<usize>,
    pub horizon: Option<Slot>,
    pub seed: Option<u64>,
}

/// The attacks start their split in this slot, so slot 1 holds an honest
/// block and slots `SPLIT - 1` and `SPLIT` belong to the adversary.
const SPLIT: Slot = 3;

fn ids(range: std::ops::RangeInclusive<usize>) -> Vec<ValidatorId> {
    range.map(|i| ValidatorId(i as u32)).collect()
}

struct Draft {
    name: &'static str,
    timing: Timing,
    overrides: BTreeMap<Slot, ValidatorId>,
    sleep: Vec<SleepSpan>,
    corrupt: Vec<Corruption>,
}

impl Draft {
    fn new(name: &'static str, delta: u64) -> Self {
        Draft {
            name,
            timing: Timing::new(delta),
            overrides: BTreeMap::new(),
            sleep: Vec::new(),
            corrupt: Vec::new(),
        }
    }

    fn fail<T>(&self, reason: impl Into<String>) -> Result<T, AdversaryError> {
        Err(AdversaryError::Hypothesis { strategy: self.name, reason: reason.into() })
    }

    /// Round-robin honest proposers for `slots`.
    fn rotate(&mut self, slots: impl IntoIterator<Item = Slot>, pool: &[ValidatorId]) {
        for (i, s) in slots.into_iter().enumerate() {
            self.overrides.insert(s, pool[i % pool.len()]);
        }
    }

    fn asleep(&mut self, vs: &[ValidatorId], from: Round, to: Option<Round>) {
        self.sleep.extend(vs.iter().map(|v| SleepSpan::asleep(*v, from, to)));
    }

    fn corrupt(&mut self, vs: &[ValidatorId], round: Round) {
        self.corrupt.extend(vs.iter().map(|v| Corruption { validator: *v, round }));
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        self,
        p: &AttackParams,
        n: usize,
        fc: ForkChoiceKind,
        tau: Bound,
        pi: Option<Bound>,
        kappa: u64,
        horizon: Slot,
        params: impl Serialize,
        expected: &[(&str, &str)],
    ) -> Scenario {
        Scenario {
            schema_version: pvm_netsim::SCHEMA_VERSION,
            n,
            delta: self.timing.delta,
            eta: fc.expiry().unwrap_or(Bound::Infinite),
            tau,
            pi,
            kappa,
            horizon,
            h0: 0.5,
            variant: Variant::Standard,
            fc_kind: fc,
            proposer_schedule: ProposerSchedule { overrides: self.overrides },
            sleep_schedule: self.sleep,
            corruption_schedule: self.corrupt,
            tpa: None,
            strategy: self.name.to_string(),
            strategy_params: serde_json::to_value(params).expect("params serialize"),
            seed: p.seed.unwrap_or(0),
            tiebreak_pin: None,
            latency: None,
            expected: Some(Expected {
                compliant: Some(true),
                properties: expected.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            }),
        }
    }
}

/// `n = 2m + 1` from whichever of `m` and `n` is given.
fn odd_size(d: &Draft, p: &AttackParams, default_m: usize, min_m: usize) -> Result<usize, AdversaryError> {
    let m = match (p.m, p.n) {
        (Some(m), Some(n)) if n != 2 * m + 1 => return d.fail(format!("n = {n} must equal 2m + 1 = {}", 2 * m + 1)),
        (Some(m), _) => m,
        (None, Some(n)) if n % 2 == 0 => return d.fail(format!("n = {n} must be of the form 2m + 1")),
        (None, Some(n)) => n / 2,
        (None, None) => default_m,
    };
    if m < min_m {
        return d.fail(format!("m = {m} must be at least {min_m}"));
    }
    Ok(m)
}

fn finite_eta(d: &Draft, p: &AttackParams, default: u64, min: u64) -> Result<u64, AdversaryError> {
    match p.eta.unwrap_or(Bound::Finite(default)) {
        Bound::Infinite => d.fail("η must be finite"),
        Bound::Finite(e) if e < min => d.fail(format!("η = {e} must be at least {min}")),
        Bound::Finite(e) => Ok(e),
    }
}

/// `1 ≤ τ < η`.
fn tau_below_eta(d: &Draft, p: &AttackParams, eta: u64) -> Result<u64, AdversaryError> {
    match p.tau.unwrap_or(Bound::Finite(eta - 1)) {
        Bound::Finite(t) if t >= 1 && t < eta => Ok(t),
        t => d.fail(format!("τ = {t} violates 1 ≤ τ < η = {eta}")),
    }
}

pub(crate) fn lmd_bait_and_switch(p: &AttackParams) -> Result<Scenario, AdversaryError> {
    let mut d = Draft::new("lmd_bait_and_switch", p.delta.unwrap_or(2));
    let m = odd_size(&d, p, 2, 2)?;
    let tau = match p.tau.unwrap_or(Bound::Finite(3)) {
        Bound::Finite(t) if t >= 1 => t,
        t => return d.fail(format!("τ = {t} must be finite and at least 1")),
    };
    let kappa = p.kappa.unwrap_or(tau);
    let wait = p.wait.unwrap_or(4 * tau);
    if wait <= tau + 1 {
        return d.fail(format!("N = {wait} violates N > τ + 1 = {}", tau + 1));
    }
    if wait <= kappa {
        return d.fail(format!("N = {wait} violates N > κ = {kappa}, so A is never confirmed"));
    }
    let (v1, v2, v3) = (ValidatorId(0), ids(1..=m + 1), ids(m + 2..=2 * m));
    let t = SPLIT;
    let switch = t + wait;
    let turncoat = v2[0];
    let loyal: Vec<_> = v2[1..].to_vec();
    let honest: Vec<_> = v2.iter().chain(&v3).copied().collect();
    d.rotate(1..t - 1, &honest);
    d.overrides.insert(t - 1, v1);
    d.overrides.insert(t, v1);
    d.rotate(t + 1..=switch, &loyal);
    d.corrupt(&[v1], 0);
    d.corrupt(&[turncoat], d.timing.propose_round(switch));
    d.asleep(&v3, d.timing.vote_round(t) + 1, None);
    let params = BaitParams { split: Split { adversary: v1, slot: t, to_a: v2, to_b: v3 }, switch_slot: switch, turncoat };
    Ok(d.finish(
        p,
        2 * m + 1,
        ForkChoiceKind::LmdGhost,
        Bound::Finite(tau),
        None,
        kappa,
        switch + 1,
        params,
        &[("safety", "fail")],
    ))
}

pub(crate) fn rlmd_stale_votes(p: &AttackParams) -> Result<Scenario, AdversaryError> {
    let mut d = Draft::new("rlmd_stale_votes", p.delta.unwrap_or(2));
    let m = odd_size(&d, p, 3, 3)?;
    let eta = finite_eta(&d, p, 3, 2)?;
    let tau = tau_below_eta(&d, p, eta)?;
    let (v1, v2, v3) = (ValidatorId(0), ids(1..=m + 1), ids(m + 2..=2 * m));
    let t = SPLIT;
    let late = t + eta - 1;
    let turncoats = v2[..2].to_vec();
    let loyal: Vec<_> = v2[2..].to_vec();
    let honest: Vec<_> = v2.iter().chain(&v3).copied().collect();
    d.rotate(1..t - 1, &honest);
    d.overrides.insert(t - 1, v1);
    d.overrides.insert(t, v1);
    d.rotate(t + 1..=t + eta, &loyal);
    d.corrupt(&[v1], 0);
    d.corrupt(&turncoats, d.timing.vote_round(late) + 1);
    d.asleep(&v3, d.timing.vote_round(t) + 1, None);
    let params = StaleVotesParams { split: Split { adversary: v1, slot: t, to_a: v2, to_b: v3 }, late_slot: late, turncoats };
    // The execution ends with slot t + η: one slot later the two turncoats
    // and v1 would face only m - 1 active honest validators.
    Ok(d.finish(
        p,
        2 * m + 1,
        ForkChoiceKind::RlmdGhost(Bound::Finite(eta)),
        Bound::Finite(tau),
        None,
        p.kappa.unwrap_or(1),
        t + eta + 1,
        params,
        &[("reorg_resilience", "fail")],
    ))
}

/// Largest number of reorg cycles for `n = 2m + 1`.
pub fn max_cycles(m: usize) -> usize {
    m.saturating_sub(2) / 2
}

pub(crate) fn rlmd_da_cycle(p: &AttackParams) -> Result<Scenario, AdversaryError> {
    let mut d = Draft::new("rlmd_da_cycle", p.delta.unwrap_or(2));
    let m = odd_size(&d, p, 4, 4)?;
    let eta = finite_eta(&d, p, 3, 2)?;
    let tau = tau_below_eta(&d, p, eta)?;
    let kmax = max_cycles(m);
    let k = p.cycles.unwrap_or(kmax);
    if k == 0 || k > kmax {
        return d.fail(format!("cycles = {k} violates 1 ≤ k ≤ ⌊(m − 2)/2⌋ = {kmax}"));
    }
    let bound = kmax as u64 * eta;
    let kappa = p.kappa.unwrap_or(1);
    if kappa == 0 || kappa >= bound {
        return d.fail(format!("κ = {kappa} violates 1 ≤ κ < ⌊(n − 5)/4⌋η = {bound}"));
    }
    let v1 = ValidatorId(0);
    let t = SPLIT;
    let timing = d.timing;
    let mut coalition = vec![v1];
    let mut active = ids(1..=m + 2);
    let mut sleepers = ids(m + 3..=2 * m);
    let all_honest: Vec<_> = active.iter().chain(&sleepers).copied().collect();
    d.rotate(1..t - 1, &all_honest);
    d.overrides.insert(t - 1, v1);
    d.overrides.insert(t, v1);
    d.corrupt(&[v1], 0);
    let split = Split { adversary: v1, slot: t, to_a: active.clone(), to_b: sleepers.clone() };
    let mut slept_at = timing.vote_round(t) + 1;
    let mut cycles = Vec::new();
    for j in 1..=k {
        let prev = t + (j as u64 - 1) * eta;
        let slot = prev + eta;
        let fresh = active[..2].to_vec();
        let flip = active[2..].to_vec();
        d.rotate(prev + 1..slot, &flip);
        d.overrides.insert(slot, v1);
        d.corrupt(&fresh, timing.vote_round(slot - 2) + 1);
        d.asleep(&sleepers, slept_at, Some(timing.merge_round(slot - 1)));
        coalition.extend(&fresh);
        cycles.push(Cycle {
            slot,
            proposer: v1,
            coalition: coalition.clone(),
            flip: flip.clone(),
            target: if j % 2 == 1 { Branch::B } else { Branch::A },
        });
        let keep = sleepers[..2.min(sleepers.len())].to_vec();
        sleepers.drain(..keep.len());
        active = flip.into_iter().chain(keep).collect();
        if j == k {
            active.extend(sleepers.drain(..));
            active.sort();
        }
        slept_at = timing.vote_round(slot) + 1;
    }
    let last = t + k as u64 * eta;
    let horizon = p.horizon.unwrap_or(last + kappa + 2);
    d.rotate(last + 1..horizon, &active);
    let params = DaCycleParams { split, cycles };
    Ok(d.finish(
        p,
        2 * m + 1,
        ForkChoiceKind::RlmdGhost(Bound::Finite(eta)),
        Bound::Finite(tau),
        None,
        kappa,
        horizon,
        params,
        &[("safety", "fail"), ("reorg_resilience", "fail")],
    ))
}

/// `τ > π ≥ floor`, or `τ = π = ∞`.
fn tau_pi(d: &Draft, p: &AttackParams, floor: u64, default_pi: Bound) -> Result<(Bound, Bound), AdversaryError> {
    let tau = p.tau.unwrap_or(Bound::Infinite);
    let pi = p.pi.unwrap_or(default_pi);
    if pi < Bound::Finite(floor) {
        return d.fail(format!("π = {pi} violates π ≥ {floor}"));
    }
    if !(tau > pi || (tau.is_infinite() && pi.is_infinite())) {
        return d.fail(format!("τ = {tau}, π = {pi} violate τ > π"));
    }
    Ok((tau, pi))
}

pub(crate) fn rlmd_async_wakeup(p: &AttackParams) -> Result<Scenario, AdversaryError> {
    let mut d = Draft::new("rlmd_async_wakeup", p.delta.unwrap_or(2));
    if p.n.is_some_and(|n| n != 3) || p.m.is_some_and(|m| m != 1) {
        return d.fail("the construction uses exactly 3 validators");
    }
    let eta = finite_eta(&d, p, 2, 2)?;
    let (tau, pi) = tau_pi(&d, p, eta.max(2), Bound::Finite(eta))?;
    let [v1, v2, v3] = [0, 1, 2].map(ValidatorId);
    let t = SPLIT;
    let timing = d.timing;
    d.rotate(1..=t, &[v1, v2]);
    d.rotate(t + 1..t + eta, &[v2]);
    d.overrides.insert(t + eta, v3);
    d.overrides.insert(t + eta + 1, v2);
    d.asleep(&[v3], 0, Some(timing.merge_round(t + eta - 1)));
    d.asleep(&[v1], timing.merge_round(t) + 1, Some(timing.merge_round(t + eta)));
    let horizon = t + eta + 2;
    let mut sc = d.finish(
        p,
        3,
        ForkChoiceKind::RlmdGhost(Bound::Finite(eta)),
        tau,
        Some(pi),
        p.kappa.unwrap_or(1),
        horizon,
        AsyncWakeupParams { late: v3 },
        &[("asynchrony_resilience", "fail")],
    );
    sc.tpa = Some(Tpa { t1: t, t2: t + eta });
    sc.tiebreak_pin = Some(Block::new(&Block::genesis(), t + eta, v3, Vec::new()).id);
    Ok(sc)
}

pub(crate) fn goldfish_one_slot_async(p: &AttackParams) -> Result<Scenario, AdversaryError> {
    let mut d = Draft::new("goldfish_one_slot_async", p.delta.unwrap_or(2));
    let n = p.n.unwrap_or(4);
    if n < 3 {
        return d.fail(format!("n = {n} must be at least 3"));
    }
    let (tau, pi) = tau_pi(&d, p, 2, Bound::Finite(2))?;
    let adversary = ValidatorId(0);
    let honest = ids(1..=n - 1);
    let t = 4;
    d.rotate(1..=t, &honest);
    d.overrides.insert(t + 1, adversary);
    let horizon = t + 3;
    d.rotate(t + 2..horizon, &honest);
    d.corrupt(&[adversary], 0);
    let params = GoldfishParams { adversary, slot: t };
    let pin = params.block_a().id;
    let mut sc = d.finish(
        p,
        n,
        ForkChoiceKind::GhostEph,
        tau,
        Some(pi),
        p.kappa.unwrap_or(1),
        horizon,
        params,
        &[("asynchrony_resilience", "fail")],
    );
    sc.tpa = Some(Tpa { t1: t - 1, t2: t + 1 });
    sc.tiebreak_pin = Some(pin);
    Ok(sc)
}

/// Template for randomized trials; schedules are drawn per seed.
pub(crate) fn random_template(p: &AttackParams) -> Result<Scenario, AdversaryError> {
    let d = Draft::new("random_compliant", p.delta.unwrap_or(2));
    let n = p.n.unwrap_or(6);
    if n == 0 {
        return d.fail("n must be positive");
    }
    let eta = p.eta.unwrap_or(Bound::Finite(2));
    if eta == Bound::Finite(0) {
        return d.fail("η must be at least 1");
    }
    let fc = ForkChoiceKind::RlmdGhost(eta);
    let tau = p.tau.unwrap_or(eta);
    let mut sc = d.finish(
        p,
        n,
        fc,
        tau,
        p.pi,
        p.kappa.unwrap_or(5),
        p.horizon.unwrap_or(60),
        RandomParams::default(),
        // Only asynchrony resilience is claimed across an asynchronous period.
        if p.pi.is_some() {
            &[("asynchrony_resilience", "pass")]
        } else {
            &[("safety", "pass"), ("reorg_resilience", "pass"), ("liveness", "pass")]
        },
    );
    sc.eta = eta;
    Ok(sc)
}
