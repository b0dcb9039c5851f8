use std::io::{BufRead, Write};

use pvm_core::{Block, BlockId, Bound, Message, Round, Slot, ValidatorId, Vote};
use pvm_validator::{Status, Variant};
use serde::{Deserialize, Serialize};

use crate::{SimError, Tpa};

/// Run parameters, attached to the first `round_start` record so that a
/// trace file can be checked on its own.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub n: usize,
    pub delta: u64,
    pub horizon: Slot,
    pub eta: Bound,
    pub kappa: u64,
    pub fc_kind: String,
    pub variant: Variant,
    pub latency: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tpa: Option<Tpa>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tiebreak_pin: Option<BlockId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapStatus {
    Asleep,
    Joining,
    Active,
}

impl From<Status> for SnapStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Asleep => SnapStatus::Asleep,
            Status::Joining { .. } => SnapStatus::Joining,
            Status::Active => SnapStatus::Active,
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    RoundStart {
        round: Round,
        slot: Slot,
        actor: Option<ValidatorId>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        meta: Option<TraceMeta>,
    },
    /// `message` is present the first time a message id appears.
    Send {
        round: Round,
        slot: Slot,
        actor: ValidatorId,
        msg: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        message: Option<Message>,
        #[serde(default, skip_serializing_if = "is_false")]
        relay: bool,
    },
    /// `late` marks a proposal received outside its window; only its block
    /// was kept.
    Deliver {
        round: Round,
        slot: Slot,
        actor: ValidatorId,
        msg: u64,
        #[serde(default, skip_serializing_if = "is_false")]
        late: bool,
    },
    Sleep {
        round: Round,
        slot: Slot,
        actor: ValidatorId,
    },
    Wake {
        round: Round,
        slot: Slot,
        actor: ValidatorId,
        active_at: Round,
    },
    Corrupt {
        round: Round,
        slot: Slot,
        actor: ValidatorId,
    },
    /// `canonical`/`confirmed` are null until the validator has run the fork
    /// choice since it last became active.
    StateSnapshot {
        round: Round,
        slot: Slot,
        actor: ValidatorId,
        validator: ValidatorId,
        status: SnapStatus,
        canonical: Option<BlockId>,
        confirmed: Option<BlockId>,
    },
    Propose {
        round: Round,
        slot: Slot,
        actor: ValidatorId,
        block: Block,
    },
    Vote {
        round: Round,
        slot: Slot,
        actor: ValidatorId,
        vote: Vote,
    },
    FastConfirm {
        round: Round,
        slot: Slot,
        actor: ValidatorId,
        block: BlockId,
    },
}

impl Event {
    pub fn round(&self) -> Round {
        match self {
            Event::RoundStart { round, .. }
            | Event::Send { round, .. }
            | Event::Deliver { round, .. }
            | Event::Sleep { round, .. }
            | Event::Wake { round, .. }
            | Event::Corrupt { round, .. }
            | Event::StateSnapshot { round, .. }
            | Event::Propose { round, .. }
            | Event::Vote { round, .. }
            | Event::FastConfirm { round, .. } => *round,
        }
    }
}

/// Ordered event log of one execution.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub events: Vec<Event>,
}

impl Trace {
    pub fn meta(&self) -> Option<&TraceMeta> {
        self.events.iter().find_map(|e| match e {
            Event::RoundStart { meta: Some(m), .. } => Some(m),
            _ => None,
        })
    }

    pub fn write_ndjson<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn to_ndjson(&self) -> String {
        let mut buf = Vec::new();
        self.write_ndjson(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_ndjson<R: BufRead>(r: R) -> Result<Self, SimError> {
        let mut events = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| SimError::Trace(format!("line {}: {e}", i + 1)))?;
            if line.trim().is_empty() {
                continue;
            }
            let e = serde_json::from_str(&line).map_err(|e| SimError::Trace(format!("line {}: {e}", i + 1)))?;
            events.push(e);
        }
        let t = Trace { events };
        if t.meta().is_none() {
            return Err(SimError::Trace("no round_start record carries run metadata".into()));
        }
        Ok(t)
    }
}
