use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Round = u64;
pub type Slot = u64;

/// Slot timing: every slot is `3Δ` rounds, split into propose, vote and merge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub delta: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Propose,
    Vote,
    Merge,
}

impl Timing {
    pub fn new(delta: u64) -> Self {
        assert!(delta >= 1, "delta must be at least one round");
        Timing { delta }
    }

    pub fn slot_len(&self) -> u64 {
        3 * self.delta
    }

    pub fn slot_of(&self, round: Round) -> Slot {
        round / self.slot_len()
    }

    pub fn propose_round(&self, slot: Slot) -> Round {
        slot * self.slot_len()
    }

    pub fn vote_round(&self, slot: Slot) -> Round {
        self.propose_round(slot) + self.delta
    }

    pub fn merge_round(&self, slot: Slot) -> Round {
        self.propose_round(slot) + 2 * self.delta
    }

    pub fn phase(&self, round: Round) -> Option<Phase> {
        match round % self.slot_len() {
            0 => Some(Phase::Propose),
            x if x == self.delta => Some(Phase::Vote),
            x if x == 2 * self.delta => Some(Phase::Merge),
            _ => None,
        }
    }

    /// Whether a proposal for `slot` received at `round` is inside `[3Δt, 3Δt+Δ]`.
    pub fn in_proposal_window(&self, slot: Slot, round: Round) -> bool {
        round >= self.propose_round(slot) && round <= self.vote_round(slot)
    }

    /// Round at which a validator waking at `wake` becomes active: the first
    /// merge round `3Δt+2Δ` that is not before `wake`.
    pub fn join_round(&self, wake: Round) -> Round {
        let d = self.delta;
        if wake <= 2 * d {
            return 2 * d;
        }
        let t = (wake - 2 * d).div_ceil(3 * d);
        self.merge_round(t)
    }
}

/// A positive integer parameter that may be unbounded (`η`, `τ`, `π`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    Finite(u64),
    Infinite,
}

impl Bound {
    pub fn finite(self) -> Option<u64> {
        match self {
            Bound::Finite(x) => Some(x),
            Bound::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Bound::Infinite)
    }

    /// `t - self`, saturating at zero; unbounded windows reach back to slot 0.
    pub fn window_start(self, t: Slot) -> Slot {
        match self {
            Bound::Finite(x) => t.saturating_sub(x),
            Bound::Infinite => 0,
        }
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => a.cmp(b),
            (Bound::Finite(_), Bound::Infinite) => Less,
            (Bound::Infinite, Bound::Finite(_)) => Greater,
            (Bound::Infinite, Bound::Infinite) => Equal,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(x) => write!(f, "{x}"),
            Bound::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Bound {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Bound::Infinite),
            x => x
                .parse::<u64>()
                .map(Bound::Finite)
                .map_err(|_| format!("expected a non-negative integer or \"inf\", got {x:?}")),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Bound::Finite(x) => s.serialize_u64(*x),
            Bound::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Bound::Finite(x)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
