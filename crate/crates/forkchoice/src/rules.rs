use std::fmt;
use std::str::FromStr;

use pvm_core::{BlockId, Bound, Slot, View, Vote};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::filters::{fil_eq, fil_exp, fil_lmd};
use crate::{ghost, FcError, TieBreak};

/// A fork-choice rule: a vote filter followed by the GHOST walk.
pub trait ForkChoice: Send + Sync + fmt::Debug {
    fn kind(&self) -> ForkChoiceKind;

    /// The votes from `votes` that count towards weights at slot `t`.
    fn filter(&self, votes: &[Vote], t: Slot) -> Vec<Vote>;

    fn head(&self, view: &View, t: Slot, tb: &TieBreak) -> BlockId {
        let votes: Vec<Vote> = view.votes().iter().copied().collect();
        ghost(view, &self.filter(&votes, t), tb)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ForkChoiceKind {
    Ghost,
    LmdGhost,
    GhostEph,
    RlmdGhost(Bound),
}

impl ForkChoiceKind {
    pub fn name(&self) -> &'static str {
        match self {
            ForkChoiceKind::Ghost => "ghost",
            ForkChoiceKind::LmdGhost => "lmd_ghost",
            ForkChoiceKind::GhostEph => "ghost_eph",
            ForkChoiceKind::RlmdGhost(_) => "rlmd_ghost",
        }
    }

    /// The vote expiry period implied by the rule, if any.
    pub fn expiry(&self) -> Option<Bound> {
        match self {
            ForkChoiceKind::Ghost | ForkChoiceKind::LmdGhost => None,
            ForkChoiceKind::GhostEph => Some(Bound::Finite(1)),
            ForkChoiceKind::RlmdGhost(eta) => Some(*eta),
        }
    }
}

impl fmt::Display for ForkChoiceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForkChoiceKind::RlmdGhost(eta) => write!(f, "rlmd_ghost({eta})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for ForkChoiceKind {
    type Err = FcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, arg) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], Some(&s[i + 1..s.len() - 1])),
            Some(_) => return Err(FcError::Syntax(s.to_string())),
            None => (s, None),
        };
        let arg = arg
            .map(|a| a.parse::<Bound>().map_err(FcError::BadParameter))
            .transpose()?;
        crate::registry().kind(name, arg)
    }
}

impl Serialize for ForkChoiceKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ForkChoiceKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// GHOST over every vote of a non-equivocating validator.
#[derive(Debug, Default)]
pub struct Ghost;

impl ForkChoice for Ghost {
    fn kind(&self) -> ForkChoiceKind {
        ForkChoiceKind::Ghost
    }

    fn filter(&self, votes: &[Vote], _t: Slot) -> Vec<Vote> {
        fil_eq(votes)
    }
}

/// Latest non-equivocating message per validator.
#[derive(Debug, Default)]
pub struct LmdGhost;

impl ForkChoice for LmdGhost {
    fn kind(&self) -> ForkChoiceKind {
        ForkChoiceKind::LmdGhost
    }

    fn filter(&self, votes: &[Vote], _t: Slot) -> Vec<Vote> {
        fil_lmd(&fil_eq(votes))
    }
}

/// Only votes from the previous slot (Goldfish).
#[derive(Debug, Default)]
pub struct GhostEph;

impl ForkChoice for GhostEph {
    fn kind(&self) -> ForkChoiceKind {
        ForkChoiceKind::GhostEph
    }

    fn filter(&self, votes: &[Vote], t: Slot) -> Vec<Vote> {
        fil_exp(&fil_eq(votes), t, Bound::Finite(1))
    }
}

/// Latest messages among those from the last `η` slots.
#[derive(Debug)]
pub struct RlmdGhost {
    pub eta: Bound,
}

impl ForkChoice for RlmdGhost {
    fn kind(&self) -> ForkChoiceKind {
        ForkChoiceKind::RlmdGhost(self.eta)
    }

    fn filter(&self, votes: &[Vote], t: Slot) -> Vec<Vote> {
        fil_lmd(&fil_exp(&fil_eq(votes), t, self.eta))
    }
}
