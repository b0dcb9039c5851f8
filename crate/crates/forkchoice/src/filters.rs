//! Vote filters. Each takes a vote set and returns a subset.

use std::collections::{BTreeMap, BTreeSet};

use pvm_core::{Bound, Slot, ValidatorId, Vote};

/// Validators with two distinct votes for the same slot.
pub fn equivocators<'a>(votes: impl IntoIterator<Item = &'a Vote>) -> BTreeSet<ValidatorId> {
    let mut seen: BTreeMap<(ValidatorId, Slot), pvm_core::BlockId> = BTreeMap::new();
    let mut out = BTreeSet::new();
    for v in votes {
        match seen.get(&(v.voter, v.slot)) {
            Some(b) if *b != v.block => {
                out.insert(v.voter);
            }
            Some(_) => {}
            None => {
                seen.insert((v.voter, v.slot), v.block);
            }
        }
    }
    out
}

/// `FIL_eq`: drop every vote from an equivocating validator.
pub fn fil_eq(votes: &[Vote]) -> Vec<Vote> {
    let eq = equivocators(votes);
    votes.iter().filter(|v| !eq.contains(&v.voter)).copied().collect()
}

/// `FIL_lmd`: keep, per validator, only the votes from its latest slot.
pub fn fil_lmd(votes: &[Vote]) -> Vec<Vote> {
    let mut latest: BTreeMap<ValidatorId, Slot> = BTreeMap::new();
    for v in votes {
        let e = latest.entry(v.voter).or_insert(v.slot);
        *e = (*e).max(v.slot);
    }
    votes.iter().filter(|v| latest[&v.voter] == v.slot).copied().collect()
}

/// `FIL_{η-exp}`: keep votes from slots `[t-η, t)`.
pub fn fil_exp(votes: &[Vote], t: Slot, eta: Bound) -> Vec<Vote> {
    let lo = eta.window_start(t);
    votes.iter().filter(|v| v.slot >= lo && v.slot < t).copied().collect()
}
