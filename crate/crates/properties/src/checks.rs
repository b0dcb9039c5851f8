use std::collections::{BTreeMap, HashMap};

use pvm_core::{BlockId, Round, Slot, ValidatorId};
use pvm_netsim::{SnapStatus, Tpa};
use pvm_netsim::Variant;
use serde::Serialize;

use crate::{PropertyError, TraceIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    /// Nothing to check, e.g. no honest proposals.
    VacuousPass,
    Fail,
    /// The property's hypotheses do not hold for this trace.
    PreconditionExcluded,
}

impl Outcome {
    pub fn holds(self) -> bool {
        matches!(self, Outcome::Pass | Outcome::VacuousPass)
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::VacuousPass => "vacuous",
            Outcome::Fail => "fail",
            Outcome::PreconditionExcluded => "excluded",
        }
    }
}

/// Where a validator held a block at some round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Sighting {
    pub validator: ValidatorId,
    pub round: Round,
    pub block: BlockId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    ConflictingConfirmations { first: Sighting, second: Sighting },
    StaleConfirmation { at: Sighting, needed_slot: Slot, best_slot: Option<Slot> },
    Reorged { block: BlockId, slot: Slot, at: Sighting },
    OffProposalVote { slot: Slot, proposal: BlockId, at: Sighting },
    MissingVote { slot: Slot, validator: ValidatorId },
    PivotGap { from: Slot, to: Slot },
    NoFastConfirm { slot: Slot, validator: ValidatorId, expected: BlockId },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub property: &'static str,
    pub outcome: Outcome,
    /// Number of individual obligations checked.
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Verdict {
    fn new(property: &'static str, checked: usize, witness: Option<Witness>) -> Self {
        let outcome = match (&witness, checked) {
            (Some(_), _) => Outcome::Fail,
            (None, 0) => Outcome::VacuousPass,
            (None, _) => Outcome::Pass,
        };
        Verdict { property, outcome, checked, witness, note: String::new() }
    }

    fn excluded(property: &'static str, note: String) -> Self {
        Verdict { property, outcome: Outcome::PreconditionExcluded, checked: 0, witness: None, note }
    }
}

/// Confirmed chains of honest validators never conflict.
pub fn check_safety(ix: &mut TraceIndex) -> Verdict {
    let confirmed: Vec<Sighting> = ix
        .snapshots
        .iter()
        .filter_map(|s| s.confirmed.map(|b| Sighting { validator: s.validator, round: s.round, block: b }))
        .collect();
    let mut tip: Option<Sighting> = None;
    let mut first_seen: HashMap<BlockId, Sighting> = HashMap::new();
    for s in &confirmed {
        first_seen.entry(s.block).or_insert(*s);
        let Some(t) = tip else {
            tip = Some(*s);
            continue;
        };
        if ix.is_prefix(s.block, t.block) {
            continue;
        }
        if ix.is_prefix(t.block, s.block) {
            tip = Some(*s);
            continue;
        }
        let mut earlier: Vec<Sighting> = first_seen.values().copied().collect();
        earlier.sort_by_key(|x| (x.round, x.validator));
        let first = earlier
            .into_iter()
            .find(|e| !ix.is_prefix(e.block, s.block) && !ix.is_prefix(s.block, e.block))
            .unwrap_or(t);
        let w = Witness::ConflictingConfirmations { first, second: *s };
        return Verdict::new("safety", confirmed.len(), Some(w));
    }
    Verdict::new("safety", confirmed.len(), None)
}

/// For every round `r` and every later round `r' ≥ r + T_conf` slots, the
/// confirmed chain of every active validator at `r'` contains an honest
/// block proposed after `r`.
pub fn check_liveness(ix: &mut TraceIndex, t_conf: u64) -> Result<Verdict, PropertyError> {
    if ix.meta.horizon <= t_conf {
        return Err(PropertyError::Precondition(format!(
            "horizon {} must exceed T_conf {t_conf}",
            ix.meta.horizon
        )));
    }
    let window = t_conf * ix.timing.slot_len();
    let honest: HashMap<BlockId, Slot> = ix.proposals.iter().map(|p| (p.block, p.slot)).collect();
    let mut best: HashMap<BlockId, Option<Slot>> = HashMap::new();
    let mut by_validator: BTreeMap<ValidatorId, Vec<usize>> = BTreeMap::new();
    for (i, s) in ix.snapshots.iter().enumerate() {
        by_validator.entry(s.validator).or_default().push(i);
    }
    let mut checked = 0;
    for (v, idxs) in by_validator {
        let corrupt = ix.corrupted_at.get(&v).copied().unwrap_or(Round::MAX);
        for (k, &i) in idxs.iter().enumerate() {
            let s = ix.snapshots[i];
            let (SnapStatus::Active, Some(conf)) = (s.status, s.confirmed) else {
                continue;
            };
            let end = idxs
                .get(k + 1)
                .map(|&j| ix.snapshots[j].round)
                .unwrap_or(ix.end_round)
                .min(corrupt);
            if end <= s.round {
                continue;
            }
            let last = end - 1;
            if last < window {
                continue;
            }
            let limit = last - window;
            checked += 1;
            let got = highest_honest(ix, &honest, &mut best, conf);
            if got.is_none_or(|slot| ix.timing.propose_round(slot) <= limit) {
                let needed_slot = limit / ix.timing.slot_len() + 1;
                let w = Witness::StaleConfirmation {
                    at: Sighting { validator: v, round: last, block: conf },
                    needed_slot,
                    best_slot: got,
                };
                return Ok(Verdict::new("liveness", checked, Some(w)));
            }
        }
    }
    Ok(Verdict::new("liveness", checked, None))
}

fn highest_honest(
    ix: &TraceIndex,
    honest: &HashMap<BlockId, Slot>,
    memo: &mut HashMap<BlockId, Option<Slot>>,
    b: BlockId,
) -> Option<Slot> {
    if let Some(x) = memo.get(&b) {
        return *x;
    }
    let mut path = Vec::new();
    let mut cur = Some(b);
    let mut base = None;
    while let Some(c) = cur {
        if let Some(x) = memo.get(&c) {
            base = *x;
            break;
        }
        path.push(c);
        cur = ix.parent(c);
    }
    for c in path.into_iter().rev() {
        if let Some(s) = honest.get(&c) {
            base = Some(base.map_or(*s, |x: Slot| x.max(*s)));
        }
        memo.insert(c, base);
    }
    base
}

fn persistence(
    ix: &mut TraceIndex,
    property: &'static str,
    items: &[(BlockId, Slot, Round)],
    eligible: impl Fn(&TraceIndex, ValidatorId, Round) -> bool,
) -> Verdict {
    let snaps: Vec<_> = ix.live_snapshots().copied().collect();
    let mut checked = 0;
    for s in snaps {
        if !eligible(ix, s.validator, s.round) {
            continue;
        }
        let canonical = s.canonical.expect("live snapshot");
        for &(block, slot, from) in items {
            if s.round < from {
                continue;
            }
            checked += 1;
            if !ix.is_prefix(block, canonical) {
                let w = Witness::Reorged {
                    block,
                    slot,
                    at: Sighting { validator: s.validator, round: s.round, block: canonical },
                };
                return Verdict::new(property, checked, Some(w));
            }
        }
    }
    Verdict::new(property, checked, None)
}

/// Every honest proposal stays in the canonical chain of every active
/// validator from the vote round of its slot onwards.
pub fn check_reorg_resilience(ix: &mut TraceIndex) -> Verdict {
    let items: Vec<_> = ix
        .proposals
        .iter()
        .map(|p| (p.block, p.slot, ix.timing.vote_round(p.slot)))
        .collect();
    persistence(ix, "reorg_resilience", &items, |_, _, _| true)
}

/// Honest proposals from slots up to `t1` stay canonical for every aware
/// validator: inside `(t1, t2]` only members of `H_{t1}` count.
pub fn check_asynchrony_resilience(ix: &mut TraceIndex, tpa: Tpa) -> Verdict {
    let items: Vec<_> = ix
        .proposals
        .iter()
        .filter(|p| p.slot <= tpa.t1)
        .map(|p| (p.block, p.slot, ix.timing.vote_round(p.slot)))
        .collect();
    let h_t1 = ix.participation.h(tpa.t1);
    let after = tpa.t2 + 1;
    let proposer_after: Option<ValidatorId> = ix.proposals.iter().find(|p| p.slot == after).map(|p| p.proposer);
    persistence(ix, "asynchrony_resilience", &items, move |ix, v, r| {
        let t = ix.timing.slot_of(r);
        if h_t1.contains(&v) {
            return true;
        }
        if t > tpa.t1 && t <= tpa.t2 {
            return false;
        }
        // A validator unaware during the period still holds the chain it
        // chose then until it next runs the fork choice in slot t2 + 1.
        !(t == after && r < ix.timing.vote_round(after) && proposer_after != Some(v))
    })
}

/// In every synchronous slot with an honest proposal, all of `H_t` vote for
/// that proposal.
pub fn check_view_merge(ix: &mut TraceIndex) -> Verdict {
    let mut votes: HashMap<(Slot, ValidatorId), Vec<BlockId>> = HashMap::new();
    for (_, v, vote) in &ix.honest_votes {
        votes.entry((vote.slot, *v)).or_default().push(vote.block);
    }
    let mut checked = 0;
    for p in &ix.proposals {
        let t = p.slot;
        if ix.meta.tpa.is_some_and(|tpa| t > tpa.t1 && t <= tpa.t2) {
            continue;
        }
        for v in ix.participation.h(t) {
            checked += 1;
            match votes.get(&(t, v)) {
                Some(bs) if bs.iter().all(|b| *b == p.block) => {}
                Some(bs) => {
                    let at = Sighting { validator: v, round: ix.timing.vote_round(t), block: bs[0] };
                    let w = Witness::OffProposalVote { slot: t, proposal: p.block, at };
                    return Verdict::new("view_merge", checked, Some(w));
                }
                None => {
                    return Verdict::new("view_merge", checked, Some(Witness::MissingVote { slot: t, validator: v }))
                }
            }
        }
    }
    Verdict::new("view_merge", checked, None)
}

/// Slots whose proposer was honest and active and proposed.
pub fn pivot_slots(ix: &TraceIndex) -> Vec<Slot> {
    let mut s: Vec<Slot> = ix.proposals.iter().map(|p| p.slot).collect();
    s.dedup();
    s
}

/// Every `κ` consecutive slots in `[1, horizon)` contain a pivot slot.
pub fn check_pivot_density(ix: &TraceIndex, kappa: u64) -> Verdict {
    let pivots = pivot_slots(ix);
    let h = ix.meta.horizon;
    if kappa == 0 || h <= kappa {
        return Verdict::new("pivot_density", 0, None);
    }
    let mut checked = 0;
    for start in 1..=(h - kappa) {
        checked += 1;
        let end = start + kappa;
        if !pivots.iter().any(|&p| p >= start && p < end) {
            return Verdict::new("pivot_density", checked, Some(Witness::PivotGap { from: start, to: end - 1 }));
        }
    }
    Verdict::new("pivot_density", checked, None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FastConfirmReport {
    pub equivocators: usize,
    /// Fast-confirmed blocks stay canonical for active validators from the
    /// vote round of the next slot.
    pub persistence: Verdict,
    /// Honest votes in the next slot extend every fast-confirmed block.
    pub next_slot_votes: Verdict,
    /// With a `⌈2n/3⌉` active quorum and delays of at most `Δ/2`, every active
    /// validator fast-confirms the proposal's parent at the vote round.
    pub liveness: Verdict,
}

impl FastConfirmReport {
    pub fn outcome(&self) -> Outcome {
        let all = [&self.persistence, &self.next_slot_votes, &self.liveness];
        if all.iter().any(|v| v.outcome == Outcome::Fail) {
            Outcome::Fail
        } else if all.iter().any(|v| v.outcome == Outcome::Pass) {
            Outcome::Pass
        } else if all.iter().all(|v| v.outcome == Outcome::PreconditionExcluded) {
            Outcome::PreconditionExcluded
        } else {
            Outcome::VacuousPass
        }
    }
}

pub fn check_fast_confirm(ix: &mut TraceIndex) -> Result<FastConfirmReport, PropertyError> {
    if ix.meta.variant != Variant::FastConfirm {
        return Err(PropertyError::Precondition("trace does not use the fast-confirm variant".into()));
    }
    let n = ix.n();
    let eq = ix.equivocators().len();
    let (persistence, next_slot_votes) = if 3 * eq >= n {
        let note = format!("{eq} equivocators among {n} validators; at least n/3");
        (
            Verdict::excluded("fast_confirm_persistence", note.clone()),
            Verdict::excluded("fast_confirm_next_slot_votes", note),
        )
    } else {
        let items: Vec<_> = ix
            .fast_confirms
            .iter()
            .filter(|(_, t, _, _)| !ix.is_async_slot(*t))
            .map(|&(_, t, _, b)| (b, t, ix.timing.vote_round(t + 1)))
            .collect();
        let p = persistence(ix, "fast_confirm_persistence", &items, |_, _, _| true);
        let mut checked = 0;
        let mut witness = None;
        'outer: for &(b, t, _) in &items {
            let h_next = ix.participation.h(t + 1);
            let votes: Vec<_> = ix
                .honest_votes
                .iter()
                .filter(|(_, v, vote)| vote.slot == t + 1 && h_next.contains(v))
                .copied()
                .collect();
            for (r, v, vote) in votes {
                checked += 1;
                if !ix.is_prefix(b, vote.block) {
                    witness = Some(Witness::Reorged {
                        block: b,
                        slot: t,
                        at: Sighting { validator: v, round: r, block: vote.block },
                    });
                    break 'outer;
                }
            }
        }
        (p, Verdict::new("fast_confirm_next_slot_votes", checked, witness))
    };
    let liveness = fast_liveness(ix);
    Ok(FastConfirmReport { equivocators: eq, persistence, next_slot_votes, liveness })
}

fn fast_liveness(ix: &TraceIndex) -> Verdict {
    let quorum = (2 * ix.n()).div_ceil(3);
    let half = ix.timing.delta / 2;
    let mut checked = 0;
    for p in &ix.proposals {
        let t = p.slot;
        if ix.is_async_slot(t) {
            continue;
        }
        let h = ix.participation.h(t);
        if h.len() < quorum {
            continue;
        }
        let fast = ix.deliveries.iter().all(|&(r, w, m)| {
            let relevant = match ix.messages.get(&m) {
                Some(pvm_core::Message::Proposal(x)) => x.slot == t,
                Some(pvm_core::Message::Vote(v)) => v.slot == t && h.contains(&v.voter),
                _ => false,
            };
            !relevant || !h.contains(&w) || r <= ix.first_send.get(&m).copied().unwrap_or(r) + half
        });
        if !fast {
            continue;
        }
        let Some(parent) = ix.parent(p.block) else { continue };
        let vr = ix.timing.vote_round(t);
        for v in h {
            checked += 1;
            let ok = ix
                .fast_confirms
                .iter()
                .any(|&(r, s, a, b)| r == vr && s == t && a == v && b == parent);
            if !ok {
                let w = Witness::NoFastConfirm { slot: t, validator: v, expected: parent };
                return Verdict::new("fast_confirm_liveness", checked, Some(w));
            }
        }
    }
    Verdict::new("fast_confirm_liveness", checked, None)
}
