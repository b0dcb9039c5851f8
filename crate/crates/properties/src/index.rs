use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use pvm_core::{Block, BlockId, BlockStore, BlockTree, Message, Round, Slot, Timing, ValidatorId, Vote};
use pvm_compliance::Participation;
use pvm_netsim::{Event, SnapStatus, Trace, TraceMeta};

use crate::PropertyError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub round: Round,
    pub validator: ValidatorId,
    pub status: SnapStatus,
    pub canonical: Option<BlockId>,
    pub confirmed: Option<BlockId>,
}

#[derive(Clone, Debug)]
pub struct HonestProposal {
    pub slot: Slot,
    pub round: Round,
    pub proposer: ValidatorId,
    pub block: BlockId,
}

/// Lookup tables over a trace shared by all checkers.
pub struct TraceIndex {
    pub meta: TraceMeta,
    pub timing: Timing,
    pub tree: BlockTree,
    pub participation: Participation,
    pub proposals: Vec<HonestProposal>,
    pub snapshots: Vec<Snapshot>,
    pub honest_votes: Vec<(Round, ValidatorId, Vote)>,
    pub fast_confirms: Vec<(Round, Slot, ValidatorId, BlockId)>,
    pub corrupted_at: BTreeMap<ValidatorId, Round>,
    /// Every vote that appears anywhere in the trace.
    pub all_votes: BTreeSet<Vote>,
    pub messages: HashMap<u64, Message>,
    pub first_send: HashMap<u64, Round>,
    pub deliveries: Vec<(Round, ValidatorId, u64)>,
    pub end_round: Round,
    ancestors: HashMap<BlockId, HashSet<BlockId>>,
}

impl TraceIndex {
    pub fn new(trace: &Trace) -> Result<Self, PropertyError> {
        let meta = trace.meta().ok_or(PropertyError::MissingMeta)?.clone();
        let timing = Timing::new(meta.delta);
        let participation = Participation::from_trace(trace).ok_or(PropertyError::MissingMeta)?;
        let mut blocks: Vec<Block> = Vec::new();
        let mut ix = TraceIndex {
            end_round: meta.horizon * timing.slot_len(),
            meta,
            timing,
            tree: BlockTree::new(),
            participation,
            proposals: Vec::new(),
            snapshots: Vec::new(),
            honest_votes: Vec::new(),
            fast_confirms: Vec::new(),
            corrupted_at: BTreeMap::new(),
            all_votes: BTreeSet::new(),
            messages: HashMap::new(),
            first_send: HashMap::new(),
            deliveries: Vec::new(),
            ancestors: HashMap::new(),
        };
        for e in &trace.events {
            match e {
                Event::Send { round, msg, message, .. } => {
                    ix.first_send.entry(*msg).or_insert(*round);
                    if let Some(m) = message {
                        match m {
                            Message::Block(b) => blocks.push(b.clone()),
                            Message::Vote(v) => {
                                ix.all_votes.insert(*v);
                            }
                            Message::Proposal(p) => {
                                blocks.push(p.block.clone());
                                blocks.extend(p.view.blocks().cloned());
                                ix.all_votes.extend(p.view.votes().iter().copied());
                            }
                        }
                        ix.messages.insert(*msg, m.clone());
                    }
                }
                Event::Deliver { round, actor, msg, .. } => ix.deliveries.push((*round, *actor, *msg)),
                Event::Propose { round, slot, actor, block } => {
                    blocks.push(block.clone());
                    ix.proposals.push(HonestProposal { slot: *slot, round: *round, proposer: *actor, block: block.id });
                }
                Event::Vote { round, actor, vote, .. } => {
                    ix.honest_votes.push((*round, *actor, *vote));
                    ix.all_votes.insert(*vote);
                }
                Event::FastConfirm { round, slot, actor, block } => {
                    ix.fast_confirms.push((*round, *slot, *actor, *block))
                }
                Event::Corrupt { round, actor, .. } => {
                    ix.corrupted_at.entry(*actor).or_insert(*round);
                }
                Event::StateSnapshot { round, validator, status, canonical, confirmed, .. } => {
                    ix.snapshots.push(Snapshot {
                        round: *round,
                        validator: *validator,
                        status: *status,
                        canonical: *canonical,
                        confirmed: *confirmed,
                    })
                }
                _ => {}
            }
        }
        ix.tree.extend(blocks);
        Ok(ix)
    }

    pub fn n(&self) -> usize {
        self.meta.n
    }

    /// Snapshots of active validators whose canonical chain is known.
    pub fn live_snapshots(&self) -> impl Iterator<Item = &Snapshot> {
        self.snapshots
            .iter()
            .filter(|s| s.status == SnapStatus::Active && s.canonical.is_some())
    }

    /// Whether `a ⪯ b`, memoising the ancestor set of `b`.
    pub fn is_prefix(&mut self, a: BlockId, b: BlockId) -> bool {
        if !self.ancestors.contains_key(&b) {
            let set: HashSet<BlockId> = self.tree.chain(b).into_iter().collect();
            self.ancestors.insert(b, set);
        }
        self.ancestors[&b].contains(&a)
    }

    pub fn parent(&self, b: BlockId) -> Option<BlockId> {
        self.tree.block(b).and_then(|b| b.parent)
    }

    pub fn is_async_slot(&self, t: Slot) -> bool {
        self.meta.tpa.is_some_and(|tpa| tpa.is_async_slot(t))
    }

    /// Validators with two different votes for one slot anywhere in the trace.
    pub fn equivocators(&self) -> BTreeSet<ValidatorId> {
        equivocating_voters(&self.all_votes)
    }
}

fn equivocating_voters(votes: &BTreeSet<Vote>) -> BTreeSet<ValidatorId> {
    let mut out = BTreeSet::new();
    let mut prev: Option<&Vote> = None;
    for v in votes {
        if let Some(p) = prev {
            if p.slot == v.slot && p.voter == v.voter && p.block != v.block {
                out.insert(v.voter);
            }
        }
        prev = Some(v);
    }
    out
}
