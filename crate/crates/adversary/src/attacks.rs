use pvm_core::{Block, BlockId, BlockStore, Message, Slot, ValidatorId, Vote};
use pvm_netsim::{Action, Adversary, Delivery, Scenario, World};
use serde::{Deserialize, Serialize};

use crate::script::{at, honest_ids, params, propose, tip, vote, Split};
use crate::AdversaryError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaitParams {
    pub split: Split,
    /// Slot at which `turncoat` is corrupted and both adversaries vote `B`.
    pub switch_slot: Slot,
    pub turncoat: ValidatorId,
}

/// Splits honest votes between `A` and `B`, lets the `B` voters fall
/// asleep, then tips LMD-GHOST towards `B` with one corruption. Latest
/// messages never expire, so the sleepers' old votes still count.
#[derive(Debug)]
pub struct BaitAndSwitch {
    p: BaitParams,
    b: Option<BlockId>,
}

impl BaitAndSwitch {
    pub fn build(sc: &Scenario) -> Result<Box<dyn Adversary>, AdversaryError> {
        Ok(Box::new(BaitAndSwitch { p: params(sc)?, b: None }))
    }
}

impl Adversary for BaitAndSwitch {
    fn name(&self) -> &str {
        "lmd_bait_and_switch"
    }

    fn on_round(&mut self, world: &World<'_>) -> Vec<Action> {
        if self.p.split.is_due(world) {
            let (actions, _, b) = self.p.split.act(world);
            self.b = Some(b);
            return actions;
        }
        let (Some(b), true) = (self.b, world.round == world.timing.propose_round(self.p.switch_slot)) else {
            return Vec::new();
        };
        // Delivered before the proposer of the switch slot drains its buffer,
        // so its proposal already extends B and carries these votes.
        let to = at(&honest_ids(world), world.round);
        let t = self.p.switch_slot;
        vec![vote(self.p.split.adversary, t, b, to.clone()), vote(self.p.turncoat, t, b, to)]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaleVotesParams {
    pub split: Split,
    /// Slot whose votes the turncoats replay for `B` after its vote round.
    pub late_slot: Slot,
    pub turncoats: Vec<ValidatorId>,
}

/// Like the bait-and-switch, but against an expiry window: two late
/// equivocations cancel two `A` votes while the sleepers' `B` votes are
/// still unexpired.
#[derive(Debug)]
pub struct StaleVotes {
    p: StaleVotesParams,
    b: Option<BlockId>,
}

impl StaleVotes {
    pub fn build(sc: &Scenario) -> Result<Box<dyn Adversary>, AdversaryError> {
        Ok(Box::new(StaleVotes { p: params(sc)?, b: None }))
    }
}

impl Adversary for StaleVotes {
    fn name(&self) -> &str {
        "rlmd_stale_votes"
    }

    fn on_round(&mut self, world: &World<'_>) -> Vec<Action> {
        if self.p.split.is_due(world) {
            let (actions, _, b) = self.p.split.act(world);
            self.b = Some(b);
            return actions;
        }
        let Some(b) = self.b else {
            return Vec::new();
        };
        let t = self.p.late_slot;
        let vote_round = world.timing.vote_round(t);
        let to = at(&honest_ids(world), world.timing.merge_round(t));
        if world.round == vote_round {
            vec![vote(self.p.split.adversary, t, b, to)]
        } else if world.round == vote_round + 1 {
            self.p.turncoats.iter().map(|v| vote(*v, t, b, to.clone())).collect()
        } else {
            Vec::new()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    A,
    B,
}

/// One reorg round of the cycle attack.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cycle {
    /// Slot at which the reorg lands.
    pub slot: Slot,
    pub proposer: ValidatorId,
    /// Every corrupted validator once this cycle's corruptions are done.
    pub coalition: Vec<ValidatorId>,
    /// Honest active validators that see the coalition's votes and flip.
    pub flip: Vec<ValidatorId>,
    /// Branch the flipping validators move to.
    pub target: Branch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DaCycleParams {
    pub split: Split,
    pub cycles: Vec<Cycle>,
}

/// Alternates the canonical branch every `η` slots. Before each reorg two
/// more validators are corrupted and the sleepers that voted for the other
/// branch are woken, so their unexpired votes plus the coalition's outweigh
/// the remaining active validators.
#[derive(Debug)]
pub struct DaCycle {
    p: DaCycleParams,
    roots: Option<(BlockId, BlockId)>,
}

impl DaCycle {
    pub fn build(sc: &Scenario) -> Result<Box<dyn Adversary>, AdversaryError> {
        Ok(Box::new(DaCycle { p: params(sc)?, roots: None }))
    }
}

impl Adversary for DaCycle {
    fn name(&self) -> &str {
        "rlmd_da_cycle"
    }

    fn on_round(&mut self, world: &World<'_>) -> Vec<Action> {
        if self.p.split.is_due(world) {
            let (actions, a, b) = self.p.split.act(world);
            self.roots = Some((a, b));
            return actions;
        }
        let Some((a, b)) = self.roots else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for c in &self.p.cycles {
            let root = match c.target {
                Branch::A => a,
                Branch::B => b,
            };
            if world.round == world.timing.propose_round(c.slot) {
                let target = tip(world, root);
                let block = world.blocks.block(target).expect("tip is known").clone();
                let mut view = world.validator(c.flip[0]).view().clone();
                view.insert_block(block.clone()).expect("tip extends a known block");
                for v in &c.coalition {
                    view.insert_vote(Vote { slot: c.slot - 1, voter: *v, block: target }).expect("block in view");
                }
                let due = world.timing.vote_round(c.slot);
                out.push(propose(c.proposer, c.slot, block, view, at(&c.flip, due)));
            } else if world.round == world.timing.vote_round(c.slot) {
                let target = tip(world, root);
                let to = at(&honest_ids(world), world.timing.merge_round(c.slot));
                out.extend(c.coalition.iter().map(|v| vote(*v, c.slot, target, to.clone())));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsyncWakeupParams {
    /// Validator that wakes inside the asynchronous period and is kept in
    /// the dark until it ends.
    pub late: ValidatorId,
}

#[derive(Debug)]
pub struct AsyncWakeup {
    p: AsyncWakeupParams,
}

impl AsyncWakeup {
    pub fn build(sc: &Scenario) -> Result<Box<dyn Adversary>, AdversaryError> {
        Ok(Box::new(AsyncWakeup { p: params(sc)? }))
    }
}

impl Adversary for AsyncWakeup {
    fn name(&self) -> &str {
        "rlmd_async_wakeup"
    }

    fn delivery(&mut self, d: &Delivery<'_>) -> Option<u64> {
        (d.asynchronous && d.to == self.p.late).then_some(d.latest)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldfishParams {
    pub adversary: ValidatorId,
    /// The asynchronous slot; its honest votes arrive only at the cap.
    pub slot: Slot,
}

impl GoldfishParams {
    /// Block `A` the adversary reveals in the next slot.
    pub fn block_a(&self) -> Block {
        Block::new(&Block::genesis(), self.slot, self.adversary, b"A".to_vec())
    }
}

/// With a single expiry slot, delaying one slot's honest votes leaves every
/// view with only its own vote, and one adversarial vote plus a tie-break
/// decides the head.
#[derive(Debug)]
pub struct GoldfishAsync {
    p: GoldfishParams,
}

impl GoldfishAsync {
    pub fn build(sc: &Scenario) -> Result<Box<dyn Adversary>, AdversaryError> {
        Ok(Box::new(GoldfishAsync { p: params(sc)? }))
    }
}

impl Adversary for GoldfishAsync {
    fn name(&self) -> &str {
        "goldfish_one_slot_async"
    }

    fn on_round(&mut self, world: &World<'_>) -> Vec<Action> {
        let t = self.p.slot;
        if world.round != world.timing.propose_round(t + 1) {
            return Vec::new();
        }
        let a = self.p.block_a();
        let b = Block::new(&a, t + 1, self.p.adversary, b"B".to_vec());
        let mut view = pvm_core::View::genesis();
        view.insert_block(a.clone()).expect("genesis child");
        view.insert_block(b.clone()).expect("child of A");
        view.insert_vote(Vote { slot: t, voter: self.p.adversary, block: a.id }).expect("A in view");
        vec![propose(self.p.adversary, t + 1, b, view, at(&honest_ids(world), world.round))]
    }

    fn delivery(&mut self, d: &Delivery<'_>) -> Option<u64> {
        match d.msg {
            Message::Vote(v) if v.slot == self.p.slot && d.asynchronous => Some(d.latest),
            _ => None,
        }
    }
}
