use std::sync::Arc;

use pvm_core::{Block, BlockId, BlockStore, Message, Proposal, Round, Slot, ValidatorId, View, Vote};
use pvm_netsim::{Action, Scenario, World};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::AdversaryError;

pub(crate) fn params<T: DeserializeOwned>(sc: &Scenario) -> Result<T, AdversaryError> {
    serde_json::from_value(sc.strategy_params.clone())
        .map_err(|e| AdversaryError::Params { strategy: sc.strategy.clone(), reason: e.to_string() })
}

pub(crate) fn vote(from: ValidatorId, slot: Slot, block: BlockId, deliver: Vec<(ValidatorId, Round)>) -> Action {
    Action::Send { from, message: Message::Vote(Vote { slot, voter: from, block }), deliver }
}

pub(crate) fn propose(proposer: ValidatorId, slot: Slot, block: Block, view: View, deliver: Vec<(ValidatorId, Round)>) -> Action {
    let message = Message::Proposal(Proposal { proposer, slot, block, view: Arc::new(view) });
    Action::Send { from: proposer, message, deliver }
}

pub(crate) fn at(ids: &[ValidatorId], round: Round) -> Vec<(ValidatorId, Round)> {
    ids.iter().map(|v| (*v, round)).collect()
}

pub(crate) fn honest_ids(world: &World<'_>) -> Vec<ValidatorId> {
    world.honest().map(|v| v.id).collect()
}

/// Deepest known descendant of `root`, lowest id on ties.
pub(crate) fn tip(world: &World<'_>, root: BlockId) -> BlockId {
    world
        .blocks
        .iter()
        .filter(|b| world.blocks.is_prefix(root, b.id))
        .map(|b| (world.blocks.height(b.id).unwrap_or(0), std::cmp::Reverse(b.id)))
        .max()
        .map(|(_, id)| id.0)
        .unwrap_or(root)
}

/// Two conflicting blocks on the honest head published in slot `slot`: `A`
/// stamped `slot - 1` goes to `to_a`, `B` stamped `slot` goes to `to_b`,
/// both arriving at the end of the proposal window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub adversary: ValidatorId,
    pub slot: Slot,
    pub to_a: Vec<ValidatorId>,
    pub to_b: Vec<ValidatorId>,
}

impl Split {
    pub fn is_due(&self, world: &World<'_>) -> bool {
        world.round == world.timing.propose_round(self.slot)
    }

    pub fn act(&self, world: &World<'_>) -> (Vec<Action>, BlockId, BlockId) {
        let t = self.slot;
        let base = world.validator(self.to_a[0]).view().clone();
        let head = world.fc.head(&base, t, world.tiebreak);
        let parent = base.block(head).expect("head is in the view").clone();
        let a = Block::new(&parent, t - 1, self.adversary, b"A".to_vec());
        let b = Block::new(&parent, t, self.adversary, b"B".to_vec());
        let due = world.timing.vote_round(t);
        let (ia, ib) = (a.id, b.id);
        let mut va = base.clone();
        va.insert_block(a.clone()).expect("parent in view");
        let mut vb = base;
        vb.insert_block(b.clone()).expect("parent in view");
        let actions = vec![
            propose(self.adversary, t, a, va, at(&self.to_a, due)),
            propose(self.adversary, t, b, vb, at(&self.to_b, due)),
        ];
        (actions, ia, ib)
    }
}
