use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Block, BlockId, Slot, ValidatorId, View, Vote};

/// A proposal carries the new block and the proposer's view including it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposal {
    pub proposer: ValidatorId,
    pub slot: Slot,
    pub block: Block,
    pub view: Arc<View>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Message {
    Block(Block),
    Vote(Vote),
    Proposal(Proposal),
}

/// Identity used to deduplicate gossip.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageKey {
    Block(BlockId),
    Vote(Vote),
    Proposal {
        proposer: ValidatorId,
        slot: Slot,
        block: BlockId,
        view: u64,
    },
}

impl Message {
    pub fn key(&self) -> MessageKey {
        match self {
            Message::Block(b) => MessageKey::Block(b.id),
            Message::Vote(v) => MessageKey::Vote(*v),
            Message::Proposal(p) => MessageKey::Proposal {
                proposer: p.proposer,
                slot: p.slot,
                block: p.block.id,
                view: p.view.digest(),
            },
        }
    }

    /// The validator whose key signs this message.
    pub fn author(&self) -> ValidatorId {
        match self {
            Message::Block(b) => b.proposer,
            Message::Vote(v) => v.voter,
            Message::Proposal(p) => p.proposer,
        }
    }

    pub fn slot(&self) -> Slot {
        match self {
            Message::Block(b) => b.slot,
            Message::Vote(v) => v.slot,
            Message::Proposal(p) => p.slot,
        }
    }
}
