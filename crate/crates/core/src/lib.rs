//! Shared data model for propose-vote-merge protocols: blocks, votes, views,
//! gossip messages and slot timing.

mod block;
mod ids;
mod message;
mod store;
mod time;
mod view;

pub use block::{Block, Vote};
pub use ids::{BlockId, ParseBlockIdError, ValidatorId};
pub use message::{Message, MessageKey, Proposal};
pub use store::{BlockStore, BlockTree};
pub use time::{Bound, Phase, Round, Slot, Timing};
pub use view::{merge_views, View};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoreError {
    #[error("view has no genesis block")]
    MissingGenesis,
    #[error("block {0} has no parent but is not genesis")]
    SecondGenesis(BlockId),
    #[error("block {block} references missing parent {parent}")]
    MissingParent { block: BlockId, parent: BlockId },
    #[error("vote references missing block {block}")]
    MissingVoteTarget { block: BlockId },
    #[error("block {block} does not have a larger slot than its parent")]
    SlotNotIncreasing { block: BlockId },
    #[error("block {0} id does not match its contents")]
    IdMismatch(BlockId),
}
