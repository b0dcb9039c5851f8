use std::collections::{BTreeMap, BTreeSet};

use pvm_core::{Block, BlockId, BlockStore, View, Vote};

/// Messages received but not yet merged into the view.
#[derive(Clone, Debug, Default)]
pub struct Buffer {
    blocks: BTreeMap<BlockId, Block>,
    votes: BTreeSet<Vote>,
}

impl Buffer {
    pub fn add_block(&mut self, b: Block) {
        self.blocks.entry(b.id).or_insert(b);
    }

    pub fn add_vote(&mut self, v: Vote) {
        self.votes.insert(v);
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty() && self.votes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.blocks.len() + self.votes.len()
    }

    /// Moves everything whose dependencies are in `view` (or become so) into
    /// it. Messages with missing dependencies stay buffered.
    pub fn drain_into(&mut self, view: &mut View) {
        let mut blocks: Vec<Block> = std::mem::take(&mut self.blocks).into_values().collect();
        blocks.sort_by_key(|b| b.slot);
        for b in blocks {
            if view.contains_block(b.id) {
                continue;
            }
            if b.parent.is_some_and(|p| view.contains_block(p)) {
                view.insert_block(b).expect("parent present");
            } else {
                self.blocks.insert(b.id, b);
            }
        }
        let votes = std::mem::take(&mut self.votes);
        for v in votes {
            if view.contains_block(v.block) {
                view.insert_vote(v).expect("target present");
            } else {
                self.votes.insert(v);
            }
        }
    }
}
