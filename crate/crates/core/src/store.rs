use std::collections::HashMap;

use crate::{Block, BlockId};

/// Anything that can resolve block ids. Ancestry queries walk parent links,
/// which always decrease the slot.
pub trait BlockStore {
    fn block(&self, id: BlockId) -> Option<&Block>;

    fn contains_block(&self, id: BlockId) -> bool {
        self.block(id).is_some()
    }

    /// `a ⪯ b`: `a` is `b` or one of its ancestors. False if either is unknown.
    fn is_prefix(&self, a: BlockId, b: BlockId) -> bool {
        let Some(target) = self.block(a) else {
            return false;
        };
        let mut cur = b;
        loop {
            if cur == a {
                return true;
            }
            let Some(blk) = self.block(cur) else {
                return false;
            };
            if blk.slot <= target.slot {
                return false;
            }
            match blk.parent {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    fn is_strict_prefix(&self, a: BlockId, b: BlockId) -> bool {
        a != b && self.is_prefix(a, b)
    }

    fn conflicting(&self, a: BlockId, b: BlockId) -> bool {
        !self.is_prefix(a, b) && !self.is_prefix(b, a)
    }

    /// Number of ancestors; genesis has height 0.
    fn height(&self, id: BlockId) -> Option<u64> {
        let mut h = 0;
        let mut cur = self.block(id)?;
        while let Some(p) = cur.parent {
            cur = self.block(p)?;
            h += 1;
        }
        Some(h)
    }

    /// Deepest ancestor-or-self of `id` whose slot is at most `max_slot`.
    fn ancestor_at_or_below(&self, id: BlockId, max_slot: u64) -> Option<BlockId> {
        let mut cur = self.block(id)?;
        while cur.slot > max_slot {
            cur = self.block(cur.parent?)?;
        }
        Some(cur.id)
    }

    /// Blocks from genesis to `id`, inclusive.
    fn chain(&self, id: BlockId) -> Vec<BlockId> {
        let mut out = Vec::new();
        let mut cur = self.block(id);
        while let Some(b) = cur {
            out.push(b.id);
            cur = b.parent.and_then(|p| self.block(p));
        }
        out.reverse();
        out
    }
}

/// Every block seen in an execution, with cached heights.
#[derive(Clone, Debug, Default)]
pub struct BlockTree {
    blocks: HashMap<BlockId, (Block, u64)>,
}

impl BlockTree {
    pub fn new() -> Self {
        let mut t = BlockTree::default();
        t.insert(Block::genesis());
        t
    }

    /// Inserts a block whose parent is already present. Returns false for
    /// duplicates and orphans.
    pub fn insert(&mut self, block: Block) -> bool {
        if self.blocks.contains_key(&block.id) {
            return false;
        }
        let h = match block.parent {
            None => 0,
            Some(p) => match self.blocks.get(&p) {
                Some((_, ph)) => ph + 1,
                None => return false,
            },
        };
        self.blocks.insert(block.id, (block, h));
        true
    }

    /// Inserts blocks in any order, retrying orphans until no progress.
    pub fn extend<I: IntoIterator<Item = Block>>(&mut self, blocks: I) {
        let mut pending: Vec<Block> = blocks.into_iter().collect();
        pending.sort_by_key(|b| b.slot);
        loop {
            let before = pending.len();
            pending.retain(|b| !self.contains_block(b.id) && !self.insert(b.clone()));
            if pending.is_empty() || pending.len() == before {
                break;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Block> {
        self.blocks.values().map(|(b, _)| b)
    }
}

impl BlockStore for BlockTree {
    fn block(&self, id: BlockId) -> Option<&Block> {
        self.blocks.get(&id).map(|(b, _)| b)
    }

    fn height(&self, id: BlockId) -> Option<u64> {
        self.blocks.get(&id).map(|(_, h)| *h)
    }
}
