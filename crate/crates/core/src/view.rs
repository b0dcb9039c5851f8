use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::{Block, BlockId, BlockStore, CoreError, Vote};

/// A validator's view: a set of blocks and votes closed under dependencies.
/// Every view contains genesis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct View {
    blocks: BTreeMap<BlockId, Block>,
    votes: BTreeSet<Vote>,
}

impl Default for View {
    fn default() -> Self {
        Self::genesis()
    }
}

impl View {
    pub fn genesis() -> Self {
        let g = Block::genesis();
        View {
            blocks: BTreeMap::from([(g.id, g)]),
            votes: BTreeSet::new(),
        }
    }

    /// Builds a view and checks that it is closed.
    pub fn from_parts(
        blocks: impl IntoIterator<Item = Block>,
        votes: impl IntoIterator<Item = Vote>,
    ) -> Result<Self, CoreError> {
        let view = View {
            blocks: blocks.into_iter().map(|b| (b.id, b)).collect(),
            votes: votes.into_iter().collect(),
        };
        view.validate_closure()?;
        Ok(view)
    }

    pub fn blocks(&self) -> impl ExactSizeIterator<Item = &Block> + Clone {
        self.blocks.values()
    }

    pub fn votes(&self) -> &BTreeSet<Vote> {
        &self.votes
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn contains_vote(&self, v: &Vote) -> bool {
        self.votes.contains(v)
    }

    /// Adds a block whose parent is already in the view.
    pub fn insert_block(&mut self, block: Block) -> Result<bool, CoreError> {
        if self.blocks.contains_key(&block.id) {
            return Ok(false);
        }
        match block.parent {
            Some(p) if self.blocks.contains_key(&p) => {}
            Some(p) => return Err(CoreError::MissingParent { block: block.id, parent: p }),
            None => return Err(CoreError::SecondGenesis(block.id)),
        }
        self.blocks.insert(block.id, block);
        Ok(true)
    }

    /// Adds a vote for a block already in the view.
    pub fn insert_vote(&mut self, vote: Vote) -> Result<bool, CoreError> {
        if !self.blocks.contains_key(&vote.block) {
            return Err(CoreError::MissingVoteTarget { block: vote.block });
        }
        Ok(self.votes.insert(vote))
    }

    /// Union with another closed view. The result is closed.
    pub fn merge(&mut self, other: &View) {
        for (id, b) in &other.blocks {
            self.blocks.entry(*id).or_insert_with(|| b.clone());
        }
        if self.votes.is_empty() {
            self.votes = other.votes.clone();
        } else {
            self.votes.extend(other.votes.iter().copied());
        }
    }

    pub fn validate_closure(&self) -> Result<(), CoreError> {
        let genesis = Block::genesis();
        match self.blocks.get(&genesis.id) {
            Some(g) if *g == genesis => {}
            _ => return Err(CoreError::MissingGenesis),
        }
        for b in self.blocks.values() {
            if !b.id_is_valid() {
                return Err(CoreError::IdMismatch(b.id));
            }
            match b.parent {
                None if b.id == genesis.id => {}
                None => return Err(CoreError::SecondGenesis(b.id)),
                Some(p) => {
                    let parent = self
                        .blocks
                        .get(&p)
                        .ok_or(CoreError::MissingParent { block: b.id, parent: p })?;
                    if parent.slot >= b.slot {
                        return Err(CoreError::SlotNotIncreasing { block: b.id });
                    }
                }
            }
        }
        for v in &self.votes {
            if !self.blocks.contains_key(&v.block) {
                return Err(CoreError::MissingVoteTarget { block: v.block });
            }
        }
        Ok(())
    }

    /// Stable digest of the contents, used to identify proposals.
    pub fn digest(&self) -> u64 {
        let mut h = Sha256::new();
        for id in self.blocks.keys() {
            h.update(id.0.to_be_bytes());
        }
        h.update([0xff]);
        for v in &self.votes {
            h.update(v.slot.to_be_bytes());
            h.update(v.voter.0.to_be_bytes());
            h.update(v.block.0.to_be_bytes());
        }
        let out = h.finalize();
        let mut first = [0u8; 8];
        first.copy_from_slice(&out[..8]);
        u64::from_be_bytes(first)
    }
}

impl BlockStore for View {
    fn block(&self, id: BlockId) -> Option<&Block> {
        self.blocks.get(&id)
    }
}

/// `a ∪ b` for closed views.
pub fn merge_views(a: &View, b: &View) -> View {
    let mut out = a.clone();
    out.merge(b);
    out
}

#[derive(Serialize, Deserialize)]
struct RawView {
    blocks: Vec<Block>,
    votes: Vec<Vote>,
}

impl Serialize for View {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut blocks: Vec<Block> = self.blocks.values().cloned().collect();
        blocks.sort_by_key(|b| (b.slot, b.id));
        RawView {
            blocks,
            votes: self.votes.iter().copied().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for View {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawView::deserialize(d)?;
        View::from_parts(raw.blocks, raw.votes).map_err(serde::de::Error::custom)
    }
}
