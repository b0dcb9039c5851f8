use std::collections::HashMap;

use pvm_core::{Block, BlockId, BlockStore, View, Vote};
use serde::{Deserialize, Serialize};

/// How to pick among equally heavy siblings. By default the smallest id
/// wins; a pinned block wins any tie on its own ancestry path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieBreak {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pin: Option<BlockId>,
}

impl TieBreak {
    pub fn pinned(pin: BlockId) -> Self {
        TieBreak { pin: Some(pin) }
    }
}

/// Subtree weights: for every block in the view, the number of `votes`
/// targeting it or one of its descendants.
pub fn subtree_weights(view: &View, votes: &[Vote]) -> HashMap<BlockId, usize> {
    let mut w: HashMap<BlockId, usize> = view.blocks().map(|b| (b.id, 0)).collect();
    for v in votes {
        if let Some(x) = w.get_mut(&v.block) {
            *x += 1;
        }
    }
    let mut order: Vec<&Block> = view.blocks().collect();
    order.sort_by(|a, b| b.slot.cmp(&a.slot));
    for b in order {
        if let Some(p) = b.parent {
            let own = w[&b.id];
            *w.get_mut(&p).expect("view is closed") += own;
        }
    }
    w
}

/// Greedy heaviest-subtree walk from genesis.
pub fn ghost(view: &View, votes: &[Vote], tb: &TieBreak) -> BlockId {
    let weights = subtree_weights(view, votes);
    let mut children: HashMap<BlockId, Vec<BlockId>> = HashMap::new();
    let mut root = None;
    for b in view.blocks() {
        match b.parent {
            Some(p) => children.entry(p).or_default().push(b.id),
            None => root = Some(b.id),
        }
    }
    let pin_path = |c: BlockId| tb.pin.is_some_and(|p| view.is_prefix(c, p));
    let mut cur = root.expect("view contains genesis");
    while let Some(kids) = children.get(&cur) {
        let best_w = kids.iter().map(|k| weights[k]).max().expect("non-empty");
        let tied: Vec<BlockId> = kids.iter().copied().filter(|k| weights[k] == best_w).collect();
        cur = tied
            .iter()
            .copied()
            .find(|k| pin_path(*k))
            .unwrap_or_else(|| *tied.iter().min().expect("non-empty"));
    }
    cur
}
