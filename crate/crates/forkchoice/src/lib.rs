//! Fork-choice rules for propose-vote-merge protocols.
//!
//! Every rule is `GHOST ∘ filter` for some composition of the equivocation,
//! latest-message and expiry filters. Rules are looked up by name through
//! [`registry`], e.g. `"rlmd_ghost(3)"` or `"ghost_eph"`.

pub mod filters;
mod ghost;
mod registry;
mod rules;

pub use ghost::{ghost, subtree_weights, TieBreak};
pub use registry::{instantiate, registry, Registry};
pub use rules::{ForkChoice, ForkChoiceKind, Ghost, GhostEph, LmdGhost, RlmdGhost};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FcError {
    #[error("unknown fork-choice rule {0:?}")]
    UnknownRule(String),
    #[error("bad fork-choice parameter: {0}")]
    BadParameter(String),
    #[error("cannot parse fork-choice kind {0:?}")]
    Syntax(String),
}
