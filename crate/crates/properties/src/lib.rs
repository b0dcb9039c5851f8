//! Checkers for safety, liveness, reorg resilience, asynchrony resilience,
//! the view-merge property, pivot density and fast confirmation.
//!
//! Every checker reads a [`Trace`](pvm_netsim::Trace) through a
//! [`TraceIndex`] and returns a [`Verdict`] with a witness on failure.
//! Canonical and confirmed chains are taken from state snapshots; a
//! snapshot value holds until the validator's next snapshot.

mod checks;
mod index;

pub use checks::{
    check_asynchrony_resilience, check_fast_confirm, check_liveness, check_pivot_density,
    check_reorg_resilience, check_safety, check_view_merge, pivot_slots, FastConfirmReport, Outcome, Sighting,
    Verdict, Witness,
};
pub use index::{HonestProposal, Snapshot, TraceIndex};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PropertyError {
    #[error("trace has no run metadata")]
    MissingMeta,
    #[error("precondition violated: {0}")]
    Precondition(String),
}
