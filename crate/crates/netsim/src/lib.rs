//! Round-based simulator for propose-vote-merge protocols.
//!
//! The network is synchronous with bound `Δ` except inside a declared
//! asynchrony period, where the adversary picks delivery rounds freely up to
//! `Δ` rounds after synchrony resumes. Honest validators re-gossip everything
//! they receive, including the contents of proposal views. Messages for a
//! sleeping validator are held until it wakes.

mod adversary;
mod scenario;
mod sim;
mod trace;

pub use adversary::{Action, Adversary, Delivery, DeliveryKind, Passive, World};
pub use scenario::{
    Awake, Corruption, Expected, ProposerSchedule, Scenario, SleepSpan, Tpa, SCHEMA_VERSION,
};
pub use sim::{run, Execution};
pub use pvm_validator::{Status, Variant};
pub use trace::{Event, SnapStatus, Trace, TraceMeta};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid adversary action: {0}")]
    InvalidAction(String),
    #[error("malformed trace: {0}")]
    Trace(String),
}
