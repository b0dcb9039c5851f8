//! Participation sets and the compliance conditions an execution must meet
//! for the protocol guarantees to apply.
//!
//! `H_t` is the set of honest validators active at the vote round of slot
//! `t` and `A_t` the set corrupted by then. τ-sleepiness requires, at every
//! slot `t ≥ 1`, that the validators that voted in slot `t-1` outnumber the
//! adversary together with validators that voted within the last `τ` slots
//! but not in `t-1`.

mod check;
mod participation;

pub use check::{aware_set, check_tau_pi, check_tau_sleepiness, ComplianceError, ComplianceReport, Condition, Row};
pub use participation::{Participation, Status};
