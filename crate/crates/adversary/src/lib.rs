//! Adversary strategies for the simulator, a name-keyed registry for them,
//! and builders that turn attack parameters into complete scenarios.

mod attacks;
mod builders;
mod random;
mod registry;
mod script;

pub use attacks::{AsyncWakeup, BaitAndSwitch, Branch, Cycle, DaCycle, GoldfishAsync, StaleVotes};
pub use attacks::{AsyncWakeupParams, BaitParams, DaCycleParams, GoldfishParams, StaleVotesParams};
pub use builders::AttackParams;
pub use random::{generate_trial, RandomCompliant, RandomParams};
pub use registry::{registry, BuildFn, GenerateFn, StrategyEntry, StrategyRegistry};
pub use script::Split;

use pvm_netsim::{Execution, Scenario, SimError};

#[derive(Debug, thiserror::Error)]
pub enum AdversaryError {
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("strategy {0} has no scenario builder")]
    NoBuilder(String),
    #[error("{strategy}: hypothesis violated: {reason}")]
    Hypothesis { strategy: &'static str, reason: String },
    #[error("{strategy}: invalid strategy_params: {reason}")]
    Params { strategy: String, reason: String },
    #[error("no compliant schedule found in {0} attempts")]
    Exhausted(usize),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Runs `scenario` against the strategy it names.
pub fn execute(scenario: &Scenario) -> Result<Execution, AdversaryError> {
    scenario.validate()?;
    let mut adv = registry().build(scenario)?;
    Ok(pvm_netsim::run(scenario, adv.as_mut())?)
}
