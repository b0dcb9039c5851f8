use std::collections::BTreeMap;
use std::sync::OnceLock;

use pvm_netsim::{Adversary, Passive, Scenario};

use crate::attacks::{AsyncWakeup, BaitAndSwitch, DaCycle, GoldfishAsync, StaleVotes};
use crate::builders::{self, AttackParams};
use crate::random::RandomCompliant;
use crate::AdversaryError;

pub type BuildFn = fn(&Scenario) -> Result<Box<dyn Adversary>, AdversaryError>;
pub type GenerateFn = fn(&AttackParams) -> Result<Scenario, AdversaryError>;

pub struct StrategyEntry {
    pub summary: &'static str,
    pub build: BuildFn,
    pub generate: Option<GenerateFn>,
}

/// Strategies by name. Scenarios refer to one through their `strategy` field.
pub struct StrategyRegistry {
    entries: BTreeMap<&'static str, StrategyEntry>,
}

fn null(_: &Scenario) -> Result<Box<dyn Adversary>, AdversaryError> {
    Ok(Box::new(Passive))
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        StrategyRegistry { entries: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("null", StrategyEntry { summary: "no adversarial action", build: null, generate: None });
        r.register(
            "lmd_bait_and_switch",
            StrategyEntry {
                summary: "split honest votes, wait, then flip LMD-GHOST with one corruption",
                build: BaitAndSwitch::build,
                generate: Some(builders::lmd_bait_and_switch),
            },
        );
        r.register(
            "rlmd_stale_votes",
            StrategyEntry {
                summary: "reorg with unexpired votes of sleeping validators",
                build: StaleVotes::build,
                generate: Some(builders::rlmd_stale_votes),
            },
        );
        r.register(
            "rlmd_da_cycle",
            StrategyEntry {
                summary: "repeated reorgs between two branches via waking sleepers",
                build: DaCycle::build,
                generate: Some(builders::rlmd_da_cycle),
            },
        );
        r.register(
            "rlmd_async_wakeup",
            StrategyEntry {
                summary: "validator wakes during asynchrony and proposes on genesis",
                build: AsyncWakeup::build,
                generate: Some(builders::rlmd_async_wakeup),
            },
        );
        r.register(
            "goldfish_one_slot_async",
            StrategyEntry {
                summary: "one asynchronous slot lets a single vote reorg Goldfish",
                build: GoldfishAsync::build,
                generate: Some(builders::goldfish_one_slot_async),
            },
        );
        r.register(
            "random_compliant",
            StrategyEntry {
                summary: "random adversary on a compliant random schedule",
                build: RandomCompliant::build,
                generate: Some(builders::random_template),
            },
        );
        r
    }

    pub fn register(&mut self, name: &'static str, entry: StrategyEntry) {
        self.entries.insert(name, entry);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn get(&self, name: &str) -> Result<&StrategyEntry, AdversaryError> {
        self.entries.get(name).ok_or_else(|| AdversaryError::UnknownStrategy(name.to_string()))
    }

    pub fn build(&self, scenario: &Scenario) -> Result<Box<dyn Adversary>, AdversaryError> {
        (self.get(&scenario.strategy)?.build)(scenario)
    }

    pub fn generate(&self, name: &str, params: &AttackParams) -> Result<Scenario, AdversaryError> {
        let gen = self.get(name)?.generate.ok_or_else(|| AdversaryError::NoBuilder(name.to_string()))?;
        gen(params)
    }
}

pub fn registry() -> &'static StrategyRegistry {
    static REG: OnceLock<StrategyRegistry> = OnceLock::new();
    REG.get_or_init(StrategyRegistry::with_builtins)
}
