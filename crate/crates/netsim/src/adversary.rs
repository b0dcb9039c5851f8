use std::collections::BTreeSet;

use pvm_core::{BlockTree, Message, Round, Slot, Timing, ValidatorId, View};
use pvm_forkchoice::{ForkChoice, TieBreak};
use pvm_validator::Validator;

use crate::{Scenario, Tpa};

/// Something the adversary does at the start of a round.
#[derive(Clone, Debug)]
pub enum Action {
    /// Send a message signed by a corrupted validator. Each recipient gets it
    /// at the given round (not before the current one); others only see it if
    /// an honest validator relays it.
    Send {
        from: ValidatorId,
        message: Message,
        deliver: Vec<(ValidatorId, Round)>,
    },
    Sleep(ValidatorId),
    Wake(ValidatorId),
    Corrupt(ValidatorId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeliveryKind {
    /// First hop from an honest sender.
    Direct,
    /// Re-gossip by an honest validator that received the message.
    Relay,
    /// Queued for a sleeping validator that just woke up.
    Wake,
}

/// A pending honest delivery whose round the adversary may choose within
/// `[earliest, latest]`.
#[derive(Debug)]
pub struct Delivery<'a> {
    pub msg: &'a Message,
    pub to: ValidatorId,
    pub ready: Round,
    pub kind: DeliveryKind,
    pub asynchronous: bool,
    pub earliest: Round,
    pub latest: Round,
    pub default: Round,
}

/// Read-only snapshot of the execution handed to the adversary.
pub struct World<'a> {
    pub round: Round,
    pub timing: Timing,
    pub scenario: &'a Scenario,
    pub validators: &'a [Validator],
    pub corrupted: &'a BTreeSet<ValidatorId>,
    pub blocks: &'a BlockTree,
    pub fc: &'a dyn ForkChoice,
    pub tiebreak: &'a TieBreak,
}

impl World<'_> {
    pub fn slot(&self) -> Slot {
        self.timing.slot_of(self.round)
    }

    pub fn n(&self) -> usize {
        self.scenario.n
    }

    pub fn tpa(&self) -> Option<Tpa> {
        self.scenario.tpa
    }

    pub fn proposer(&self, slot: Slot) -> ValidatorId {
        self.scenario.proposer(slot)
    }

    pub fn is_corrupted(&self, v: ValidatorId) -> bool {
        self.corrupted.contains(&v)
    }

    pub fn validator(&self, v: ValidatorId) -> &Validator {
        &self.validators[v.index()]
    }

    pub fn honest(&self) -> impl Iterator<Item = &Validator> + '_ {
        self.validators.iter().filter(|v| !self.corrupted.contains(&v.id))
    }

    /// Union of the views of the given validators.
    pub fn union_view(&self, ids: impl IntoIterator<Item = ValidatorId>) -> View {
        let mut out = View::genesis();
        for id in ids {
            out.merge(self.validator(id).view());
        }
        out
    }
}

/// Hook through which an adversary strategy drives an execution.
pub trait Adversary: Send {
    fn name(&self) -> &str;

    fn on_round(&mut self, _world: &World<'_>) -> Vec<Action> {
        Vec::new()
    }

    /// Chooses the delivery round of an honest message. `None` keeps the
    /// default; the result is clamped to the allowed interval.
    fn delivery(&mut self, _d: &Delivery<'_>) -> Option<Round> {
        None
    }
}

/// Never acts and leaves every delivery at its default.
#[derive(Debug, Default)]
pub struct Passive;

impl Adversary for Passive {
    fn name(&self) -> &str {
        "null"
    }
}
