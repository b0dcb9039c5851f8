//! Honest validator behaviour for the propose-vote-merge protocol and its
//! fast-confirmation extension.
//!
//! A validator is driven one round at a time by [`Validator::on_round`]. It
//! buffers everything it receives and only folds the buffer into its view
//! at fixed points of the slot, which is what makes the proposer's view a
//! superset of every voter's view in synchronous slots.

mod buffer;

use std::collections::HashMap;
use std::sync::Arc;

use pvm_core::{Block, BlockId, BlockStore, Message, Phase, Proposal, Round, Slot, Timing, ValidatorId, View, Vote};
use pvm_forkchoice::{ForkChoice, TieBreak};
use serde::{Deserialize, Serialize};

pub use buffer::Buffer;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Standard,
    FastConfirm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Status {
    Asleep,
    /// Awake and buffering; becomes active at round `until`.
    Joining { until: Round },
    Active,
}

/// Parameters shared by all honest validators of a run.
#[derive(Clone, Debug)]
pub struct Config {
    pub n: usize,
    pub timing: Timing,
    pub kappa: u64,
    pub variant: Variant,
    pub fc: Arc<dyn ForkChoice>,
    pub tiebreak: TieBreak,
}

impl Config {
    /// `⌈2n/3⌉` distinct voters.
    pub fn fast_quorum(&self) -> usize {
        (2 * self.n).div_ceil(3)
    }
}

/// Something a validator did this round, besides sending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Output {
    Send(Message),
    FastConfirmed { slot: Slot, block: BlockId },
}

#[derive(Clone, Debug)]
pub struct Validator {
    pub id: ValidatorId,
    cfg: Arc<Config>,
    status: Status,
    view: View,
    buffer: Buffer,
    canonical: BlockId,
    confirmed: BlockId,
    /// False until the first fork-choice evaluation after becoming active.
    synced: bool,
    sent_vote: bool,
}

impl Validator {
    pub fn new(id: ValidatorId, cfg: Arc<Config>, awake: bool) -> Self {
        let view = View::genesis();
        let g = Block::genesis().id;
        Validator {
            id,
            cfg,
            status: if awake { Status::Active } else { Status::Asleep },
            view,
            buffer: Buffer::default(),
            canonical: g,
            confirmed: g,
            synced: awake,
            sent_vote: false,
        }
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn is_active(&self) -> bool {
        self.status == Status::Active
    }

    pub fn view(&self) -> &View {
        &self.view
    }

    pub fn buffer(&self) -> &Buffer {
        &self.buffer
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    /// Canonical head, once computed since becoming active.
    pub fn canonical(&self) -> Option<BlockId> {
        (self.is_active() && self.synced).then_some(self.canonical)
    }

    pub fn confirmed(&self) -> Option<BlockId> {
        (self.is_active() && self.synced).then_some(self.confirmed)
    }

    pub fn sleep(&mut self) {
        self.status = Status::Asleep;
        self.synced = false;
        self.sent_vote = false;
    }

    /// Starts the joining protocol. The validator becomes active at the
    /// first merge round not before `round`.
    pub fn wake(&mut self, round: Round) {
        if self.status == Status::Asleep {
            self.status = Status::Joining {
                until: self.cfg.timing.join_round(round),
            };
        }
    }

    fn head(&self, t: Slot) -> BlockId {
        self.cfg.fc.head(&self.view, t, &self.cfg.tiebreak)
    }

    fn k_deep(&self, t: Slot) -> BlockId {
        self.view
            .ancestor_at_or_below(self.canonical, t.saturating_sub(self.cfg.kappa))
            .expect("canonical is in the view")
    }

    fn cast_vote(&mut self, t: Slot, out: &mut Vec<Output>) {
        self.canonical = self.head(t);
        self.synced = true;
        let vote = Vote { slot: t, voter: self.id, block: self.canonical };
        self.buffer.add_vote(vote);
        self.sent_vote = true;
        out.push(Output::Send(Message::Vote(vote)));
    }

    fn receive(&mut self, round: Round, msg: &Message, out: &mut Vec<Output>) {
        match msg {
            Message::Block(b) => self.buffer.add_block(b.clone()),
            Message::Vote(v) => self.buffer.add_vote(*v),
            Message::Proposal(p) => {
                self.buffer.add_block(p.block.clone());
                if self.is_active() && self.cfg.timing.in_proposal_window(p.slot, round) {
                    self.on_timely_proposal(p, out);
                }
            }
        }
    }

    fn on_timely_proposal(&mut self, p: &Proposal, out: &mut Vec<Output>) {
        match self.cfg.variant {
            Variant::Standard => self.view.merge(&p.view),
            Variant::FastConfirm => {
                if !self.sent_vote {
                    self.view.merge(&p.view);
                    self.cast_vote(p.slot, out);
                }
            }
        }
    }

    /// Processes this round's deliveries, then the slot-phase action.
    pub fn on_round(&mut self, round: Round, inbox: &[Arc<Message>], is_proposer: bool) -> Vec<Output> {
        let mut out = Vec::new();
        if self.status == Status::Asleep {
            return out;
        }
        for m in inbox {
            self.receive(round, m, &mut out);
        }
        if let Status::Joining { until } = self.status {
            if round >= until {
                self.buffer.drain_into(&mut self.view);
                self.status = Status::Active;
                self.synced = false;
                self.sent_vote = false;
            }
            return out;
        }
        let timing = self.cfg.timing;
        let t = timing.slot_of(round);
        match timing.phase(round) {
            Some(Phase::Propose) if is_proposer && t > 0 => self.propose(t, &mut out),
            Some(Phase::Vote) => self.vote_phase(t, &mut out),
            Some(Phase::Merge) => {
                self.buffer.drain_into(&mut self.view);
                self.sent_vote = false;
            }
            _ => {}
        }
        out
    }

    fn propose(&mut self, t: Slot, out: &mut Vec<Output>) {
        self.buffer.drain_into(&mut self.view);
        let parent = self.head(t);
        let parent = self.view.block(parent).expect("head in view").clone();
        let block = Block::new(&parent, t, self.id, Vec::new());
        self.view.insert_block(block.clone()).expect("parent in view");
        self.canonical = block.id;
        self.synced = true;
        if self.cfg.variant == Variant::Standard {
            self.confirmed = self.k_deep(t);
        }
        let proposal = Proposal {
            proposer: self.id,
            slot: t,
            block,
            view: Arc::new(self.view.clone()),
        };
        out.push(Output::Send(Message::Proposal(proposal)));
        if self.cfg.variant == Variant::FastConfirm && !self.sent_vote {
            self.cast_vote(t, out);
        }
    }

    fn vote_phase(&mut self, t: Slot, out: &mut Vec<Output>) {
        match self.cfg.variant {
            Variant::Standard => {
                self.cast_vote(t, out);
                self.confirmed = self.k_deep(t);
            }
            Variant::FastConfirm => {
                if !self.sent_vote {
                    self.cast_vote(t, out);
                }
                self.buffer.drain_into(&mut self.view);
                self.fast_confirm(t, out);
            }
        }
    }

    /// Highest strict ancestor of the canonical head with a quorum of
    /// distinct slot-`t` voters on its strict descendants.
    pub fn fast_candidate(&self, t: Slot) -> Option<BlockId> {
        let mut voters: HashMap<BlockId, Vec<ValidatorId>> = HashMap::new();
        for v in self.view.votes().iter().filter(|v| v.slot == t) {
            let mut cur = self.view.block(v.block).and_then(|b| b.parent);
            while let Some(a) = cur {
                voters.entry(a).or_default().push(v.voter);
                cur = self.view.block(a).and_then(|b| b.parent);
            }
        }
        let quorum = self.cfg.fast_quorum();
        let mut cur = self.view.block(self.canonical).and_then(|b| b.parent);
        while let Some(a) = cur {
            if let Some(vs) = voters.get_mut(&a) {
                vs.sort();
                vs.dedup();
                if vs.len() >= quorum {
                    return Some(a);
                }
            }
            cur = self.view.block(a).and_then(|b| b.parent);
        }
        None
    }

    fn fast_confirm(&mut self, t: Slot, out: &mut Vec<Output>) {
        let fast = self.fast_candidate(t);
        let b_fast = fast.unwrap_or_else(|| Block::genesis().id);
        let deep = self.k_deep(t);
        let conf = self.confirmed;
        let keep = self.view.is_strict_prefix(b_fast, conf) && self.view.is_strict_prefix(deep, conf);
        if !keep {
            let hf = self.view.height(b_fast).expect("in view");
            let hd = self.view.height(deep).expect("in view");
            self.confirmed = if hf >= hd { b_fast } else { deep };
        }
        if let Some(block) = fast {
            out.push(Output::FastConfirmed { slot: t, block });
        }
    }
}
