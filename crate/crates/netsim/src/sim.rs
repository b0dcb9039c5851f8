use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use pvm_core::{Block, BlockStore, BlockTree, Message, MessageKey, Round, Timing, ValidatorId};
use pvm_forkchoice::{instantiate, ForkChoice, TieBreak};
use pvm_validator::{Config, Output, Status, Validator};

use crate::adversary::{Action, Adversary, Delivery, DeliveryKind, World};
use crate::trace::{Event, SnapStatus, Trace, TraceMeta};
use crate::{Scenario, SimError};

/// Result of a run: the trace plus final state for inspection.
pub struct Execution {
    pub trace: Trace,
    pub validators: Vec<Validator>,
    pub corrupted: BTreeSet<ValidatorId>,
    pub blocks: BlockTree,
}

type Pair = (usize, ValidatorId);

struct Sim<'a> {
    sc: &'a Scenario,
    timing: Timing,
    fc: Arc<dyn ForkChoice>,
    tiebreak: TieBreak,
    validators: Vec<Validator>,
    corrupted: BTreeSet<ValidatorId>,
    blocks: BlockTree,
    msgs: Vec<Arc<Message>>,
    keys: HashMap<MessageKey, usize>,
    scheduled: HashMap<Pair, Round>,
    delivered: HashSet<Pair>,
    queue: BTreeMap<Round, Vec<Pair>>,
    held: Vec<Vec<usize>>,
    relayed: HashSet<usize>,
    /// Messages whose full body has been written to the trace.
    announced: HashSet<usize>,
    inbox: Vec<Vec<Arc<Message>>>,
    changed: Vec<bool>,
    events: Vec<Event>,
    round: Round,
}

/// Runs `scenario` against `adversary`.
pub fn run(scenario: &Scenario, adversary: &mut dyn Adversary) -> Result<Execution, SimError> {
    scenario.validate()?;
    let mut sim = Sim::new(scenario);
    for r in 0..scenario.total_rounds() {
        sim.step(r, adversary)?;
    }
    Ok(Execution {
        trace: Trace { events: sim.events },
        validators: sim.validators,
        corrupted: sim.corrupted,
        blocks: sim.blocks,
    })
}

impl<'a> Sim<'a> {
    fn new(sc: &'a Scenario) -> Self {
        let timing = sc.timing();
        let fc = instantiate(sc.fc_kind);
        let tiebreak = TieBreak { pin: sc.tiebreak_pin };
        let cfg = Arc::new(Config {
            n: sc.n,
            timing,
            kappa: sc.kappa,
            variant: sc.variant,
            fc: fc.clone(),
            tiebreak,
        });
        let validators = sc
            .validators()
            // Everyone starts awake; round 0's schedule edge records initial sleepers.
            .map(|v| Validator::new(v, cfg.clone(), true))
            .collect();
        Sim {
            sc,
            timing,
            fc,
            tiebreak,
            validators,
            corrupted: BTreeSet::new(),
            blocks: BlockTree::new(),
            msgs: Vec::new(),
            keys: HashMap::new(),
            scheduled: HashMap::new(),
            delivered: HashSet::new(),
            queue: BTreeMap::new(),
            held: vec![Vec::new(); sc.n],
            relayed: HashSet::new(),
            announced: HashSet::new(),
            inbox: vec![Vec::new(); sc.n],
            changed: vec![false; sc.n],
            events: Vec::new(),
            round: 0,
        }
    }

    fn slot(&self) -> u64 {
        self.timing.slot_of(self.round)
    }

    fn meta(&self) -> TraceMeta {
        TraceMeta {
            n: self.sc.n,
            delta: self.sc.delta,
            horizon: self.sc.horizon,
            eta: self.sc.eta,
            kappa: self.sc.kappa,
            fc_kind: self.sc.fc_kind.to_string(),
            variant: self.sc.variant,
            latency: self.sc.latency(),
            seed: self.sc.seed,
            tpa: self.sc.tpa,
            tiebreak_pin: self.sc.tiebreak_pin,
        }
    }

    fn honest_ids(&self) -> Vec<ValidatorId> {
        self.sc.validators().filter(|v| !self.corrupted.contains(v)).collect()
    }

    fn step(&mut self, r: Round, adv: &mut dyn Adversary) -> Result<(), SimError> {
        self.round = r;
        let slot = self.slot();
        self.events.push(Event::RoundStart {
            round: r,
            slot,
            actor: None,
            meta: (r == 0).then(|| self.meta()),
        });
        self.changed.iter_mut().for_each(|c| *c = false);

        for c in &self.sc.corruption_schedule {
            if c.round == r {
                self.corrupt(c.validator);
            }
        }
        for v in self.sc.validators() {
            let now = self.sc.scheduled_awake(v, r);
            let before = if r == 0 { true } else { self.sc.scheduled_awake(v, r - 1) };
            if now != before {
                if now {
                    self.wake(v, adv);
                } else {
                    self.sleep(v);
                }
            }
        }

        let actions = {
            let world = World {
                round: r,
                timing: self.timing,
                scenario: self.sc,
                validators: &self.validators,
                corrupted: &self.corrupted,
                blocks: &self.blocks,
                fc: self.fc.as_ref(),
                tiebreak: &self.tiebreak,
            };
            adv.on_round(&world)
        };
        for a in actions {
            self.apply(a, adv)?;
        }

        if let Some(due) = self.queue.remove(&r) {
            for (m, w) in due {
                if self.delivered.contains(&(m, w)) || self.scheduled.get(&(m, w)) != Some(&r) {
                    continue;
                }
                if self.corrupted.contains(&w) {
                    self.delivered.insert((m, w));
                } else if self.validators[w.index()].status() == Status::Asleep {
                    self.held[w.index()].push(m);
                } else {
                    self.deliver(m, w, adv);
                }
            }
        }

        let proposer = self.sc.proposer(slot);
        for v in self.honest_ids() {
            let i = v.index();
            if self.validators[i].status() == Status::Asleep {
                continue;
            }
            let inbox = std::mem::take(&mut self.inbox[i]);
            let before = self.validators[i].status();
            let outs = self.validators[i].on_round(r, &inbox, proposer == v);
            if self.validators[i].status() != before {
                self.changed[i] = true;
            }
            for o in outs {
                match o {
                    Output::Send(msg) => self.honest_send(v, msg, adv),
                    Output::FastConfirmed { slot, block } => {
                        self.events.push(Event::FastConfirm { round: r, slot, actor: v, block })
                    }
                }
            }
        }

        let phase = self.timing.phase(r).is_some();
        for v in self.honest_ids() {
            if phase || self.changed[v.index()] {
                let val = &self.validators[v.index()];
                self.events.push(Event::StateSnapshot {
                    round: r,
                    slot,
                    actor: v,
                    validator: v,
                    status: SnapStatus::from(val.status()),
                    canonical: val.canonical(),
                    confirmed: val.confirmed(),
                });
            }
        }
        Ok(())
    }

    fn corrupt(&mut self, v: ValidatorId) {
        if self.corrupted.insert(v) {
            self.events.push(Event::Corrupt { round: self.round, slot: self.slot(), actor: v });
            self.held[v.index()].clear();
            self.inbox[v.index()].clear();
        }
    }

    fn sleep(&mut self, v: ValidatorId) {
        if self.corrupted.contains(&v) {
            return;
        }
        let val = &mut self.validators[v.index()];
        if val.status() == Status::Asleep {
            return;
        }
        val.sleep();
        self.changed[v.index()] = true;
        self.inbox[v.index()].clear();
        self.events.push(Event::Sleep { round: self.round, slot: self.slot(), actor: v });
    }

    fn wake(&mut self, v: ValidatorId, adv: &mut dyn Adversary) {
        if self.corrupted.contains(&v) || self.validators[v.index()].status() != Status::Asleep {
            return;
        }
        let r = self.round;
        self.validators[v.index()].wake(r);
        self.changed[v.index()] = true;
        let active_at = self.timing.join_round(r);
        self.events.push(Event::Wake { round: r, slot: self.slot(), actor: v, active_at });
        let asynchronous = self.is_async(r);
        for m in std::mem::take(&mut self.held[v.index()]) {
            if self.delivered.contains(&(m, v)) {
                continue;
            }
            if !asynchronous {
                self.deliver(m, v, adv);
                continue;
            }
            let latest = self.async_cap().max(r);
            let msg = self.msgs[m].clone();
            let d = Delivery {
                msg: &msg,
                to: v,
                ready: r,
                kind: DeliveryKind::Wake,
                asynchronous,
                earliest: r,
                latest,
                default: r,
            };
            let at = adv.delivery(&d).unwrap_or(r).clamp(r, latest);
            if at == r {
                self.deliver(m, v, adv);
            } else {
                self.scheduled.insert((m, v), at);
                self.queue.entry(at).or_default().push((m, v));
            }
        }
    }

    fn is_async(&self, r: Round) -> bool {
        self.sc.tpa.is_some_and(|t| t.is_async_round(&self.timing, r))
    }

    fn async_cap(&self) -> Round {
        self.sc.tpa.map(|t| t.delivery_cap(&self.timing)).unwrap_or(Round::MAX)
    }

    fn intern(&mut self, msg: Message, actor: ValidatorId, relay: bool) -> usize {
        let key = msg.key();
        let slot = self.slot();
        if let Some(&i) = self.keys.get(&key) {
            let message = self.announced.insert(i).then(|| msg.clone());
            self.events.push(Event::Send {
                round: self.round,
                slot,
                actor,
                msg: i as u64,
                message,
                relay,
            });
            return i;
        }
        let i = self.msgs.len();
        self.events.push(Event::Send {
            round: self.round,
            slot,
            actor,
            msg: i as u64,
            message: Some(msg.clone()),
            relay,
        });
        self.msgs.push(Arc::new(msg));
        self.keys.insert(key, i);
        self.announced.insert(i);
        i
    }

    fn honest_send(&mut self, from: ValidatorId, msg: Message, adv: &mut dyn Adversary) {
        let r = self.round;
        let slot = self.slot();
        match &msg {
            Message::Proposal(p) => {
                self.blocks.insert(p.block.clone());
                self.events.push(Event::Propose { round: r, slot, actor: from, block: p.block.clone() });
            }
            Message::Vote(v) => self.events.push(Event::Vote { round: r, slot, actor: from, vote: *v }),
            Message::Block(b) => {
                self.blocks.insert(b.clone());
            }
        }
        let m = self.intern(msg, from, false);
        self.relayed.insert(m);
        self.delivered.insert((m, from));
        for u in self.honest_ids() {
            if u != from {
                self.schedule(m, u, DeliveryKind::Direct, r, adv);
            }
        }
    }

    fn schedule(&mut self, m: usize, to: ValidatorId, kind: DeliveryKind, ready: Round, adv: &mut dyn Adversary) {
        if self.delivered.contains(&(m, to)) {
            return;
        }
        let delta = self.timing.delta;
        let asynchronous = self.is_async(ready);
        let earliest = ready + 1;
        let latest = if asynchronous { self.async_cap().max(earliest) } else { ready + delta };
        let default = match kind {
            DeliveryKind::Direct => ready + self.sc.latency(),
            _ => ready + delta,
        }
        .clamp(earliest, latest);
        let msg = self.msgs[m].clone();
        let d = Delivery { msg: &msg, to, ready, kind, asynchronous, earliest, latest, default };
        let at = adv.delivery(&d).unwrap_or(default).clamp(earliest, latest);
        if self.scheduled.get(&(m, to)).is_some_and(|&s| s <= at) {
            return;
        }
        self.scheduled.insert((m, to), at);
        self.queue.entry(at).or_default().push((m, to));
    }

    /// Hands message `m` to awake honest validator `w` this round and
    /// re-gossips what it learned.
    fn deliver(&mut self, m: usize, w: ValidatorId, adv: &mut dyn Adversary) {
        let r = self.round;
        self.delivered.insert((m, w));
        let msg = self.msgs[m].clone();
        let late = matches!(&*msg, Message::Proposal(p) if !self.timing.in_proposal_window(p.slot, r));
        self.events.push(Event::Deliver { round: r, slot: self.slot(), actor: w, msg: m as u64, late });
        match &*msg {
            Message::Proposal(p) if late => {
                let b = Message::Block(p.block.clone());
                self.inbox[w.index()].push(Arc::new(b.clone()));
                let bi = self.intern_quiet(b);
                self.delivered.insert((bi, w));
                self.relay(bi, w, adv);
            }
            Message::Proposal(p) => {
                self.inbox[w.index()].push(msg.clone());
                self.relay(m, w, adv);
                let mut items: Vec<Message> = Vec::new();
                let mut pblocks: Vec<&Block> = p.view.blocks().collect();
                pblocks.sort_by_key(|b| b.slot);
                for b in pblocks {
                    if !b.is_genesis() && !self.is_relayed(&MessageKey::Block(b.id)) {
                        items.push(Message::Block(b.clone()));
                    }
                }
                for v in p.view.votes() {
                    if !self.is_relayed(&MessageKey::Vote(*v)) {
                        items.push(Message::Vote(*v));
                    }
                }
                for it in items {
                    let i = self.intern_quiet(it);
                    self.delivered.insert((i, w));
                    self.relay(i, w, adv);
                }
            }
            _ => {
                self.inbox[w.index()].push(msg.clone());
                self.relay(m, w, adv);
            }
        }
    }

    fn is_relayed(&self, key: &MessageKey) -> bool {
        self.keys.get(key).is_some_and(|i| self.relayed.contains(i))
    }

    /// Interns without a trace record; the relay that follows records it.
    fn intern_quiet(&mut self, msg: Message) -> usize {
        let key = msg.key();
        if let Some(&i) = self.keys.get(&key) {
            return i;
        }
        let i = self.msgs.len();
        self.msgs.push(Arc::new(msg));
        self.keys.insert(key, i);
        i
    }

    fn relay(&mut self, m: usize, from: ValidatorId, adv: &mut dyn Adversary) {
        if !self.relayed.insert(m) {
            return;
        }
        let message = self.announced.insert(m).then(|| (*self.msgs[m]).clone());
        self.events.push(Event::Send {
            round: self.round,
            slot: self.slot(),
            actor: from,
            msg: m as u64,
            message,
            relay: true,
        });
        let r = self.round;
        for u in self.honest_ids() {
            if u != from {
                self.schedule(m, u, DeliveryKind::Relay, r, adv);
            }
        }
    }

    fn apply(&mut self, a: Action, adv: &mut dyn Adversary) -> Result<(), SimError> {
        match a {
            Action::Sleep(v) => self.sleep(v),
            Action::Wake(v) => self.wake(v, adv),
            Action::Corrupt(v) => self.corrupt(v),
            Action::Send { from, message, deliver } => {
                self.validate_injection(from, &message)?;
                match &message {
                    Message::Block(b) => {
                        self.blocks.insert(b.clone());
                    }
                    Message::Proposal(p) => {
                        self.blocks.extend(p.view.blocks().cloned());
                        self.blocks.insert(p.block.clone());
                    }
                    Message::Vote(_) => {}
                }
                let m = self.intern(message, from, false);
                for (u, at) in deliver {
                    if u.index() >= self.sc.n {
                        return Err(SimError::InvalidAction(format!("recipient {u} out of range")));
                    }
                    if at < self.round {
                        return Err(SimError::InvalidAction(format!("delivery round {at} is in the past")));
                    }
                    if self.corrupted.contains(&u) || self.delivered.contains(&(m, u)) {
                        continue;
                    }
                    if self.scheduled.get(&(m, u)).is_some_and(|&s| s <= at) {
                        continue;
                    }
                    self.scheduled.insert((m, u), at);
                    self.queue.entry(at).or_default().push((m, u));
                }
            }
        }
        Ok(())
    }

    fn known(&self, msg: &Message) -> bool {
        self.keys.contains_key(&msg.key())
    }

    fn validate_injection(&self, from: ValidatorId, msg: &Message) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidAction(m));
        if !self.corrupted.contains(&from) {
            return bad(format!("{from} is not corrupted"));
        }
        if self.known(msg) {
            return Ok(());
        }
        let author = msg.author();
        if !self.corrupted.contains(&author) {
            return bad(format!("cannot forge a new message from honest {author}"));
        }
        let now = self.slot();
        match msg {
            Message::Block(b) => self.validate_block(b, now),
            Message::Vote(v) => {
                if v.slot > now {
                    return bad(format!("vote for future slot {}", v.slot));
                }
                match self.blocks.block(v.block) {
                    Some(b) if b.slot <= v.slot => Ok(()),
                    Some(_) => bad("vote for a block from a later slot".into()),
                    None => bad(format!("vote for unknown block {}", v.block)),
                }
            }
            Message::Proposal(p) => {
                if p.slot > now {
                    return bad(format!("proposal for future slot {}", p.slot));
                }
                if self.sc.proposer(p.slot) != p.proposer {
                    return bad(format!("{} is not the proposer of slot {}", p.proposer, p.slot));
                }
                if p.view.block(p.block.id).is_none() {
                    return bad("proposal view does not contain its block".into());
                }
                p.view
                    .validate_closure()
                    .map_err(|e| SimError::InvalidAction(format!("proposal view: {e}")))?;
                for b in p.view.blocks() {
                    if !b.is_genesis() && !self.blocks.contains_block(b.id) {
                        if !self.corrupted.contains(&b.proposer) {
                            return bad(format!("proposal view invents honest block {}", b.id));
                        }
                        if b.slot > now {
                            return bad(format!("block {} from a future slot", b.id));
                        }
                    }
                }
                for v in p.view.votes() {
                    if !self.corrupted.contains(&v.voter) && !self.keys.contains_key(&MessageKey::Vote(*v)) {
                        return bad(format!("proposal view invents honest vote {v:?}"));
                    }
                    if v.slot > now {
                        return bad(format!("vote {v:?} from a future slot"));
                    }
                }
                Ok(())
            }
        }
    }

    fn validate_block(&self, b: &Block, now: u64) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidAction(m));
        if !b.id_is_valid() {
            return bad(format!("block {} id mismatch", b.id));
        }
        if b.slot > now {
            return bad(format!("block {} from future slot {}", b.id, b.slot));
        }
        let Some(parent) = b.parent.and_then(|p| self.blocks.block(p)) else {
            return bad(format!("block {} has unknown parent", b.id));
        };
        if parent.slot >= b.slot {
            return bad(format!("block {} does not extend an earlier slot", b.id));
        }
        Ok(())
    }
}
