use std::collections::BTreeSet;

use pvm_core::{Round, Slot, Timing, ValidatorId};
use pvm_netsim::{Event, Scenario, Trace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Asleep,
    Joining,
    Active,
    Corrupted,
}

#[derive(Clone, Copy, Debug)]
enum Change {
    Sleep,
    Wake { active_at: Round },
    Corrupt,
}

/// Per-round status of every validator, from which `H_t` (honest and active
/// at the vote round of slot `t`) and `A_t` (corrupted by that round) follow.
#[derive(Clone, Debug)]
pub struct Participation {
    pub n: usize,
    pub timing: Timing,
    pub horizon: Slot,
    status: Vec<Vec<Status>>,
}

impl Participation {
    /// Replays the sleep, wake and corruption records of a trace.
    pub fn from_trace(trace: &Trace) -> Option<Self> {
        let meta = trace.meta()?;
        let mut changes = Vec::new();
        for e in &trace.events {
            match *e {
                Event::Sleep { round, actor, .. } => changes.push((round, actor, Change::Sleep)),
                Event::Wake { round, actor, active_at, .. } => {
                    changes.push((round, actor, Change::Wake { active_at }))
                }
                Event::Corrupt { round, actor, .. } => changes.push((round, actor, Change::Corrupt)),
                _ => {}
            }
        }
        Some(Self::replay(meta.n, Timing::new(meta.delta), meta.horizon, changes))
    }

    /// Derives participation from a scenario's static schedules, using the
    /// same edge-triggered rule as the simulator.
    pub fn from_schedule(sc: &Scenario) -> Self {
        let timing = sc.timing();
        let mut changes = Vec::new();
        for r in 0..sc.total_rounds() {
            for c in &sc.corruption_schedule {
                if c.round == r {
                    changes.push((r, c.validator, Change::Corrupt));
                }
            }
            for v in sc.validators() {
                let now = sc.scheduled_awake(v, r);
                let before = r == 0 || sc.scheduled_awake(v, r - 1);
                if now != before {
                    let c = if now {
                        Change::Wake { active_at: timing.join_round(r) }
                    } else {
                        Change::Sleep
                    };
                    changes.push((r, v, c));
                }
            }
        }
        Self::replay(sc.n, timing, sc.horizon, changes)
    }

    fn replay(n: usize, timing: Timing, horizon: Slot, mut changes: Vec<(Round, ValidatorId, Change)>) -> Self {
        changes.sort_by_key(|c| c.0);
        let rounds = (horizon * timing.slot_len()) as usize;
        let mut cur = vec![Status::Active; n];
        let mut join_at: Vec<Option<Round>> = vec![None; n];
        let mut status = Vec::with_capacity(rounds);
        let mut next = 0;
        for r in 0..rounds as Round {
            for (v, j) in join_at.iter_mut().enumerate() {
                if *j == Some(r) && cur[v] == Status::Joining {
                    cur[v] = Status::Active;
                    *j = None;
                }
            }
            while next < changes.len() && changes[next].0 == r {
                let (_, v, c) = changes[next];
                let i = v.index();
                match c {
                    Change::Corrupt => cur[i] = Status::Corrupted,
                    _ if cur[i] == Status::Corrupted => {}
                    Change::Sleep => {
                        cur[i] = Status::Asleep;
                        join_at[i] = None;
                    }
                    Change::Wake { active_at } if cur[i] == Status::Asleep => {
                        if active_at == r {
                            cur[i] = Status::Active;
                        } else {
                            cur[i] = Status::Joining;
                            join_at[i] = Some(active_at);
                        }
                    }
                    Change::Wake { .. } => {}
                }
                next += 1;
            }
            status.push(cur.clone());
        }
        Participation { n, timing, horizon, status }
    }

    pub fn status(&self, v: ValidatorId, r: Round) -> Status {
        self.status[r as usize][v.index()]
    }

    pub fn rounds(&self) -> Round {
        self.status.len() as Round
    }

    fn collect(&self, r: Round, f: impl Fn(Status) -> bool) -> BTreeSet<ValidatorId> {
        match self.status.get(r as usize) {
            Some(row) => row
                .iter()
                .enumerate()
                .filter(|(_, s)| f(**s))
                .map(|(i, _)| ValidatorId(i as u32))
                .collect(),
            None => BTreeSet::new(),
        }
    }

    /// Honest validators active at round `r`.
    pub fn active_at(&self, r: Round) -> BTreeSet<ValidatorId> {
        self.collect(r, |s| s == Status::Active)
    }

    /// Validators not asleep at round `r`; corrupted ones count as awake.
    pub fn awake_at(&self, r: Round) -> BTreeSet<ValidatorId> {
        self.collect(r, |s| s != Status::Asleep)
    }

    /// `H_t`.
    pub fn h(&self, t: Slot) -> BTreeSet<ValidatorId> {
        self.active_at(self.timing.vote_round(t))
    }

    /// `A_t`.
    pub fn a(&self, t: Slot) -> BTreeSet<ValidatorId> {
        self.collect(self.timing.vote_round(t), |s| s == Status::Corrupted)
    }

    /// `H_{from,to}`: union of `H_s` for `s` in `[from, to]`; empty if `from > to`.
    pub fn h_range(&self, from: i64, to: i64) -> BTreeSet<ValidatorId> {
        let mut out = BTreeSet::new();
        let from = from.max(0);
        let mut s = from;
        while s <= to {
            out.extend(self.h(s as Slot));
            s += 1;
        }
        out
    }
}
