use std::collections::BTreeSet;

use pvm_core::{Bound, Round, Slot, ValidatorId};
use pvm_netsim::Tpa;
use serde::Serialize;

use crate::Participation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `|H_{t-1}| > |A_t ∪ (H_{t-τ,t-2} \ H_{t-1})|`.
    Sleepiness,
    /// `|H_{t1} \ A_t| > |A_t ∪ (H_{t-τ,t-1} \ H_{t1})|` for `t ∈ (t1, t2+1]`.
    TpaMajority,
    /// Every member of `H_{t1}` is awake at the merge round of `t1`.
    TpaAwake,
    /// `t2 - t1 ≤ π`.
    TpaLength,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Row {
    pub slot: Slot,
    pub condition: Condition,
    pub lhs: u64,
    pub rhs: u64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplianceReport {
    pub tau: Bound,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<Bound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tpa: Option<Tpa>,
    pub rows: Vec<Row>,
    pub compliant: bool,
    pub first_violation: Option<Slot>,
}

impl ComplianceReport {
    fn new(tau: Bound, pi: Option<Bound>, tpa: Option<Tpa>, mut rows: Vec<Row>) -> Self {
        rows.sort_by_key(|r| r.slot);
        let first_violation = rows.iter().find(|r| !r.pass).map(|r| r.slot);
        ComplianceReport {
            tau,
            pi,
            tpa,
            compliant: first_violation.is_none(),
            first_violation,
            rows,
        }
    }

    pub fn first_failing_row(&self) -> Option<&Row> {
        self.rows.iter().find(|r| !r.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ComplianceError {
    #[error("(τ, π)-compliance needs τ > π, got τ = {tau}, π = {pi}")]
    TauNotAbovePi { tau: Bound, pi: Bound },
}

struct Sets<'a> {
    p: &'a Participation,
    h: Vec<BTreeSet<ValidatorId>>,
}

impl<'a> Sets<'a> {
    fn new(p: &'a Participation) -> Self {
        Sets { p, h: (0..p.horizon).map(|t| p.h(t)).collect() }
    }

    fn h(&self, t: i64) -> BTreeSet<ValidatorId> {
        if t < 0 {
            return BTreeSet::new();
        }
        self.h.get(t as usize).cloned().unwrap_or_default()
    }

    fn h_range(&self, from: i64, to: i64) -> BTreeSet<ValidatorId> {
        let mut out = BTreeSet::new();
        for s in from.max(0)..=to {
            if let Some(x) = self.h.get(s as usize) {
                out.extend(x.iter().copied());
            }
        }
        out
    }

    fn window_start(tau: Bound, t: i64) -> i64 {
        match tau {
            Bound::Finite(x) => t - x as i64,
            Bound::Infinite => 0,
        }
    }

    fn sleepiness_row(&self, tau: Bound, t: Slot) -> Row {
        let ti = t as i64;
        let prev = self.h(ti - 1);
        let stale: BTreeSet<_> = self
            .h_range(Self::window_start(tau, ti), ti - 2)
            .difference(&prev)
            .copied()
            .collect();
        let rhs: BTreeSet<_> = self.p.a(t).union(&stale).copied().collect();
        let (lhs, rhs) = (prev.len() as u64, rhs.len() as u64);
        Row { slot: t, condition: Condition::Sleepiness, lhs, rhs, pass: lhs > rhs }
    }
}

/// Slots at which the conditions are evaluated. Slot 0 has no preceding
/// votes, so the first checked slot is 1.
fn slots(p: &Participation) -> impl Iterator<Item = Slot> {
    1..p.horizon
}

/// τ-sleepiness at every slot.
pub fn check_tau_sleepiness(p: &Participation, tau: Bound) -> ComplianceReport {
    let sets = Sets::new(p);
    let rows = slots(p).map(|t| sets.sleepiness_row(tau, t)).collect();
    ComplianceReport::new(tau, None, None, rows)
}

/// (τ, π)-compliance with respect to a declared asynchrony period. Without
/// a period, or with one containing no slot, this is τ-sleepiness.
pub fn check_tau_pi(
    p: &Participation,
    tau: Bound,
    pi: Bound,
    tpa: Option<Tpa>,
) -> Result<ComplianceReport, ComplianceError> {
    if !(pi < tau || (pi.is_infinite() && tau.is_infinite())) {
        return Err(ComplianceError::TauNotAbovePi { tau, pi });
    }
    let tpa = match tpa {
        Some(t) if !t.is_empty() => t,
        _ => {
            let mut r = check_tau_sleepiness(p, tau);
            r.pi = Some(pi);
            return Ok(r);
        }
    };
    let sets = Sets::new(p);
    let mut rows = Vec::new();
    let len = tpa.len();
    rows.push(Row {
        slot: tpa.t1,
        condition: Condition::TpaLength,
        lhs: len,
        rhs: pi.finite().unwrap_or(u64::MAX),
        pass: Bound::Finite(len) <= pi,
    });
    let h_t1 = sets.h(tpa.t1 as i64);
    let awake = p.awake_at(p.timing.merge_round(tpa.t1));
    let awake_count = h_t1.intersection(&awake).count() as u64;
    rows.push(Row {
        slot: tpa.t1,
        condition: Condition::TpaAwake,
        lhs: awake_count,
        rhs: h_t1.len() as u64,
        pass: awake_count == h_t1.len() as u64,
    });
    for t in slots(p) {
        let in_async = t > tpa.t1 && t <= tpa.t2;
        if !in_async {
            rows.push(sets.sleepiness_row(tau, t));
        }
        if t > tpa.t1 && t <= tpa.t2 + 1 {
            let a = p.a(t);
            let lhs = h_t1.difference(&a).count() as u64;
            let ti = t as i64;
            let others: BTreeSet<_> = sets
                .h_range(Sets::window_start(tau, ti), ti - 1)
                .difference(&h_t1)
                .copied()
                .collect();
            let rhs = a.union(&others).count() as u64;
            rows.push(Row { slot: t, condition: Condition::TpaMajority, lhs, rhs, pass: lhs > rhs });
        }
    }
    Ok(ComplianceReport::new(tau, Some(pi), Some(tpa), rows))
}

/// Validators active at `round` that are aware of the last synchronous
/// votes: inside `(t1, t2]` only members of `H_{t1}` qualify.
pub fn aware_set(p: &Participation, tpa: Option<Tpa>, round: Round) -> BTreeSet<ValidatorId> {
    let active = p.active_at(round);
    let t = p.timing.slot_of(round);
    match tpa {
        Some(tpa) if t > tpa.t1 && t <= tpa.t2 => {
            let h = p.h(tpa.t1);
            active.intersection(&h).copied().collect()
        }
        _ => active,
    }
}
