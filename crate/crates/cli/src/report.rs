use std::collections::BTreeMap;

use pvm_compliance::{check_tau_pi, check_tau_sleepiness, ComplianceReport, Participation};
use pvm_core::{BlockStore, Bound};
use pvm_netsim::{Expected, Trace, Variant};
use pvm_properties::{
    check_asynchrony_resilience, check_fast_confirm, check_liveness, check_pivot_density, check_reorg_resilience,
    check_safety, check_view_merge, pivot_slots, FastConfirmReport, Outcome, TraceIndex, Verdict,
};
use serde::Serialize;

use crate::CliError;

/// Verdicts keyed by property name.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyReport {
    pub verdicts: BTreeMap<&'static str, Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fast_confirm: Option<FastConfirmReport>,
}

impl PropertyReport {
    /// Outcome per property, with the fast-confirm sub-checks folded into
    /// a single `fast_confirm` entry.
    pub fn outcomes(&self) -> BTreeMap<String, Outcome> {
        let mut out: BTreeMap<String, Outcome> =
            self.verdicts.iter().map(|(k, v)| (k.to_string(), v.outcome)).collect();
        if let Some(fc) = &self.fast_confirm {
            out.insert("fast_confirm".into(), fc.outcome());
        }
        out
    }

    pub fn outcome(&self, property: &str) -> Option<Outcome> {
        self.outcomes().get(property).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub pivot_slots: usize,
    /// Height of the last confirmed block of each validator, by id.
    pub confirmed_len: Vec<Option<u64>>,
    /// Times an active validator's canonical head moved off its previous chain.
    pub reorgs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Analysis {
    pub compliance: ComplianceReport,
    pub properties: PropertyReport,
    pub stats: Stats,
}

/// Compliance at `(τ, π)` and every applicable property, computed from the
/// trace alone. `κ`, `η`, the TPA and the variant come from its metadata.
pub fn analyze(trace: &Trace, tau: Bound, pi: Option<Bound>) -> Result<Analysis, CliError> {
    let mut ix = TraceIndex::new(trace).map_err(|e| CliError::Invalid(e.to_string()))?;
    let compliance = compliance(trace, tau, pi)?;
    let kappa = ix.meta.kappa;
    let mut verdicts = BTreeMap::new();
    let mut put = |v: Verdict| {
        verdicts.insert(v.property, v);
    };
    put(check_safety(&mut ix));
    put(check_liveness(&mut ix, 2 * kappa).unwrap_or_else(|e| excluded("liveness", e.to_string())));
    put(check_reorg_resilience(&mut ix));
    put(check_view_merge(&mut ix));
    put(check_pivot_density(&ix, kappa.saturating_sub(1).max(1)));
    if let Some(tpa) = ix.meta.tpa {
        put(check_asynchrony_resilience(&mut ix, tpa));
    }
    let fast_confirm = match ix.meta.variant {
        Variant::FastConfirm => Some(check_fast_confirm(&mut ix).map_err(|e| CliError::Invalid(e.to_string()))?),
        _ => None,
    };
    let stats = stats(&mut ix);
    Ok(Analysis { compliance, properties: PropertyReport { verdicts, fast_confirm }, stats })
}

pub fn compliance(trace: &Trace, tau: Bound, pi: Option<Bound>) -> Result<ComplianceReport, CliError> {
    let meta = trace.meta().ok_or_else(|| CliError::Invalid("trace has no run metadata".into()))?;
    let part = Participation::from_trace(trace).ok_or_else(|| CliError::Invalid("trace has no run metadata".into()))?;
    match pi {
        Some(pi) => check_tau_pi(&part, tau, pi, meta.tpa).map_err(|e| CliError::Invalid(e.to_string())),
        None => Ok(check_tau_sleepiness(&part, tau)),
    }
}

fn excluded(property: &'static str, note: String) -> Verdict {
    Verdict { property, outcome: Outcome::PreconditionExcluded, checked: 0, witness: None, note }
}

fn stats(ix: &mut TraceIndex) -> Stats {
    let mut confirmed_len = vec![None; ix.n()];
    for s in &ix.snapshots {
        if let Some(b) = s.confirmed {
            confirmed_len[s.validator.0 as usize] = ix.tree.height(b);
        }
    }
    let live: Vec<_> = ix.live_snapshots().copied().collect();
    let mut last = BTreeMap::new();
    let mut reorgs = 0;
    for s in live {
        let head = s.canonical.expect("live snapshot");
        if let Some(prev) = last.insert(s.validator, head) {
            if !ix.is_prefix(prev, head) {
                reorgs += 1;
            }
        }
    }
    Stats { pivot_slots: pivot_slots(ix).len(), confirmed_len, reorgs }
}

/// A declared expectation that the analysis did not meet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub key: String,
    pub expected: String,
    pub actual: String,
}

fn matches(expected: &str, actual: Outcome) -> bool {
    match expected {
        "pass" => actual.holds(),
        other => other == actual.label(),
    }
}

/// Checks `expected` against an analysis. `"pass"` accepts a vacuous pass.
pub fn compare(expected: &Expected, a: &Analysis) -> Vec<Mismatch> {
    let mut out = Vec::new();
    if let Some(c) = expected.compliant {
        if c != a.compliance.compliant {
            out.push(Mismatch { key: "compliant".into(), expected: c.to_string(), actual: a.compliance.compliant.to_string() });
        }
    }
    let outcomes = a.properties.outcomes();
    for (k, want) in &expected.properties {
        let actual = outcomes.get(k).map_or("absent", |o| o.label());
        if !outcomes.get(k).is_some_and(|o| matches(want, *o)) {
            out.push(Mismatch { key: k.clone(), expected: want.clone(), actual: actual.into() });
        }
    }
    out
}

/// Everything `run` writes to `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub strategy: String,
    pub seed: u64,
    #[serde(flatten)]
    pub analysis: Analysis,
    pub mismatches: Vec<Mismatch>,
    pub ok: bool,
}
