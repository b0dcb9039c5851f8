//! Driver behind the `pvm` binary: load and run scenarios, batch random
//! trials, generate attack scenarios and check stored traces.

mod report;

use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use pvm_adversary::{execute, generate_trial, registry, AdversaryError, AttackParams};
use pvm_core::Bound;
use pvm_netsim::{Scenario, SimError, Trace};
use rayon::prelude::*;

pub use report::{analyze, compare, compliance, Analysis, Mismatch, PropertyReport, RunReport, Stats};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

impl From<AdversaryError> for CliError {
    fn from(e: AdversaryError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

/// Parses a scenario file, filling in or replacing the seed with `seed`.
pub fn load_scenario(path: &Path, seed: Option<u64>) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenario(&text, seed)
}

pub fn parse_scenario(text: &str, seed: Option<u64>) -> Result<Scenario, CliError> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("scenario: {e}")))?;
    if let (Some(seed), Some(obj)) = (seed, value.as_object_mut()) {
        obj.insert("seed".into(), seed.into());
    }
    let sc: Scenario = serde_json::from_value(value).map_err(|e| CliError::Invalid(format!("scenario: {e}")))?;
    sc.validate()?;
    Ok(sc)
}

/// Runs a scenario and checks the result against its expectations.
pub fn evaluate(sc: &Scenario) -> Result<(Trace, RunReport), CliError> {
    let exec = execute(sc)?;
    let analysis = analyze(&exec.trace, sc.tau, sc.pi)?;
    let mismatches = sc.expected.as_ref().map(|e| compare(e, &analysis)).unwrap_or_default();
    let report = RunReport {
        strategy: sc.strategy.clone(),
        seed: sc.seed,
        ok: mismatches.is_empty(),
        analysis,
        mismatches,
    };
    Ok((exec.trace, report))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// `run`: writes `trace.ndjson`, `compliance.json`, `properties.json` and
/// `report.json` into `out`. Returns whether every expectation held.
pub fn cmd_run(scenario: &Path, out: &Path, seed: Option<u64>) -> Result<RunReport, CliError> {
    let sc = load_scenario(scenario, seed)?;
    log::info!("running {} (n = {}, horizon = {}, seed = {})", sc.strategy, sc.n, sc.horizon, sc.seed);
    let (trace, report) = evaluate(&sc)?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    write(&out.join("trace.ndjson"), trace.to_ndjson())?;
    write(&out.join("compliance.json"), pretty(&report.analysis.compliance))?;
    write(&out.join("properties.json"), pretty(&report.analysis.properties))?;
    write(&out.join("report.json"), pretty(&report))?;
    for m in &report.mismatches {
        log::warn!("{}: expected {}, got {}", m.key, m.expected, m.actual);
    }
    Ok(report)
}

/// Summary row of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub seed: u64,
    pub report: RunReport,
}

pub const TRIAL_COLUMNS: [&str; 7] = [
    "safety",
    "liveness",
    "reorg_resilience",
    "asynchrony_resilience",
    "view_merge",
    "pivot_density",
    "fast_confirm",
];

/// Runs `trials` random compliant executions with seeds
/// `seed_base..seed_base + trials`, in parallel. Rows come back in seed order.
pub fn run_trials(template: &Scenario, trials: u64, seed_base: u64) -> Result<Vec<TrialRow>, CliError> {
    if trials == 0 {
        return Err(CliError::Invalid("trials must be positive".into()));
    }
    if template.strategy != "random_compliant" {
        return Err(CliError::Invalid(format!(
            "trial templates must use strategy random_compliant, not {:?}",
            template.strategy
        )));
    }
    (seed_base..seed_base + trials)
        .into_par_iter()
        .map(|seed| {
            let sc = generate_trial(template, seed)?;
            let (_, report) = evaluate(&sc)?;
            Ok(TrialRow { seed, report })
        })
        .collect()
}

pub fn trials_csv(rows: &[TrialRow]) -> String {
    let mut s = String::from("seed,compliant");
    for c in TRIAL_COLUMNS {
        s.push(',');
        s.push_str(c);
    }
    s.push_str(",pivots,reorgs,ok\n");
    for r in rows {
        let a = &r.report.analysis;
        let outcomes = a.properties.outcomes();
        write!(s, "{},{}", r.seed, a.compliance.compliant).unwrap();
        for c in TRIAL_COLUMNS {
            write!(s, ",{}", outcomes.get(c).map_or("", |o| o.label())).unwrap();
        }
        writeln!(s, ",{},{},{}", a.stats.pivot_slots, a.stats.reorgs, r.report.ok).unwrap();
    }
    s
}

/// `trials`: returns the CSV and whether every trial met the template's
/// expectations.
pub fn cmd_trials(template: &Path, trials: u64, seed_base: u64) -> Result<(String, bool), CliError> {
    let sc = load_scenario(template, Some(seed_base))?;
    let rows = run_trials(&sc, trials, seed_base)?;
    let failed = rows.iter().filter(|r| !r.report.ok).count();
    log::info!("{} trials, {failed} with unexpected verdicts", rows.len());
    Ok((trials_csv(&rows), failed == 0))
}

/// `gen-attack`: a complete scenario for `strategy`, as pretty JSON.
pub fn cmd_gen_attack(strategy: &str, params: &AttackParams) -> Result<String, CliError> {
    let sc = registry().generate(strategy, params)?;
    Ok(pretty(&sc))
}

/// `check`: compliance and property verdicts of a stored trace. The flag
/// is false if the trace is not compliant or any property fails.
pub fn cmd_check(trace: &Path, tau: Bound, pi: Option<Bound>) -> Result<(String, bool), CliError> {
    let file = fs::File::open(trace).map_err(|e| CliError::io(trace, e))?;
    let t = Trace::read_ndjson(BufReader::new(file))?;
    let a = analyze(&t, tau, pi)?;
    let ok = a.compliance.compliant && a.properties.outcomes().values().all(|o| *o != pvm_properties::Outcome::Fail);
    Ok((pretty(&a), ok))
}
