use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pvm_adversary::AttackParams;
use pvm_cli::CliError;
use pvm_core::Bound;

/// Propose-vote-merge protocol simulator. Log verbosity is read from
/// `PVM_LOG` (e.g. `PVM_LOG=info`).
#[derive(Parser)]
#[command(name = "pvm", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write its trace and reports.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run seeded random compliant executions and print a CSV summary.
    Trials {
        template: PathBuf,
        #[arg(long = "n")]
        trials: u64,
        #[arg(long)]
        seed_base: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a complete scenario for a scripted attack.
    GenAttack {
        strategy: String,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        eta: Option<Bound>,
        #[arg(long)]
        tau: Option<Bound>,
        #[arg(long)]
        pi: Option<Bound>,
        #[arg(long)]
        delta: Option<u64>,
        #[arg(long)]
        kappa: Option<u64>,
        #[arg(long)]
        wait: Option<u64>,
        #[arg(long)]
        cycles: Option<usize>,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check compliance and properties of a stored trace.
    Check {
        trace: PathBuf,
        #[arg(long)]
        tau: Bound,
        #[arg(long)]
        pi: Option<Bound>,
    },
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.clone(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<bool, CliError> {
    match cmd {
        Cmd::Run { scenario, out, seed } => {
            let report = pvm_cli::cmd_run(&scenario, &out, seed)?;
            println!("compliant: {}", report.analysis.compliance.compliant);
            for (k, o) in report.analysis.properties.outcomes() {
                println!("{k}: {}", o.label());
            }
            for m in &report.mismatches {
                println!("MISMATCH {}: expected {}, got {}", m.key, m.expected, m.actual);
            }
            Ok(report.ok)
        }
        Cmd::Trials { template, trials, seed_base, out } => {
            let (csv, ok) = pvm_cli::cmd_trials(&template, trials, seed_base)?;
            emit(&csv, out.as_ref())?;
            Ok(ok)
        }
        Cmd::GenAttack { strategy, m, n, eta, tau, pi, delta, kappa, wait, cycles, horizon, seed, out } => {
            let params = AttackParams { m, n, eta, tau, pi, delta, kappa, wait, cycles, horizon, seed };
            emit(&pvm_cli::cmd_gen_attack(&strategy, &params)?, out.as_ref())?;
            Ok(true)
        }
        Cmd::Check { trace, tau, pi } => {
            let (json, ok) = pvm_cli::cmd_check(&trace, tau, pi)?;
            print!("{json}");
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PVM_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
