//! `qslkit` command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 undefined bound, 3 violation found.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use qslkit::BoundFamily;

use crate::commands::{BoundParams, OptimizeParams, OracleParams, Outcome, VerifyParams};
use crate::config::{BoundChoice, Format, FunctionalChoice, RunConfig};

#[derive(Parser)]
#[command(name = "qslkit", version, about = "Quantum speed limits: gate times and orthogonality bounds")]
struct Cli {
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a time bound for a gate or a Hamiltonian.
    Bound(BoundArgs),
    /// Evolve a state and find its first orthogonality time.
    Oracle(OracleArgs),
    /// Check a bound against random Hamiltonians and states.
    Verify(VerifyArgs),
    /// Search constrained Hamiltonians for the fastest orthogonalization.
    Optimize(OptimizeArgs),
    /// Print the swap-family table.
    Demo(DemoArgs),
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, value_enum)]
    kind: Option<BoundChoice>,
    /// `swap`, `identity`, or a path to a gate JSON file.
    #[arg(long)]
    gate: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    #[arg(long, value_enum)]
    functional: Option<FunctionalChoice>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Reference state JSON (`{"re": [...], "im": [...]}`).
    #[arg(long)]
    state: Option<PathBuf>,
    /// Hamiltonian JSON (`{"dim": n, "re": [[...], ...], "im": [[...], ...]}`).
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    #[arg(long)]
    state: Option<PathBuf>,
    /// Defaults to ten times the largest applicable bound.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// `ml`, `te`, `opnorm` or `gp:<p>`.
    #[arg(long)]
    bound_kind: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    horizon_multiplier: Option<f64>,
    /// Also write the per-sample CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_enum)]
    functional: Option<FunctionalChoice>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Defaults to the uniform superposition.
    #[arg(long)]
    state: Option<PathBuf>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Print the per-evaluation trace CSV to stderr.
    #[arg(short, long)]
    verbose: bool,
    /// Write the per-evaluation trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long)]
    kappa: Option<f64>,
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Bound(_) => "bound",
        Command::Oracle(_) => "oracle",
        Command::Verify(_) => "verify",
        Command::Optimize(_) => "optimize",
        Command::Demo(_) => "demo",
    }
}

fn run(cli: Cli) -> Result<u8> {
    let file = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    file.check_command(command_name(&cli.command))?;
    let env = std::env::var("QSLKIT_TOL").ok();
    qslkit::config::install(config::resolve_tolerances(file.tolerances, env.as_deref())?);

    let (outcome, default_format) = dispatch(cli.command, &file)?;
    let format = cli.format.or(file.format).unwrap_or(default_format);
    let out = cli.out.or(file.out);
    emit(&outcome, format, out)?;
    Ok(outcome.code)
}

fn dispatch(command: Command, f: &RunConfig) -> Result<(Outcome, Format)> {
    Ok(match command {
        Command::Bound(a) => {
            let params = BoundParams {
                kind: a.kind.or(f.kind).unwrap_or(BoundChoice::Theorem1),
                gate: a.gate.or_else(|| f.gate.clone()).unwrap_or_else(|| "swap".into()),
                dim: a.dim.or(f.dim).unwrap_or(2),
                theta: a.theta.or(f.theta).unwrap_or(0.0),
                functional: a.functional.or(f.functional).unwrap_or(FunctionalChoice::Gp),
                p: a.p.or(f.p).unwrap_or(1.0),
                kappa: a.kappa.or(f.kappa).unwrap_or(1.0),
                state: a.state.or_else(|| f.state.clone()),
                hamiltonian: a.hamiltonian.or_else(|| f.hamiltonian.clone()),
            };
            (commands::bound(&params)?, Format::Json)
        }
        Command::Oracle(a) => {
            let params = OracleParams {
                hamiltonian: a.hamiltonian.or_else(|| f.hamiltonian.clone()).ok_or_else(|| anyhow!("--hamiltonian is required"))?,
                state: a.state.or_else(|| f.state.clone()).ok_or_else(|| anyhow!("--state is required"))?,
                horizon: a.horizon.or(f.horizon),
                grid_step: a.grid_step.or(f.grid_step),
                tol: a.tol.or(f.tol),
            };
            (commands::oracle(&params)?, Format::Json)
        }
        Command::Verify(a) => {
            let kind = a.bound_kind.or_else(|| f.bound_kind.clone()).ok_or_else(|| anyhow!("--bound-kind is required"))?;
            let params = VerifyParams {
                bound: kind.parse::<BoundFamily>()?,
                dim: a.dim.or(f.dim).unwrap_or(2),
                samples: a.samples.or(f.samples).unwrap_or(1000),
                seed: a.seed.or(f.seed).ok_or_else(|| anyhow!("--seed is required"))?,
                kappa: a.kappa.or(f.kappa).unwrap_or(1.0),
                horizon_multiplier: a.horizon_multiplier.or(f.horizon_multiplier).unwrap_or(10.0),
                csv: a.csv.or_else(|| f.csv.clone()),
            };
            (commands::verify(&params)?, Format::Json)
        }
        Command::Optimize(a) => {
            let params = OptimizeParams {
                dim: a.dim.or(f.dim).unwrap_or(2),
                functional: a.functional.or(f.functional).unwrap_or(FunctionalChoice::Gp),
                p: a.p.or(f.p).unwrap_or(1.0),
                kappa: a.kappa.or(f.kappa).unwrap_or(1.0),
                state: a.state.or_else(|| f.state.clone()),
                restarts: a.restarts.or(f.restarts).unwrap_or(8),
                budget: a.budget.or(f.budget).unwrap_or(400),
                seed: a.seed.or(f.seed).ok_or_else(|| anyhow!("--seed is required"))?,
                horizon: a.horizon.or(f.horizon),
                verbose: a.verbose,
                trace: a.trace.or_else(|| f.trace.clone()),
            };
            (commands::optimize(&params)?, Format::Json)
        }
        Command::Demo(a) => (commands::demo(a.kappa.or(f.kappa).unwrap_or(1.0))?, Format::Table),
    })
}

fn emit(outcome: &Outcome, format: Format, out: Option<PathBuf>) -> Result<()> {
    for (path, text) in &outcome.side_files {
        std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let mut text = outcome.render(format).to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(path) => std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
