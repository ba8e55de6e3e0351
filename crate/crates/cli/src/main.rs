use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use cocycle_lab::config::{ExperimentConfig, Overrides};
use cocycle_lab::runner::{emit_report, exit_code, run_experiment};

#[derive(Parser)]
#[command(
    name = "cocycle-lab",
    version,
    about = "Seeded experiments on killed random matrix products"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for CSV and JSON files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Top Lyapunov exponent and a proximality diagnostic.
    Lyapunov(Common),
    /// Rescale the ensemble to a zero Lyapunov exponent.
    Center(Common),
    /// V_n(x, t), or a profile over walk.n_list x walk.t_list.
    Harmonic(Common),
    Variance(Common),
    Survival(Common),
    /// rho_{n,x}(h) for the configured test function.
    Rho(Common),
    /// Marginal density W_n on a u grid.
    Density(Common),
    Harmonicity(Common),
    Reversal(Common),
    Translation(Common),
    Tail(Common),
    /// Local limit ratio trend (diagnostic).
    Cllt(Common),
    Perturbed(Common),
    /// Martingale residuals on the extended chain.
    Chain(Common),
    /// Quasi-monotonicity scan.
    Scan(Common),
    /// Exact enumeration against Monte Carlo (discrete ensembles).
    Oracle(Common),
    /// Every estimator in turn.
    Suite(Common),
    /// Summarize the JSON files in a run directory.
    Report {
        dir: PathBuf,
    },
}

impl Command {
    fn split(self) -> (Option<(&'static str, Common)>, Option<PathBuf>) {
        let (name, common) = match self {
            Command::Report { dir } => return (None, Some(dir)),
            Command::Lyapunov(c) => ("lyapunov", c),
            Command::Center(c) => ("center", c),
            Command::Harmonic(c) => ("harmonic", c),
            Command::Variance(c) => ("variance", c),
            Command::Survival(c) => ("survival", c),
            Command::Rho(c) => ("rho", c),
            Command::Density(c) => ("density", c),
            Command::Harmonicity(c) => ("harmonicity", c),
            Command::Reversal(c) => ("reversal", c),
            Command::Translation(c) => ("translation", c),
            Command::Tail(c) => ("tail", c),
            Command::Cllt(c) => ("cllt", c),
            Command::Perturbed(c) => ("perturbed", c),
            Command::Chain(c) => ("chain", c),
            Command::Scan(c) => ("scan", c),
            Command::Oracle(c) => ("oracle", c),
            Command::Suite(c) => ("suite", c),
        };
        (Some((name, common)), None)
    }
}

fn run_estimator(name: &str, c: Common) -> anyhow::Result<i32> {
    let mut cfg = ExperimentConfig::load(&c.config).with_context(|| format!("loading {}", c.config.display()))?;
    cfg.apply(&Overrides {
        seed: c.seed,
        paths: c.paths,
        steps: c.steps,
        dim: c.dim,
        workers: c.workers,
        out: c.out,
    });
    cfg.estimator = Some(name.to_string());
    let outcomes = run_experiment(&cfg)?;
    for o in &outcomes {
        let s = &o.summary;
        let value = match (s.value, s.stderr) {
            (Some(v), Some(e)) => format!("{v:.6} +- {e:.2e}"),
            (Some(v), None) => format!("{v:.6}"),
            _ => "-".into(),
        };
        println!("{:<12} {:<10} {value}", s.estimator, s.status.as_str());
        for w in &s.warnings {
            println!("  warning: {w}");
        }
        if let Some(e) = &s.error {
            println!("  error: {e}");
        }
        log::info!("wrote {}", o.json_path.display());
    }
    Ok(exit_code(&outcomes))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command.split() {
        (Some((name, common)), _) => run_estimator(name, common),
        (None, Some(dir)) => emit_report(&dir)
            .map(|r| {
                print!("{}", r.render());
                0
            })
            .map_err(Into::into),
        (None, None) => unreachable!(),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
