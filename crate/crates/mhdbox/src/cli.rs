//! Command-line surface.
//!
//! Subcommands: `simulate`, `check-criteria`, `verify-inequalities` and
//! `replay`. Exit codes: 0 on success, 1 for usage/config errors, 2 for
//! runtime numerical failures (diagnostics are flushed first).

use crate::driver;
use crate::error::{MhdError, Result};
use crate::grid::Grid;
use crate::io::config::{parse_kind, RunConfig};
use crate::io::report::{self, InequalityReport};
use crate::lab::{self, AnisoParams, Inequality, TestFamily};
use crate::monitors::{check_admissible, CriterionKind, CriterionSpec};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "mhdbox",
    version,
    about = "Pseudo-spectral 3D incompressible MHD on a periodic box with regularity-criterion monitors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a trajectory with monitors; writes monitors.csv, summary.json
    /// and checkpoints under the configured output directory.
    Simulate {
        /// Path to a flat key = value config file.
        #[arg(long)]
        config: PathBuf,
    },
    /// Classify a criterion exponent pair and print its scaling slack.
    CheckCriteria(CriteriaArgs),
    /// Sweep random localized test functions against the anisotropic (A1),
    /// lambda = 2 (A2) or isotropic (A6) interpolation inequality and write
    /// a JSON report.
    VerifyInequalities(VerifyArgs),
    /// Recompute a monitor series from stored checkpoints (pressure
    /// re-solved) and write it as CSV.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct CriteriaArgs {
    /// velocity | pressure | gradient
    #[arg(long)]
    kind: String,
    #[arg(long)]
    alpha: f64,
    /// A number or `inf`.
    #[arg(long)]
    beta: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// A1 | A2 | A6 | all
    #[arg(long)]
    which: String,
    /// Cubic grid size.
    #[arg(long)]
    grid: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    mu: f64,
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    #[arg(long, default_value_t = 4.0)]
    q: f64,
    /// periodized_gaussian | anisotropic_gaussian | random_bump_sum
    #[arg(long, default_value = "anisotropic_gaussian")]
    family: String,
    #[arg(long, default_value = "inequalities.json")]
    out: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    /// Directory holding .mhdc checkpoints.
    #[arg(long)]
    checkpoints: PathBuf,
    /// velocity | pressure | gradient (selects which CSV column pair the
    /// (alpha, beta) below feeds; the other kind uses its default).
    #[arg(long)]
    kind: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    dealias: bool,
    #[arg(long, default_value = "replay.csv")]
    out: PathBuf,
}

/// Entry point used by main() and by tests; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message (also for --help/--version)
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help { 0 } else { 1 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { config } => {
            let cfg = RunConfig::load(&config)?;
            let out = driver::run_simulation(&cfg)?;
            println!(
                "simulate: {} samples over {} steps -> {} and {}",
                out.series.len(),
                out.steps,
                out.csv_path.display(),
                out.summary_path.display()
            );
            Ok(())
        }
        Command::CheckCriteria(args) => {
            let spec = criterion_from_args(&args.kind, args.alpha, args.beta)?;
            let verdict = check_admissible(&spec);
            println!(
                "{}(alpha={}, beta={}): {}, slack {}",
                spec.kind.name(),
                spec.alpha,
                spec.beta,
                if verdict.admissible { "admissible" } else { "not admissible" },
                verdict.slack
            );
            Ok(())
        }
        Command::VerifyInequalities(args) => verify_inequalities(args),
        Command::Replay(args) => {
            let spec = criterion_from_args(&args.kind, args.alpha, args.beta)?;
            let (vspec, pspec) = match spec.kind {
                CriterionKind::PressureZ => (default_velocity_spec(), spec),
                _ => (spec, default_pressure_spec()),
            };
            let series = driver::replay_checkpoints(&args.checkpoints, vspec, pspec, args.dealias)?;
            report::atomic_write(&args.out, &report::monitor_csv(&series))?;
            println!("replay: {} samples -> {}", series.len(), args.out.display());
            Ok(())
        }
    }
}

fn default_velocity_spec() -> CriterionSpec {
    CriterionSpec {
        kind: CriterionKind::VelocityZ,
        alpha: 3.0,
        beta: f64::INFINITY,
    }
}

fn default_pressure_spec() -> CriterionSpec {
    CriterionSpec {
        kind: CriterionKind::PressureZ,
        alpha: 12.0 / 7.0,
        beta: f64::INFINITY,
    }
}

fn criterion_from_args(kind: &str, alpha: f64, beta: f64) -> Result<CriterionSpec> {
    let kind = parse_kind(kind)?;
    if !(alpha >= 1.0) || !(beta >= 1.0) {
        return Err(MhdError::Config(format!(
            "exponents must be >= 1, got alpha = {alpha}, beta = {beta}"
        )));
    }
    Ok(CriterionSpec { kind, alpha, beta })
}

fn parse_family(name: &str) -> Result<TestFamily> {
    match name {
        "periodized_gaussian" => Ok(TestFamily::PeriodizedGaussian),
        "anisotropic_gaussian" => Ok(TestFamily::AnisotropicGaussian),
        "random_bump_sum" => Ok(TestFamily::RandomBumpSum),
        other => Err(MhdError::Config(format!("unknown family `{other}`"))),
    }
}

fn verify_inequalities(args: VerifyArgs) -> Result<()> {
    let grid = Grid::cube(args.grid)?;
    let family = parse_family(&args.family)?;
    let mut targets: Vec<Inequality> = Vec::new();
    match args.which.as_str() {
        "A1" | "a1" => targets.push(Inequality::Anisotropic(AnisoParams::new(args.mu, args.lambda)?)),
        "A2" | "a2" => targets.push(Inequality::AnisotropicLambda2 { mu: args.mu }),
        "A6" | "a6" => targets.push(Inequality::Isotropic { q: args.q }),
        "all" => {
            targets.push(Inequality::Anisotropic(AnisoParams::new(args.mu, args.lambda)?));
            targets.push(Inequality::AnisotropicLambda2 { mu: args.mu });
            targets.push(Inequality::Isotropic { q: args.q });
        }
        other => {
            return Err(MhdError::Config(format!(
                "--which must be A1, A2, A6 or all, got `{other}`"
            )))
        }
    }
    let mut reports = Vec::new();
    for ineq in &targets {
        let sweep = lab::empirical_constant(family, grid, ineq, args.trials, args.seed)?;
        let params = match ineq {
            Inequality::Anisotropic(p) => vec![("mu", p.mu), ("lambda", p.lambda), ("gamma", p.gamma)],
            Inequality::AnisotropicLambda2 { mu } => {
                let p = AnisoParams::new(*mu, 2.0)?;
                vec![("mu", p.mu), ("lambda", p.lambda), ("gamma", p.gamma)]
            }
            Inequality::Isotropic { q } => vec![("q", *q)],
        };
        println!(
            "{}: sup ratio {} over {} trials (argmax trial {})",
            ineq.name(),
            sweep.sup_ratio,
            sweep.trials,
            sweep.argmax_trial
        );
        reports.push(InequalityReport {
            inequality: ineq.name().to_string(),
            grid_n: args.grid,
            box_length: grid.length(),
            trials: sweep.trials,
            seed: args.seed,
            params,
            family: family.name().to_string(),
            sup_ratio: sweep.sup_ratio,
            argmax_trial: sweep.argmax_trial,
            argmax_center: sweep.argmax.center,
            argmax_sigmas: sweep.argmax.bumps.iter().map(|b| b.sigma).collect(),
            argmax_amplitudes: sweep.argmax.bumps.iter().map(|b| b.amplitude).collect(),
        });
    }
    report::atomic_write(&args.out, &report::inequality_reports_json(&reports))?;
    println!("report -> {}", args.out.display());
    Ok(())
}
