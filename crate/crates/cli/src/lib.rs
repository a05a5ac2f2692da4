//! Command-line front end: single points, parameter sweeps, and the built-in
//! validation suite, with machine-readable CSV output.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod config;
pub mod output;
pub mod run;

use config::{FileConfig, Overrides, RuleKind, RunConfig, SweepParam};

/// Exit codes: 0 success, 1 validation/invariant failure, 2 configuration
/// error (clap uses 2 for bad flags as well).
#[derive(Clone, Debug)]
pub enum CliError {
    Config(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failure(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Failure(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "wfh",
    about = "BPSK discrimination analytics for a weak-field homodyne receiver",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single parameter point and emit one CSV row.
    Point(RunArgs),
    /// Sweep one parameter over a grid and emit one CSV row per point.
    Sweep(RunArgs),
    /// Run the built-in invariant suite and report pass/fail per check.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Signal mean photon number |alpha|^2.
    #[arg(long)]
    alpha_sq: Option<f64>,
    /// Prior probability of symbol 0.
    #[arg(long)]
    q0: Option<f64>,
    /// Local-oscillator mean photon number |z|^2.
    #[arg(long)]
    z_sq: Option<f64>,
    /// Beam-splitter transmissivity, in (0, 1).
    #[arg(long)]
    tau: Option<f64>,
    /// Interference visibility, in [0, 1].
    #[arg(long)]
    xi: Option<f64>,
    /// Additive dark-count mean per port.
    #[arg(long)]
    dark_mean: Option<f64>,
    /// Decision rule.
    #[arg(long, value_enum)]
    rule: Option<RuleKind>,
    /// Pin the MAP threshold instead of optimizing it.
    #[arg(long)]
    delta_th: Option<i64>,
    /// Swept parameter (sweep command).
    #[arg(long, value_enum)]
    sweep: Option<SweepParam>,
    /// Grid as start:stop:n or a comma-separated list.
    #[arg(long)]
    grid: Option<String>,
    /// Enable Monte Carlo columns.
    #[arg(long)]
    mc: bool,
    /// Number of Monte Carlo sets.
    #[arg(long = "sets")]
    sets: Option<u32>,
    /// Shots per Monte Carlo set.
    #[arg(long)]
    set_size: Option<u64>,
    /// Master seed (falls back to $WFH_SEED, then a fixed default).
    #[arg(long)]
    seed: Option<u64>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also render a minimal SVG plot.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Worker threads for sweep evaluation (0 = automatic).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    /// JSON config file (only the seed is used).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for the Monte Carlo checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Test hook: multiply one pmf inside the normalization check by 1+1e-6.
    #[arg(long, hide = true)]
    inject_perturbation: bool,
}

fn resolve_args(args: RunArgs) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let cfg = config::resolve(
        file,
        Overrides {
            alpha_sq: args.alpha_sq,
            q0: args.q0,
            z_sq: args.z_sq,
            tau: args.tau,
            xi: args.xi,
            dark_mean: args.dark_mean,
            rule: args.rule,
            delta_th: args.delta_th,
            sweep: args.sweep,
            grid: args.grid,
            mc: args.mc,
            set_size: args.set_size,
            n_sets: args.sets,
            seed: args.seed,
            csv: args.csv,
            svg: args.svg,
            workers: args.workers,
        },
    )?;
    config::validate(&cfg)?;
    Ok(cfg)
}

fn cmd_point(args: RunArgs) -> Result<(), CliError> {
    let cfg = resolve_args(args)?;
    if cfg.sweep.is_some() {
        return Err(CliError::Config(
            "sweep: point evaluation takes no swept parameter; use the sweep command".into(),
        ));
    }
    let point = run::evaluate_point(&cfg, None, cfg.seed)?;
    let rows = vec![point];
    output::write_csv(&rows, cfg.csv.as_deref())?;
    if let Some(svg) = &cfg.svg {
        output::write_svg(&rows, "point", svg)?;
    }
    Ok(())
}

fn cmd_sweep(args: RunArgs) -> Result<(), CliError> {
    let cfg = resolve_args(args)?;
    let (param, grid) = config::sweep_request(&cfg)?;
    let rows = run::evaluate_sweep(&cfg, param, &grid)?;
    output::write_csv(&rows, cfg.csv.as_deref())?;
    if let Some(svg) = &cfg.svg {
        output::write_svg(&rows, param.name(), svg)?;
    }
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let env_seed = std::env::var(config::SEED_ENV_VAR)
        .ok()
        .and_then(|s| s.parse::<u64>().ok());
    let seed = args
        .seed
        .or(file.seed)
        .or(env_seed)
        .unwrap_or(config::DEFAULT_SEED);
    let opts = wfh_core::validate::ValidateOptions {
        seed,
        pmf_perturbation: args.inject_perturbation.then_some(1.0 + 1e-6),
    };
    let outcomes = wfh_core::validate::run_checks(&opts);
    let mut failed = 0usize;
    for outcome in &outcomes {
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:<34} {}", outcome.name, outcome.detail);
        if !outcome.passed {
            failed += 1;
        }
    }
    println!(
        "{} of {} checks passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    if failed > 0 {
        return Err(CliError::Failure(format!(
            "{failed} invariant check(s) failed"
        )));
    }
    Ok(())
}

/// Parse arguments, dispatch, and map errors to exit codes.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Point(args) => cmd_point(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
