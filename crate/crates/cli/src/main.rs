use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zpdvr::harness::config::OneOrMany;
use zpdvr::harness::experiment::{render, SUMMARY_FILE};
use zpdvr::harness::{
    grid_search, run_experiment, summarize, validate, ExperimentConfig, Suite, ValidateOptions,
};
use zpdvr::theory::MIN_SAMPLES;
use zpdvr::{Error, Exec};

/// Derivative-free composite optimization experiments.
#[derive(Parser)]
#[command(name = "zpdvr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every algorithm of a manifest once per seed.
    Run(ExperimentArgs),
    /// Same as `run`; reads naturally for multi-algorithm manifests.
    Compare(ExperimentArgs),
    /// Evaluate every grid point and rank them by final residual.
    Gridsearch(ExperimentArgs),
    /// Run validator suites and print a JSON report.
    Validate(ValidateArgs),
    /// Print a digest of a summary.json (or a directory holding one).
    Summarize { path: PathBuf },
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML manifest.
    config: PathBuf,
    /// Replace the manifest's seeds with this one.
    #[arg(long)]
    seed: Option<u64>,
    /// Oracle-call budget, overriding the manifest.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Run cells one at a time.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// moments, projection, estimator, gk, lyapunov, floor or all
    #[arg(default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draws per Monte Carlo check (at least 100000).
    #[arg(long)]
    samples: Option<usize>,
    /// Also write the report to `<out-dir>/validation.json`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
}

fn exec(sequential: bool) -> Exec {
    if sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn load(args: &ExperimentArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seeds = OneOrMany::One(seed);
    }
    if let Some(budget) = args.budget {
        cfg.budget = Some(budget as f64);
        cfg.budget_nd = None;
    }
    if let Some(dir) = &args.out_dir {
        cfg.out_dir = dir.clone();
    }
    if args.sequential {
        cfg.exec = Exec::Sequential;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_) | Error::Parse { .. } | Error::Io { .. } | Error::Json(_)
    )
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    if is_config_error(&e) {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn experiment(args: &ExperimentArgs, grid: bool) -> ExitCode {
    let cfg = match load(args) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let report = if grid {
        grid_search(&cfg)
    } else {
        run_experiment(&cfg)
    };
    match report {
        Ok(r) => {
            print!("{}", render(&r));
            println!("summary: {}", cfg.out_dir.join(SUMMARY_FILE).display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn run_validate(args: &ValidateArgs) -> ExitCode {
    let suite: Suite = match args.suite.parse() {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    if let Some(n) = args.samples.filter(|&n| n < MIN_SAMPLES) {
        return fail(Error::Config(format!(
            "--samples must be at least {MIN_SAMPLES}, got {n}"
        )));
    }
    let opts = ValidateOptions {
        samples: args.samples,
        seed: args.seed,
        exec: exec(args.sequential),
    };
    let report = match validate(suite, &opts) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    for c in &report.checks {
        eprintln!(
            "{} {:<14} {:<40} statistic={:.6e} bound={:.6e} stderr={:.3e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.params,
            c.statistic,
            c.bound,
            c.stderr
        );
    }
    let json = serde_json::to_string_pretty(&report).expect("reports serialize");
    println!("{json}");
    if let Some(dir) = &args.out_dir {
        let path = dir.join("validation.json");
        if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, &json)) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run_summarize(path: &Path) -> ExitCode {
    let file = if path.is_dir() {
        path.join(SUMMARY_FILE)
    } else {
        path.to_path_buf()
    };
    match summarize(&file) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(a) | Command::Compare(a) => experiment(a, false),
        Command::Gridsearch(a) => experiment(a, true),
        Command::Validate(a) => run_validate(a),
        Command::Summarize { path } => run_summarize(path),
    }
}
