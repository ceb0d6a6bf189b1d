mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use config::{LoadError, RunConfig};
use mixtype_core::{convergence_study, solve, verify, Error as CoreError, Solution};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SIGMA: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;
const EXIT_REGRESSION: u8 = 5;

/// Below this final-pair order `convergence` exits with a regression code.
const MIN_FINAL_EOC: f64 = 0.5;

#[derive(Parser)]
#[command(name = "mixtype", version, about = "Nonlocal problem for a mixed parabolic-hyperbolic equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and write field.csv, traces.csv and report.json
    Solve {
        config: PathBuf,
        /// Overrides output.dir
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify the traces stored in a solution directory
    Verify { config: PathBuf, solution_dir: PathBuf },
    /// Solve and verify at several grid sizes and write convergence.csv
    Convergence {
        config: PathBuf,
        /// Comma-separated grid sizes, at least three, increasing
        #[arg(long)]
        levels: String,
        /// Overrides output.dir
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::SigmaInvalid { .. } => EXIT_SIGMA,
            CoreError::Io(_) => EXIT_IO,
            CoreError::Parse(_) | CoreError::InvalidCurve { .. } | CoreError::InvalidParameter(_) => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Config(c) => Failure::new(EXIT_CONFIG, format!("config error: {c}")),
            LoadError::Core(c) => c.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<CoreError>() {
            Ok(core) => core.into(),
            Err(e) => Failure::new(EXIT_IO, format!("{e:#}")),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("MIXTYPE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::new(EXIT_CONFIG, format!("MIXTYPE_THREADS must be a nonnegative integer, got '{raw}'")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::new(EXIT_CONFIG, format!("cannot start {n} worker threads: {e}")))?;
    }
    Ok(())
}

fn load(path: &Path, out: Option<PathBuf>) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    Ok(cfg)
}

fn make_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::new(EXIT_IO, format!("cannot create {}: {e}", dir.display())))
}

fn print_report(report: &mixtype_core::ResidualReport) {
    for (name, value) in report.metrics() {
        println!("  {name:<20} {value:.3e}");
    }
}

fn cmd_solve(config: &Path, out: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = load(config, out)?;
    let sol = solve(&cfg.spec)?;
    let report = verify(&sol, cfg.probe_m)?;
    make_dir(&cfg.output_dir)?;
    output::write_field(&cfg.output_dir, &sol, cfg.field_resolution)?;
    output::write_traces(&cfg.output_dir, sol.traces())?;
    output::write_report(&cfg.output_dir, &report)?;
    println!("solved at M = {}, verified at probe_M = {}", cfg.spec.grid_m, cfg.probe_m);
    print_report(&report);
    println!("wrote {}", cfg.output_dir.display());
    Ok(())
}

fn cmd_verify(config: &Path, dir: &Path) -> Result<(), Failure> {
    let cfg = load(config, None)?;
    let traces = output::read_traces(dir)?;
    let sol = Solution::from_traces(cfg.spec, traces)?;
    let report = verify(&sol, cfg.probe_m)?;
    let stored = output::read_report(&dir.join(output::REPORT_FILE)).ok();
    output::write_report(dir, &report)?;
    println!("verified {} at probe_M = {}", dir.display(), cfg.probe_m);
    print_report(&report);
    match stored {
        Some(old) if old.metrics() == report.metrics() => println!("residuals identical to the stored report"),
        Some(_) => println!("residuals differ from the stored report, which was replaced"),
        None => {}
    }
    Ok(())
}

fn parse_levels(text: &str) -> Result<Vec<usize>, Failure> {
    let levels = text
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Failure::new(EXIT_CONFIG, format!("--levels: expected comma-separated integers, got '{text}'")))?;
    if levels.len() < 3 {
        return Err(Failure::new(EXIT_CONFIG, format!("--levels: need at least 3 levels, got {}", levels.len())));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::new(EXIT_CONFIG, "--levels: levels must be strictly increasing"));
    }
    Ok(levels)
}

fn cmd_convergence(config: &Path, levels: &str, out: Option<PathBuf>) -> Result<(), Failure> {
    let levels = parse_levels(levels)?;
    let cfg = load(config, out)?;
    let table = convergence_study(&cfg.spec, &levels)?;
    make_dir(&cfg.output_dir)?;
    output::write_convergence(&cfg.output_dir, &table)?;
    println!("{:>6}  {:>12}  {:>6}", "M", "residual_max", "eoc");
    for row in &table.rows {
        let eoc = row.eoc.map_or_else(|| "na".to_string(), |p| format!("{p:.2}"));
        println!("{:>6}  {:>12.4e}  {:>6}", row.m, row.residual_max, eoc);
    }
    println!("wrote {}", cfg.output_dir.join(output::CONVERGENCE_FILE).display());
    if let Some(p) = table.final_eoc() {
        if p < MIN_FINAL_EOC {
            return Err(Failure::new(
                EXIT_REGRESSION,
                format!("final order {p:.3} is below {MIN_FINAL_EOC}"),
            ));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Solve { config, out } => cmd_solve(config, out.clone()),
        Command::Verify { config, solution_dir } => cmd_verify(config, solution_dir),
        Command::Convergence { config, levels, out } => cmd_convergence(config, levels, out.clone()),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
