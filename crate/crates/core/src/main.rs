use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use univalent::config::Config;
use univalent::error::Error;
use univalent::experiments::{catalog, run};
use univalent::report::write_file;

/// Experiment runner for locally univalent approximation, Schwarzian
/// reconstruction and constant-curvature metric verification.
#[derive(Parser)]
#[command(name = "univalent", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct RunArgs {
    /// Path to the experiment config file
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the report and any grids
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Reserved for future randomized experiments; accepted and recorded
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print progress to stderr
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Schwarzian derivative of a rational map
    Schwarzian(RunArgs),
    /// Locally univalent Runge approximation
    Runge(RunArgs),
    /// Meromorphic reconstruction through the coefficient equation
    OdeReconstruct(RunArgs),
    /// Constant-curvature grid verification
    Curvature(RunArgs),
    /// Harmonic gluing of flat metric targets
    Glue(RunArgs),
    /// Finite-stage universality construction
    Orbit(RunArgs),
    /// Sequence diagnostics
    DiagnoseSeq(RunArgs),
    /// The inverse-square residue obstruction
    Counterexample(RunArgs),
    /// List the available experiments
    List,
}

fn experiment_name(cmd: &Command) -> Option<&'static str> {
    Some(match cmd {
        Command::Schwarzian(_) => "schwarzian",
        Command::Runge(_) => "runge",
        Command::OdeReconstruct(_) => "ode-reconstruct",
        Command::Curvature(_) => "curvature",
        Command::Glue(_) => "glue",
        Command::Orbit(_) => "orbit",
        Command::DiagnoseSeq(_) => "diagnose-seq",
        Command::Counterexample(_) => "counterexample",
        Command::List => return None,
    })
}

fn run_args(cmd: &Command) -> Option<&RunArgs> {
    match cmd {
        Command::Schwarzian(a)
        | Command::Runge(a)
        | Command::OdeReconstruct(a)
        | Command::Curvature(a)
        | Command::Glue(a)
        | Command::Orbit(a)
        | Command::DiagnoseSeq(a)
        | Command::Counterexample(a) => Some(a),
        Command::List => None,
    }
}

fn execute(kind: &str, args: &RunArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut config = Config::parse(&text)?;
    match config.get("experiment") {
        None => {
            let mut entries = config.entries().clone();
            entries.insert("experiment".to_string(), kind.to_string());
            config = Config::from_entries(entries);
        }
        Some(k) if k == kind => {}
        Some(k) => {
            return Err(Error::Config(format!(
                "config names experiment '{k}' but the subcommand is '{kind}'"
            )))
        }
    }
    let started = std::time::Instant::now();
    let mut record = run(&config, &args.out, args.verbose)?;
    record.wall_time_ms = started.elapsed().as_millis() as u64;
    record.detail("seed", serde_json::json!(args.seed));
    write_file(&args.out.join("report.json"), &record.to_json())?;
    println!(
        "{}: ok  sup_error={}  fingerprint={}",
        kind,
        record
            .sup_error
            .or(record.curvature_max_dev)
            .map_or("n/a".to_string(), |e| format!("{e:.3e}")),
        record.fingerprint
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::List = cli.command {
        println!("{}", catalog());
        return ExitCode::SUCCESS;
    }
    let kind = experiment_name(&cli.command).expect("run command");
    let args = run_args(&cli.command).expect("run command");
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let family = e.family();
            eprintln!(
                "error: family={} exit={} reason={}",
                family.name(),
                family.exit_code(),
                e
            );
            ExitCode::from(family.exit_code() as u8)
        }
    }
}
