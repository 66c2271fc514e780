//! qmetric CLI: scenario checks, reports and the randomized verify suite.
//!
//! Exit codes: 0 all checks pass, 1 at least one check failed, 2 config or
//! usage error, 3 internal numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qmetric::error::Error;
use qmetric::scenario::config::Format;
use qmetric::scenario::{load_config, run_stage, verify, Stage, VerifyOptions};

/// Default output directory environment variable, consulted when neither
/// --out nor the config names one.
const OUT_ENV: &str = "QMETRIC_OUT";

#[derive(Parser)]
#[command(name = "qmetric", version, about = "Evolution checks for time-dependent Hilbert-space metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagator checks only
    Evolve(RunArgs),
    /// Propagator plus metric-evolution checks
    Metric(RunArgs),
    /// Checks through the phase decomposition
    Phases(RunArgs),
    /// Checks through covariance and equivalence
    Covariance(RunArgs),
    /// Dissipative-extension checks (config must carry a lindblad section)
    Lindblad(RunArgs),
    /// The full pipeline
    Run(RunArgs),
    /// Seeded randomized self-verification
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config file (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory; wins over the config and QMETRIC_OUT
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override time.steps from the config
    #[arg(long)]
    steps: Option<usize>,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict emitted formats (csv, json; comma-separated)
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
    /// Accepted for interface symmetry; single-scenario runs are serial
    #[arg(long)]
    #[allow(dead_code)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Output directory; wins over QMETRIC_OUT
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Grid steps per trial
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    /// Dimensions cycled over trials (comma-separated)
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 8])]
    dims: Vec<usize>,
    /// Worker threads for trials
    #[arg(long)]
    jobs: Option<usize>,
    /// Self-test: corrupt one metric trajectory and require detection
    #[arg(long, default_value_t = false)]
    corrupt_eta: bool,
    /// Emit the JSON report to stdout even on success
    #[arg(long, default_value_t = false)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> qmetric::Result<ExitCode> {
    match cli.command {
        Command::Evolve(a) => run_cmd(a, Stage::Evolve),
        Command::Metric(a) => run_cmd(a, Stage::Metric),
        Command::Phases(a) => run_cmd(a, Stage::Phases),
        Command::Covariance(a) => run_cmd(a, Stage::Covariance),
        Command::Lindblad(a) => run_cmd(a, Stage::Lindblad),
        Command::Run(a) => run_cmd(a, Stage::All),
        Command::Verify(a) => verify_cmd(a),
    }
}

fn run_cmd(args: RunArgs, stage: Stage) -> qmetric::Result<ExitCode> {
    let mut cfg = load_config(&args.config).map_err(|e| match e {
        qmetric::Error::Io(io) => qmetric::Error::Validation {
            field: "config".into(),
            reason: format!("cannot read {}: {io}", args.config.display()),
        },
        other => other,
    })?;
    if let Some(steps) = args.steps {
        cfg.time.steps = steps;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(fmts) = args.format {
        cfg.outputs.formats = parse_formats(&fmts)?;
    }
    cfg.validate()?;
    let out = resolve_out(args.out, cfg.outputs.directory.as_deref());
    let report = run_stage(&cfg, stage, &out)?;
    print!("{}", report.to_json());
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn verify_cmd(args: VerifyArgs) -> qmetric::Result<ExitCode> {
    let out = resolve_out(args.out, None);
    let opts = VerifyOptions {
        seed: args.seed,
        dims: args.dims,
        trials: args.trials,
        steps: args.steps,
        jobs: args.jobs,
        corrupt_eta: args.corrupt_eta,
    };
    let report = verify(&opts, &out)?;
    if !args.quiet {
        print!("{}", report.to_json());
    }
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn parse_formats(raw: &[String]) -> qmetric::Result<Vec<Format>> {
    raw.iter()
        .map(|s| match s.as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Validation {
                field: "format".into(),
                reason: format!("unknown format {other:?}, expected csv or json"),
            }),
        })
        .collect()
}

fn resolve_out(flag: Option<PathBuf>, cfg_dir: Option<&str>) -> PathBuf {
    flag.or_else(|| cfg_dir.map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}
