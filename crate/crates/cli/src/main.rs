use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use curvebound::{run_experiment, EigenOptions, Error, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "curvebound", version, about = "Spectral experiments for the semiclassical Robin Laplacian")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tunnelling splitting: 2D doublet, effective 1D, closed form, interaction matrix.
    Splitting(RunArgs),
    /// Lowest levels on the single-well domain.
    SingleWell(RunArgs),
    /// Residual of the WKB quasimode along the ladder.
    WkbResidual(RunArgs),
    /// Eigenvalue counts against the Weyl formulas.
    Weyl(RunArgs),
    /// Normal and tangential decay of the ground state.
    Decay(RunArgs),
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.dir in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the ladder points.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Use dense eigensolves for small problems.
    #[arg(long)]
    dense_fallback: bool,
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_SOLVER: u8 = 3;

fn init_logging() {
    let level = std::env::var("CURVEBOUND_LOG").unwrap_or_else(|_| "warn".into());
    let level = match level.as_str() {
        "error" | "warn" | "info" | "debug" => level,
        other => {
            eprintln!("CURVEBOUND_LOG = {other:?} is not one of error, warn, info, debug; using warn");
            "warn".into()
        }
    };
    env_logger::Builder::new().parse_filters(&level).format_timestamp(None).init();
}

fn exit_for(e: &anyhow::Error) -> ExitCode {
    match e.downcast_ref::<Error>() {
        Some(err) if err.is_validation() => ExitCode::from(EXIT_VALIDATION),
        Some(_) => ExitCode::from(EXIT_SOLVER),
        None => ExitCode::from(EXIT_VALIDATION),
    }
}

fn run(kind: ExperimentKind, args: RunArgs) -> anyhow::Result<()> {
    let config = ExperimentConfig::load(&args.config)?;
    if config.experiment != kind {
        return Err(Error::Config(format!(
            "config describes a {} experiment, not {}",
            config.experiment.name(),
            kind.name()
        ))
        .into());
    }
    if args.threads == 0 {
        return Err(Error::Config("--threads must be at least 1".into()).into());
    }
    config.validate()?;
    let out = args.out.or_else(|| config.output.dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let opts = EigenOptions { dense_fallback: args.dense_fallback, ..EigenOptions::default() };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.threads).build().context("thread pool")?;
    let outcome = pool.install(|| run_experiment(&config, &out, &opts, |row| println!("{}", row.summary)))?;
    log::info!("wrote {} and {}", outcome.csv_path.display(), outcome.json_path.display());
    Ok(())
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config } => ExperimentConfig::load(&config).and_then(|c| c.validate().map(|_| c)).map(|c| {
            println!("{}: ok ({} ladder points)", c.experiment.name(), c.ladder.len());
        }).map_err(anyhow::Error::from),
        Command::Splitting(a) => run(ExperimentKind::Splitting, a),
        Command::SingleWell(a) => run(ExperimentKind::SingleWell, a),
        Command::WkbResidual(a) => run(ExperimentKind::WkbResidual, a),
        Command::Weyl(a) => run(ExperimentKind::Weyl, a),
        Command::Decay(a) => run(ExperimentKind::Decay, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_for(&e)
        }
    }
}
