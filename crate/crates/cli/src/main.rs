mod config;
mod manifest;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use config::ScenarioConfig;
use run::RunError;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 1;

#[derive(Parser)]
#[command(name = "mimcav", version, about = "Membrane-in-the-middle cavity spectra and coupling analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario file.
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to all cores. Never changes output bytes.
    #[arg(long)]
    threads: Option<usize>,
    /// Log progress to stderr.
    #[arg(short, long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Perturbed spectrum over the configured sweep.
    Sweep(Common),
    /// Fit avoided crossings (model gaps or an external branch file).
    Crossing(Common),
    /// Branch linewidths and their gradients over the sweep.
    Kappa(Common),
    /// Bisect the tilt at which an extremum turns quartic.
    Quartic(Common),
    /// Quantum-nondemolition feasibility estimates.
    Feasibility(Common),
    /// Exact planar-cavity detuning for comparison.
    Oracle1d(Common),
}

fn execute(name: &str, args: &Common, body: fn(&ScenarioConfig, &Path) -> run::Result<Vec<String>>) -> ExitCode {
    let cfg = match ScenarioConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            error!("{}: {e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        error!("cannot create {}: {e}", args.out.display());
        return ExitCode::from(EXIT_IO);
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n.max(1));
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            error!("thread pool: {e}");
            return ExitCode::from(EXIT_IO);
        }
    };
    let files = match pool.install(|| body(&cfg, &args.out)) {
        Ok(f) => f,
        Err(e) => {
            error!("{e}");
            return ExitCode::from(match e {
                RunError::Config(_) => EXIT_CONFIG,
                RunError::Numerical(_) => EXIT_NUMERICAL,
                RunError::Io { .. } => EXIT_IO,
            });
        }
    };
    match manifest::write(&args.out, name, &cfg, &files) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("manifest: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args, body): (&str, &Common, fn(&ScenarioConfig, &Path) -> run::Result<Vec<String>>) = match &cli.command {
        Command::Sweep(a) => ("sweep", a, run::sweep),
        Command::Crossing(a) => ("crossing", a, run::crossing),
        Command::Kappa(a) => ("kappa", a, run::kappa),
        Command::Quartic(a) => ("quartic", a, run::quartic),
        Command::Feasibility(a) => ("feasibility", a, run::feasibility),
        Command::Oracle1d(a) => ("oracle1d", a, run::oracle1d),
    };
    // configured explicitly: the environment is never consulted
    env_logger::Builder::new()
        .filter_level(if args.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .format_timestamp(None)
        .init();
    execute(name, args, body)
}
