use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qwell_cli::config::Artifact;
use qwell_cli::{inverse_bundle, run_scenario, sweep_bundle, Bundle, CliError, CliResult, EigenCache, ScenarioConfig};

#[derive(Parser)]
#[command(name = "qwell", version, about = "Tunneling dynamics in 1-D multiple-quantum-well potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides outputs.dir; default ".").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for inverse-iteration start vectors (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Eigenpair cache directory (falls back to $QWELL_CACHE_DIR).
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, conflicts_with = "cache")]
    no_cache: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, eigenstates and the sampled potential.
    Solve(Common),
    /// Best sign pattern per well (and the six-well table check).
    Design(Common),
    /// Density snapshots at the configured tau values.
    Evolve(Common),
    /// Autocorrelation, per-well correlation traces and the hop report.
    Correlate(Common),
    /// Every artifact listed under outputs.artifacts (all by default).
    Run(Common),
    /// Barrier-height sweep.
    Sweep(Common),
    /// Barrier height for a target hop period.
    Inverse(Common),
}

type Job = fn(&ScenarioConfig, Option<&EigenCache>) -> CliResult<Bundle>;

fn execute(command: Command) -> CliResult<()> {
    let (common, job): (Common, Job) = match command {
        Command::Solve(c) => (c, |cfg, cache| {
            run_scenario(cfg, cache, &[Artifact::Potential, Artifact::Eigenvalues, Artifact::Eigenstates])
        }),
        Command::Design(c) => (c, |cfg, cache| run_scenario(cfg, cache, &[Artifact::Patterns])),
        Command::Evolve(c) => (c, |cfg, cache| {
            run_scenario(cfg, cache, &[Artifact::Snapshots, Artifact::Autocorrelation])
        }),
        Command::Correlate(c) => (c, |cfg, cache| {
            run_scenario(cfg, cache, &[Artifact::Autocorrelation, Artifact::Correlations, Artifact::Hops])
        }),
        Command::Run(c) => (c, |cfg, cache| run_scenario(cfg, cache, &cfg.artifacts())),
        Command::Sweep(c) => (c, sweep_bundle),
        Command::Inverse(c) => (c, |cfg, _| inverse_bundle(cfg)),
    };

    let mut config = ScenarioConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = Some(seed);
    }
    let cache = EigenCache::resolve(common.cache.as_deref(), common.no_cache);
    let out = common
        .out
        .or_else(|| config.outputs.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));

    let bundle = job(&config, cache.as_ref())?;
    let written = bundle.write_to(&out)?;
    println!("config fingerprint {}", config.fingerprint());
    for line in &bundle.summary {
        println!("{line}");
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = CliError::exit_code(&e);
            ExitCode::from(code as u8)
        }
    }
}
