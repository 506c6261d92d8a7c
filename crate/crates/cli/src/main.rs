use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use spde_galerkin_cli::config::{OutputBlock, SuiteBlock};
use spde_galerkin_cli::{execute, run_experiment, CliError, ExperimentConfig, ExperimentKind, Overrides};

/// Spectral Galerkin SPDE experiments: coupled error curves, rate fits and
/// invariant suites.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// Experiment file (TOML).
    #[arg(long, required_unless_present = "suite", conflicts_with = "suite")]
    config: Option<PathBuf>,
    /// Run a named suite: spectral-properties, ito-identities,
    /// noise-statistics, commutator-oracle or rate-benchmarks.
    #[arg(long)]
    suite: Option<String>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured number of Monte Carlo paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Report directory; overrides the config. A bare `--suite` run writes
    /// files only when this is given.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: &Args) -> Result<bool, CliError> {
    let overrides = Overrides {
        seed: args.seed,
        paths: args.paths,
        out: args.out.clone(),
    };
    let (config, write) = match (&args.config, &args.suite) {
        (Some(path), _) => (ExperimentConfig::load(path)?, true),
        (None, Some(name)) => (
            ExperimentConfig {
                name: name.clone(),
                kind: ExperimentKind::Suite,
                model: None,
                discretization: None,
                estimation: None,
                commutator: None,
                suite: Some(SuiteBlock {
                    names: vec![name.clone()],
                    seed: 0,
                }),
                output: OutputBlock::default(),
            },
            args.out.is_some(),
        ),
        (None, None) => unreachable!("clap requires one of --config, --suite"),
    };
    let mut config = config;
    config.apply(&overrides);
    let outcome = if write { run_experiment(&config)? } else { execute(&config)? };
    for line in &outcome.summary {
        println!("{line}");
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
