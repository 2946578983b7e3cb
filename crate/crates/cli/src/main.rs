mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{run_analyze, run_cones, run_growth, run_simulate, run_verify, CliError, Context};
use config::RunConfig;
use report::Provenance;

#[derive(Parser)]
#[command(
    name = "hypersym",
    version,
    about = "Structure and growth diagnostics for first-order hyperbolic systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Characteristic point, localization, hyperbolicity and manifold report.
    Analyze,
    /// Propagation cone and its position relative to the characteristic set.
    Cones,
    /// Time evolution of single modes with energy tracking.
    Simulate,
    /// Spectral abscissas over kappa and the growth-exponent fit.
    Growth,
    /// Exact identities and bounds for the configured model.
    Verify,
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| hypersym::Error::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path).map_err(|source| CliError::InFile {
        file: path.clone(),
        source,
    })?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    std::fs::create_dir_all(&cli.out).map_err(|source| CliError::Io {
        path: cli.out.clone(),
        source,
    })?;
    faer::set_global_parallelism(faer::Par::Seq);
    let ctx = Context {
        prov: Provenance {
            version: env!("CARGO_PKG_VERSION"),
            config_hash: cfg.hash.clone(),
            seed: cfg.seed,
        },
        cfg,
        out: cli.out.clone(),
        threads: cli.threads,
    };
    let outcome = match cli.command {
        Command::Analyze => run_analyze(&ctx),
        Command::Cones => run_cones(&ctx),
        Command::Simulate => run_simulate(&ctx),
        Command::Growth => run_growth(&ctx),
        Command::Verify => run_verify(&ctx),
    }?;
    for line in &outcome.summary {
        println!("{line}");
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(outcome.exit)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
