use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wavemap_lab::experiments::lp_checks::IDENTITY_TOLERANCE;
use wavemap_lab::run::{check_identities, execute, resolve_out_dir, OUT_ENV};
use wavemap_lab::{ExperimentConfig, LabError};

#[derive(Parser)]
#[command(name = "wavemap-lab", version, about = "Wave-map experiments on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output root; overrides $WAVEMAP_LAB_OUT and the config's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for the sweep.
        #[arg(long)]
        jobs: Option<usize>,
        /// Replace the config's seed list by this single seed.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Run the exact-identity suite; nonzero exit on any failure.
    Check,
}

fn run(config: PathBuf, out: Option<PathBuf>, jobs: Option<usize>, seed: Option<u64>) -> Result<i32, LabError> {
    let mut cfg = ExperimentConfig::from_path(&config)?;
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    if jobs == Some(0) {
        return Err(LabError::Config { key: "--jobs".into(), message: "must be >= 1".into() });
    }
    let env = std::env::var(OUT_ENV).ok();
    let root = resolve_out_dir(out.as_deref(), env.as_deref(), &cfg);
    let res = execute(&cfg, &root, jobs)?;
    for f in &res.outcome.failures {
        eprintln!("failed point {}: {}", f.point, f.error);
    }
    println!("{}", res.dir.display());
    Ok(res.exit_code())
}

fn check() -> Result<i32, LabError> {
    let mut failed = false;
    for (grid, name, v) in check_identities()? {
        let ok = v <= IDENTITY_TOLERANCE;
        failed |= !ok;
        println!("{} {grid} {name} {v:e}", if ok { "ok  " } else { "FAIL" });
    }
    Ok(if failed { 2 } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, jobs, seed_override } => run(config, out, jobs, seed_override),
        Command::Check => check(),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
