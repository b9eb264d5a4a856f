use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fiberwise::experiment::THREADS_ENV;
use fiberwise::{run, Error, Experiment, ExperimentConfig};

/// Run one experiment and write its CSV, summary and manifest.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// orbit, weyl, atoms, density, cantor, decay, homog-asynch,
    /// homog-birkhoff, homog-mixing or monoid-selftest
    experiment: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config overrides such as `n=500` or `model.t0=0.25`.
    overrides: Vec<String>,
}

fn configure(args: &Args) -> fiberwise::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(args.config.as_deref(), &args.overrides)?;
    cfg.experiment = Some(args.experiment.parse::<Experiment>()?);
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        match raw.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("thread pool: {e}");
                }
            }
            _ => {
                eprintln!("{THREADS_ENV} must be a positive integer, got `{raw}`");
                return ExitCode::from(2);
            }
        }
    }
    let cfg = match configure(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(manifest) => {
            for c in &manifest.checks {
                println!("{} {} value={} bound={}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.bound);
            }
            if manifest.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Error::Config(msg)) => {
            eprintln!("bad config: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
