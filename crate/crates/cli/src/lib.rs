//! Library side of the `purf-lab` experiment runner.

pub mod config;
pub mod experiments;
pub mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};

use thiserror::Error;

pub use config::{parse_config_text, ConfigError, Experiment, ExperimentConfig, Format, EXPERIMENTS};
pub use experiments::{run_experiment, Outcome};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] purf::PurfError),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Model(_) => 1,
            RunError::Io(_) => 3,
        }
    }
}

/// Runs the configured experiment on a pool of `cfg.threads` workers (or
/// rayon's default), writes the result file, and returns the outcome.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| io::Error::other(e.to_string()))?;
    let outcome = pool.install(|| run_experiment(cfg))?;
    let provenance = cfg.provenance();
    let write = |w: &mut dyn Write| match cfg.format {
        Format::Csv => outcome.table.write_csv(w, &provenance),
        Format::Json => outcome.table.write_json(w, cfg.experiment.name(), &provenance),
    };
    match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(outcome)
}
