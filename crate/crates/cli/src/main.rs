use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use purf_lab::{execute, parse_config_text, ConfigError, ExperimentConfig, RunError, EXPERIMENTS};

/// Seeded Monte Carlo experiments for purely uniformly random trees and forests.
#[derive(Debug, Parser)]
#[command(name = "purf-lab", version, after_help = experiments_help())]
struct Cli {
    /// Experiment to run
    experiment: String,
    /// `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Worker threads; results do not depend on this value
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    /// gaussian or uniform
    #[arg(long)]
    noise: Option<String>,
    /// Comma-separated sample sizes
    #[arg(long)]
    n: Option<String>,
    /// Comma-separated cut counts
    #[arg(long)]
    k: Option<String>,
    /// Comma-separated forest sizes
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    replicates: Option<String>,
    /// Random partitions per grid point (eq9-check)
    #[arg(long)]
    partitions: Option<String>,
}

fn experiments_help() -> String {
    format!("Experiments: {}", EXPERIMENTS.join(", "))
}

impl Cli {
    fn overrides(&self) -> Vec<(String, String)> {
        [
            ("seed", &self.seed),
            ("out", &self.out),
            ("format", &self.format),
            ("threads", &self.threads),
            ("model", &self.model),
            ("sigma", &self.sigma),
            ("noise", &self.noise),
            ("n", &self.n),
            ("k", &self.k),
            ("q", &self.q),
            ("replicates", &self.replicates),
            ("partitions", &self.partitions),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect()
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let mut pairs = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
            parse_config_text(&text)?
        }
        None => Vec::new(),
    };
    pairs.extend(cli.overrides());
    Ok(ExperimentConfig::resolve(&cli.experiment, &pairs)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = resolve(&cli).and_then(|cfg| execute(&cfg).map(|outcome| (cfg, outcome)));
    match result {
        Ok((cfg, outcome)) => {
            let summary = outcome.table.render_summary(&outcome.summary_columns);
            // keep stdout clean when it carries the data
            if cfg.out.is_some() {
                print!("{summary}");
            } else {
                eprint!("{summary}");
            }
            if outcome.hard_bound_failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &outcome.hard_bound_failures {
                    eprintln!("bound violated: {f}");
                }
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
