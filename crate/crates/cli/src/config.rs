//! Experiment configuration: a `key = value` text file plus command-line
//! overrides.
//!
//! ```text
//! # comments start with '#'
//! model = linear-uniform
//! sigma = 1
//! n = 10000, 40000
//! k = 20, 33
//! replicates = 400
//! seed = 42
//! ```
//!
//! List-valued keys (`n`, `k`, `q`) take comma-separated integers; counts
//! may be written in scientific notation (`2e4`).

use std::fmt;
use std::path::PathBuf;

use purf::{NoiseKind, CATALOG};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn field_error(field: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError(format!("field `{field}`: {msg}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    TreeDecomposition,
    ForestDecomposition,
    CovarianceRatio,
    M12,
    Rate,
    Eq9Check,
}

pub const EXPERIMENTS: [&str; 6] = [
    "tree-decomposition",
    "forest-decomposition",
    "covariance-ratio",
    "m12",
    "rate",
    "eq9-check",
];

impl Experiment {
    pub fn parse(name: &str) -> Result<Self, ConfigError> {
        Ok(match name {
            "tree-decomposition" => Experiment::TreeDecomposition,
            "forest-decomposition" => Experiment::ForestDecomposition,
            "covariance-ratio" => Experiment::CovarianceRatio,
            "m12" => Experiment::M12,
            "rate" => Experiment::Rate,
            "eq9-check" => Experiment::Eq9Check,
            _ => {
                return Err(ConfigError(format!(
                    "unknown experiment `{name}`; valid experiments are: {}",
                    EXPERIMENTS.join(", ")
                )))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Experiment::TreeDecomposition => "tree-decomposition",
            Experiment::ForestDecomposition => "forest-decomposition",
            Experiment::CovarianceRatio => "covariance-ratio",
            Experiment::M12 => "m12",
            Experiment::Rate => "rate",
            Experiment::Eq9Check => "eq9-check",
        }
    }

    fn uses_model(self) -> bool {
        self != Experiment::M12
    }

    fn uses_n(self) -> bool {
        self != Experiment::M12
    }

    fn uses_k(self) -> bool {
        self != Experiment::Rate
    }

    fn uses_q(self) -> bool {
        matches!(self, Experiment::ForestDecomposition | Experiment::Rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(field_error("format", format!("expected `csv` or `json`, got `{s}`"))),
        }
    }
}

const KEYS: [&str; 13] = [
    "experiment",
    "model",
    "sigma",
    "noise",
    "n",
    "k",
    "q",
    "replicates",
    "partitions",
    "seed",
    "out",
    "format",
    "threads",
];

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError(format!(
                "line {}: expected `key = value`, got `{line}`",
                lineno + 1
            )));
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError(format!(
                "line {}: unknown key `{key}`; valid keys are: {}",
                lineno + 1,
                KEYS.join(", ")
            )));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// A fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: String,
    pub sigma: f64,
    pub noise: NoiseKind,
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub q: Vec<usize>,
    pub replicates: usize,
    /// Number of random partitions (`eq9-check` only).
    pub partitions: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

fn parse_count(field: &str, s: &str) -> Result<usize, ConfigError> {
    let s = s.trim().replace('_', "");
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v <= 1e15 => Ok(v as usize),
        _ => Err(field_error(field, format!("expected a nonnegative integer, got `{s}`"))),
    }
}

fn parse_positive(field: &str, s: &str) -> Result<usize, ConfigError> {
    let v = parse_count(field, s)?;
    if v == 0 {
        return Err(field_error(field, "must be positive"));
    }
    Ok(v)
}

fn parse_list(field: &str, s: &str) -> Result<Vec<usize>, ConfigError> {
    let values = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_positive(field, t))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(field_error(field, "empty list"));
    }
    Ok(values)
}

impl ExperimentConfig {
    /// Resolves `pairs` (file entries first, then overrides; later entries
    /// win) for the named experiment.
    pub fn resolve(experiment: &str, pairs: &[(String, String)]) -> Result<Self, ConfigError> {
        let experiment = Experiment::parse(experiment)?;
        let get = |key: &str| pairs.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());

        if let Some(named) = get("experiment") {
            if named != experiment.name() {
                Experiment::parse(named)?;
                return Err(field_error(
                    "experiment",
                    format!("config names `{named}` but `{}` was requested", experiment.name()),
                ));
            }
        }
        let model = match get("model") {
            Some(m) if CATALOG.contains(&m) => m.to_string(),
            Some(m) => {
                return Err(field_error(
                    "model",
                    format!("unknown model `{m}`; valid: {}", CATALOG.join(", ")),
                ))
            }
            None if experiment.uses_model() => return Err(field_error("model", "required")),
            None => String::new(),
        };
        let sigma = match get("sigma") {
            Some(s) => s
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| field_error("sigma", format!("expected a finite nonnegative number, got `{s}`")))?,
            None => 1.0,
        };
        let noise = match get("noise") {
            Some(s) => NoiseKind::parse(s)
                .ok_or_else(|| field_error("noise", format!("expected `gaussian` or `uniform`, got `{s}`")))?,
            None => NoiseKind::Gaussian,
        };
        let list = |field: &str, needed: bool| -> Result<Vec<usize>, ConfigError> {
            match get(field) {
                Some(s) => parse_list(field, s),
                None if needed => Err(field_error(field, "required")),
                None => Ok(Vec::new()),
            }
        };
        let n = list("n", experiment.uses_n())?;
        let k = list("k", experiment.uses_k())?;
        let q = list("q", experiment.uses_q())?;
        let replicates = match get("replicates") {
            Some(s) => parse_count("replicates", s)?,
            None => return Err(field_error("replicates", "required")),
        };
        if replicates < 2 {
            return Err(field_error("replicates", "must be at least 2"));
        }
        let partitions = match get("partitions") {
            Some(s) => parse_positive("partitions", s)?,
            None => 10,
        };
        let seed = match get("seed") {
            Some(s) => s
                .trim()
                .parse::<u64>()
                .map_err(|_| field_error("seed", format!("expected a 64-bit unsigned integer, got `{s}`")))?,
            None => return Err(field_error("seed", "required (there is no default seed)")),
        };
        let format = match get("format") {
            Some(s) => Format::parse(s)?,
            None => Format::Csv,
        };
        let threads = get("threads").map(|s| parse_positive("threads", s)).transpose()?;
        let out = get("out").map(PathBuf::from);
        if experiment == Experiment::M12 {
            if let Some(bad) = k.iter().find(|&&k| k < 3) {
                return Err(field_error("k", format!("m12 needs k >= 3, got {bad}")));
            }
        }
        Ok(ExperimentConfig {
            experiment,
            model,
            sigma,
            noise,
            n,
            k,
            q,
            replicates,
            partitions,
            seed,
            out,
            format,
            threads,
        })
    }

    /// The settings that determine the results, in canonical form. Output
    /// location, format, and thread count are excluded.
    pub fn provenance(&self) -> Vec<(&'static str, String)> {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let e = self.experiment;
        let mut out = vec![("experiment", e.name().to_string())];
        if e.uses_model() {
            out.push(("model", self.model.clone()));
            out.push(("sigma", format!("{}", self.sigma)));
            out.push(("noise", self.noise.name().to_string()));
            out.push(("n", join(&self.n)));
        }
        if e.uses_k() {
            out.push(("k", join(&self.k)));
        }
        if e.uses_q() {
            out.push(("q", join(&self.q)));
        }
        out.push(("replicates", self.replicates.to_string()));
        if e == Experiment::Eq9Check {
            out.push(("partitions", self.partitions.to_string()));
        }
        out.push(("seed", self.seed.to_string()));
        out
    }
}
