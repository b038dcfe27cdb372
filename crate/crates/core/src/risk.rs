//! Monte Carlo estimation of the risk decomposition
//! `E[(ŝ − s)²] = E[(ŝ − s̃)²] + E[(s̃ − s)²]` for trees and forests, the
//! covariance between two trees sharing a sample, and the exact conditional
//! variance of a tree on a fixed partition.
//!
//! Replicates are independent: replicate `r` draws its learning sample from
//! substream `(r, Sample, 0)` and the partition of tree `l` from
//! `(r, Partition, l)`. Per-replicate values are computed in parallel,
//! collected in replicate order, and reduced by pairwise summation, so a
//! report depends on the seed but not on the number of worker threads.
//! A single-tree forest replicate is therefore the same computation as a
//! tree replicate, and tree `0` of a forest uses the tree's partition.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PurfError, Result};
use crate::estimators::{fit_forest_on, oracle_tree, OracleTree};
use crate::model::{DesignLaw, RegressionModel};
use crate::partition::{LnFactorial, UniformPartition};
use crate::quadrature::Integrator;
use crate::rng::{MasterSeed, Purpose};
use crate::stats::Estimate;
use crate::step::StepFunction;

/// `E[(f(X) − g(X))²]` for two step functions, exact on their common
/// refinement.
pub fn ise_steps(f: &StepFunction, g: &StepFunction, design: &DesignLaw) -> f64 {
    f.squared_distance(g, design)
}

/// `E[(f(X) − s(X))²]` for a step function `f` and the model's regression
/// function, by quadrature on every piece of `f`.
pub fn ise_regression(f: &StepFunction, model: &RegressionModel, quad: &Integrator) -> Result<f64> {
    let mut acc = 0.0;
    for (j, (lo, hi, v)) in f.pieces().enumerate() {
        acc += quad.integrate(lo, hi, j, |x| {
            let d = v - model.regression(x);
            d * d * model.density(x)
        })?;
    }
    Ok(acc)
}

/// Echo of the settings that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: String,
    pub sigma: f64,
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub replicates: usize,
    pub seed: u64,
}

/// Replicate-level values behind a [`RiskReport`], in replicate order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecompositionSamples {
    pub risk: Vec<f64>,
    pub variance: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    /// `E[(ŝ(X) − s(X))²]`
    pub risk: Estimate,
    /// `E[(ŝ(X) − s̃(X))²]`
    pub variance_term: Estimate,
    /// `E[(s̃(X) − s(X))²]`
    pub bias_term: Estimate,
    pub replicates: usize,
    pub config: RunConfig,
    #[serde(skip)]
    pub samples: DecompositionSamples,
}

impl RiskReport {
    /// Mean and standard error of `risk − (variance + bias)` over replicates.
    pub fn decomposition_gap(&self) -> Estimate {
        let s = &self.samples;
        let gap: Vec<f64> = (0..s.risk.len())
            .map(|r| s.risk[r] - (s.variance[r] + s.bias[r]))
            .collect();
        Estimate::from_replicates(&gap)
    }
}

#[derive(Debug, Clone, Copy)]
struct ReplicateTerms {
    risk: f64,
    variance: f64,
    bias: f64,
}

fn check_replicates(replicates: usize) -> Result<()> {
    if replicates < 2 {
        return Err(PurfError::InvalidArgument(format!(
            "need at least 2 replicates, got {replicates}"
        )));
    }
    Ok(())
}

fn forest_replicate(
    model: &RegressionModel,
    n: usize,
    k: usize,
    q: usize,
    seed: MasterSeed,
    r: u64,
    quad: &Integrator,
) -> Result<ReplicateTerms> {
    let sample = model.sample(n, &mut seed.substream(r, Purpose::Sample, 0))?;
    let partitions: Vec<UniformPartition> = (0..q as u64)
        .map(|l| UniformPartition::sample(k, &mut seed.substream(r, Purpose::Partition, l)))
        .collect();
    let oracles: Vec<OracleTree> = partitions
        .iter()
        .map(|p| oracle_tree(model, p.clone(), quad))
        .collect::<Result<_>>()?;
    let forest = fit_forest_on(&sample, partitions)?;

    let mut fitted = Vec::with_capacity(q);
    let mut approx = Vec::with_capacity(q);
    let mut errors = Vec::with_capacity(q);
    for (tree, oracle) in forest.trees().iter().zip(&oracles) {
        let cuts = tree.partition().cuts().to_vec();
        let diff: Vec<f64> = tree.beta_hat().iter().zip(oracle.beta()).map(|(a, b)| a - b).collect();
        fitted.push(tree.to_step());
        approx.push(oracle.to_step());
        errors.push(StepFunction::new(cuts, diff));
    }
    let fitted = StepFunction::average(&fitted);
    let approx = StepFunction::average(&approx);
    let error = StepFunction::average(&errors);

    let design = model.design();
    Ok(ReplicateTerms {
        risk: ise_regression(&fitted, model, quad)?,
        variance: ise_steps(&error, &StepFunction::constant(0.0), design),
        bias: ise_regression(&approx, model, quad)?,
    })
}

/// Runs `f` for replicates `0..replicates` in parallel and returns the
/// results in replicate order.
fn collect_replicates<T, F>(replicates: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..replicates as u64).into_par_iter().map(f).collect()
}

/// Tree decomposition: the single-tree case of
/// [`estimate_forest_decomposition`].
pub fn estimate_decomposition(
    model: &RegressionModel,
    n: usize,
    k: usize,
    replicates: usize,
    seed: MasterSeed,
    quad: &Integrator,
) -> Result<RiskReport> {
    estimate_forest_decomposition(model, n, k, 1, replicates, seed, quad)
}

/// Per replicate: one learning sample, `q` partitions, the fitted forest
/// `ŝ` and the averaged oracle `s̃`; accumulates `∫(ŝ−s)²dμ`,
/// `∫(ŝ−s̃)²dμ` (exact) and `∫(s̃−s)²dμ`.
pub fn estimate_forest_decomposition(
    model: &RegressionModel,
    n: usize,
    k: usize,
    q: usize,
    replicates: usize,
    seed: MasterSeed,
    quad: &Integrator,
) -> Result<RiskReport> {
    check_replicates(replicates)?;
    if q == 0 || n == 0 {
        return Err(PurfError::InvalidArgument(format!(
            "need n >= 1 and q >= 1, got n={n}, q={q}"
        )));
    }
    let terms = collect_replicates(replicates, |r| forest_replicate(model, n, k, q, seed, r, quad))?;
    let samples = DecompositionSamples {
        risk: terms.iter().map(|t| t.risk).collect(),
        variance: terms.iter().map(|t| t.variance).collect(),
        bias: terms.iter().map(|t| t.bias).collect(),
    };
    Ok(RiskReport {
        risk: Estimate::from_replicates(&samples.risk),
        variance_term: Estimate::from_replicates(&samples.variance),
        bias_term: Estimate::from_replicates(&samples.bias),
        replicates,
        config: RunConfig {
            model: model.name().to_string(),
            sigma: model.noise_sd(),
            n,
            k,
            q,
            replicates,
            seed: seed.0,
        },
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    /// `E[(ŝ_{U¹} − s̃_{U¹})(ŝ_{U²} − s̃_{U²})]`
    pub covariance: Estimate,
    /// `E[(ŝ_{U¹} − s̃_{U¹})²]`
    pub tree_variance: Estimate,
    /// `covariance / tree_variance` (ratio of the means)
    pub ratio: f64,
    /// Delta-method standard error of `ratio` over paired replicates.
    pub ratio_se: f64,
    pub replicates: usize,
    #[serde(skip)]
    pub covariance_samples: Vec<f64>,
    #[serde(skip)]
    pub variance_samples: Vec<f64>,
}

/// Per replicate: one learning sample and two independent partitions.
/// Both integrals are exact on the merged breakpoints.
pub fn estimate_tree_covariance(
    model: &RegressionModel,
    n: usize,
    k: usize,
    replicates: usize,
    seed: MasterSeed,
    quad: &Integrator,
) -> Result<CovarianceReport> {
    check_replicates(replicates)?;
    let design = model.design();
    let pairs = collect_replicates(replicates, |r| {
        let sample = model.sample(n, &mut seed.substream(r, Purpose::Sample, 0))?;
        let errors: Vec<StepFunction> = (0..2u64)
            .map(|l| {
                let p = UniformPartition::sample(k, &mut seed.substream(r, Purpose::Partition, l));
                let oracle = oracle_tree(model, p.clone(), quad)?;
                let tree = crate::estimators::fit_tree(&sample, p)?;
                let diff = tree.beta_hat().iter().zip(oracle.beta()).map(|(a, b)| a - b).collect();
                Ok(StepFunction::new(tree.partition().cuts().to_vec(), diff))
            })
            .collect::<Result<_>>()?;
        Ok((errors[0].inner(&errors[1], design), errors[0].inner(&errors[0], design)))
    })?;
    let covariance_samples: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let variance_samples: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let covariance = Estimate::from_replicates(&covariance_samples);
    let tree_variance = Estimate::from_replicates(&variance_samples);
    let ratio = covariance.value / tree_variance.value;
    let linearized: Vec<f64> = covariance_samples
        .iter()
        .zip(&variance_samples)
        .map(|(c, v)| (c - ratio * v) / tree_variance.value)
        .collect();
    let ratio_se = Estimate::from_replicates(&linearized).se;
    Ok(CovarianceReport {
        covariance,
        tree_variance,
        ratio,
        ratio_se,
        replicates,
        covariance_samples,
        variance_samples,
    })
}

/// `E[1{N > 0}/N]` for `N ~ Binomial(n, p)`: the empty event contributes 0.
/// Summed in log space.
pub fn expected_inverse_positive_binomial(n: usize, p: f64) -> Result<f64> {
    expected_inverse_with_table(&LnFactorial::new(n), n, p)
}

fn expected_inverse_with_table(lf: &LnFactorial, n: usize, p: f64) -> Result<f64> {
    if n == 0 {
        return Err(PurfError::InvalidArgument("n must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(PurfError::OutOfUnitInterval { what: "p", value: p });
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0 / n as f64);
    }
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let base = lf.get(n);
    let mut acc = 0.0;
    for m in 1..=n {
        let ln_term = base - lf.get(m) - lf.get(n - m) + m as f64 * ln_p + (n - m) as f64 * ln_q;
        acc += ln_term.exp() / m as f64;
    }
    Ok(acc)
}

/// Conditional variance of a tree on a fixed partition `U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalVariance {
    /// `Σ_j p_j·E[1{N_j>0}/N_j]·(σ² + (σ_j^d)²)`, the occupied-cell part.
    pub eq9: f64,
    /// `Σ_j p_j·(1 − p_j)^n·β_j²`: an empty cell predicts 0 instead of `β_j`.
    pub empty_cells: f64,
    /// `E[(ŝ_U(X) − s̃_U(X))² | U] = eq9 + empty_cells`, exactly.
    pub total: f64,
}

/// Closed-form `E[(ŝ_U(X) − s̃_U(X))² | U]` for a learning sample of size `n`.
pub fn conditional_variance_eq9(
    model: &RegressionModel,
    partition: &UniformPartition,
    n: usize,
    quad: &Integrator,
) -> Result<ConditionalVariance> {
    let oracle = oracle_tree(model, partition.clone(), quad)?;
    conditional_variance_from_oracle(model, &oracle, n)
}

pub fn conditional_variance_from_oracle(
    model: &RegressionModel,
    oracle: &OracleTree,
    n: usize,
) -> Result<ConditionalVariance> {
    let lf = LnFactorial::new(n);
    let sigma2 = model.noise_variance();
    let mut eq9 = 0.0;
    let mut empty_cells = 0.0;
    for ((&p, &v), &b) in oracle
        .cell_probs()
        .iter()
        .zip(oracle.cell_approx_var())
        .zip(oracle.beta())
    {
        eq9 += p * expected_inverse_with_table(&lf, n, p)? * (sigma2 + v);
        empty_cells += p * (n as f64 * (-p).ln_1p()).exp() * b * b;
    }
    Ok(ConditionalVariance {
        eq9,
        empty_cells,
        total: eq9 + empty_cells,
    })
}

/// Monte Carlo of `E[(ŝ_U(X) − s̃_U(X))² | U]`: `samples` fresh learning sets
/// on the fixed partition; replicate `r` uses substream `(r, Sample, 0)`.
/// Each replicate value `Σ_j p_j (β̂_j − β_j)²` is exact given the fit.
pub fn monte_carlo_conditional_variance(
    model: &RegressionModel,
    partition: &UniformPartition,
    n: usize,
    samples: usize,
    seed: MasterSeed,
    quad: &Integrator,
) -> Result<Estimate> {
    check_replicates(samples)?;
    if n == 0 {
        return Err(PurfError::InvalidArgument("n must be at least 1".into()));
    }
    let oracle = oracle_tree(model, partition.clone(), quad)?;
    let cells = partition.num_cells();
    let design = model.design();
    let locator = partition.locator();
    let values = collect_replicates(samples, |r| {
        let mut rng = seed.substream(r, Purpose::Sample, 0);
        let mut sums = vec![0.0; cells];
        let mut counts = vec![0u32; cells];
        // Same draw order as `RegressionModel::sample`, without storing the set.
        for _ in 0..n {
            let x = design.draw(&mut rng);
            let y = model.regression(x) + model.draw_noise(&mut rng);
            let j = locator.locate(x);
            sums[j] += y;
            counts[j] += 1;
        }
        let mut acc = 0.0;
        for j in 0..cells {
            let fitted = if counts[j] == 0 {
                0.0
            } else {
                sums[j] / counts[j] as f64
            };
            let d = fitted - oracle.beta()[j];
            acc += oracle.cell_probs()[j] * d * d;
        }
        Ok(acc)
    })?;
    Ok(Estimate::from_replicates(&values))
}
