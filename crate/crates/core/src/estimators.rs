//! Purely uniformly random trees and forests.
//!
//! A tree is the regressogram of the learning sample on a uniform random
//! partition that is drawn independently of the data. A forest averages `q`
//! trees fitted on the same learning sample, each with its own partition;
//! there is no bootstrap.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{PurfError, Result};
use crate::model::{LearningSample, RegressionModel};
use crate::partition::UniformPartition;
use crate::quadrature::Integrator;
use crate::step::StepFunction;

/// A fitted tree: per-cell sample means `β̂_j`, with `β̂_j = 0` on empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEstimator {
    partition: UniformPartition,
    beta_hat: Vec<f64>,
    counts: Vec<usize>,
}

impl TreeEstimator {
    pub fn partition(&self) -> &UniformPartition {
        &self.partition
    }

    pub fn beta_hat(&self) -> &[f64] {
        &self.beta_hat
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn predict(&self, x: f64) -> Result<f64> {
        Ok(self.beta_hat[self.partition.locate(x)?])
    }

    pub fn to_step(&self) -> StepFunction {
        StepFunction::new(self.partition.cuts().to_vec(), self.beta_hat.clone())
    }
}

/// Accumulates cell sums in sample order, so any way of computing `cells`
/// gives bit-identical means.
fn tree_from_cells(partition: UniformPartition, ys: &[f64], cells: &[usize]) -> TreeEstimator {
    let m = partition.num_cells();
    let mut sums = vec![0.0; m];
    let mut counts = vec![0usize; m];
    for (&y, &c) in ys.iter().zip(cells) {
        sums[c] += y;
        counts[c] += 1;
    }
    let beta_hat = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect();
    TreeEstimator {
        partition,
        beta_hat,
        counts,
    }
}

fn require_nonempty(sample: &LearningSample) -> Result<()> {
    if sample.is_empty() {
        return Err(PurfError::InvalidArgument(
            "cannot fit on an empty learning sample".into(),
        ));
    }
    Ok(())
}

/// Fits the regressogram of `sample` on `partition`. O(n log k).
pub fn fit_tree(sample: &LearningSample, partition: UniformPartition) -> Result<TreeEstimator> {
    require_nonempty(sample)?;
    let cells: Vec<usize> = sample.xs().iter().map(|&x| partition.locate_unchecked(x)).collect();
    Ok(tree_from_cells(partition, sample.ys(), &cells))
}

/// Cell conditional moments of the model on a fixed partition: the best
/// piecewise-constant approximation `s̃_U` of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTree {
    partition: UniformPartition,
    /// `β_j = E[Y | X ∈ cell j]`
    beta: Vec<f64>,
    /// `p_j = P(X ∈ cell j)`
    cell_probs: Vec<f64>,
    /// `E[(s(X) − β_j)² | X ∈ cell j]`
    cell_approx_var: Vec<f64>,
}

impl OracleTree {
    pub fn partition(&self) -> &UniformPartition {
        &self.partition
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn cell_probs(&self) -> &[f64] {
        &self.cell_probs
    }

    pub fn cell_approx_var(&self) -> &[f64] {
        &self.cell_approx_var
    }

    pub fn predict(&self, x: f64) -> Result<f64> {
        Ok(self.beta[self.partition.locate(x)?])
    }

    pub fn to_step(&self) -> StepFunction {
        StepFunction::new(self.partition.cuts().to_vec(), self.beta.clone())
    }

    /// `E[(s̃_U(X) − s(X))² | U] = Σ_j p_j·E[(s(X) − β_j)² | cell j]`.
    pub fn approximation_error(&self) -> f64 {
        self.cell_probs
            .iter()
            .zip(&self.cell_approx_var)
            .map(|(p, v)| p * v)
            .sum()
    }
}

/// Builds `s̃_U` by per-cell quadrature. Cells of zero probability get
/// `β_j = 0` and zero approximation variance.
pub fn oracle_tree(model: &RegressionModel, partition: UniformPartition, quad: &Integrator) -> Result<OracleTree> {
    let m = partition.num_cells();
    let mut beta = Vec::with_capacity(m);
    let mut cell_probs = Vec::with_capacity(m);
    let mut cell_approx_var = Vec::with_capacity(m);
    let design = model.design();
    for (j, (lo, hi)) in partition.cells().enumerate() {
        let p = design.prob(lo, hi);
        if p.is_nan() || p <= 0.0 {
            beta.push(0.0);
            cell_probs.push(0.0);
            cell_approx_var.push(0.0);
            continue;
        }
        let first = quad.integrate(lo, hi, j, |x| model.regression(x) * model.density(x))?;
        let b = first / p;
        let second = quad.integrate(lo, hi, j, |x| {
            let d = model.regression(x) - b;
            d * d * model.density(x)
        })?;
        beta.push(b);
        cell_probs.push(p);
        cell_approx_var.push(second / p);
    }
    Ok(OracleTree {
        partition,
        beta,
        cell_probs,
        cell_approx_var,
    })
}

/// `q` trees sharing one learning sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestEstimator {
    trees: Vec<TreeEstimator>,
}

impl ForestEstimator {
    pub fn trees(&self) -> &[TreeEstimator] {
        &self.trees
    }

    pub fn q(&self) -> usize {
        self.trees.len()
    }

    pub fn predict(&self, x: f64) -> Result<f64> {
        let mut acc = 0.0;
        for tree in &self.trees {
            acc += tree.predict(x)?;
        }
        Ok(acc / self.trees.len() as f64)
    }

    /// The forest as one step function on the union of all partitions.
    pub fn to_step(&self) -> StepFunction {
        let members: Vec<StepFunction> = self.trees.iter().map(TreeEstimator::to_step).collect();
        StepFunction::average(&members)
    }
}

/// Fits a forest with `q` partitions of `k` cuts, drawn in order from `rng`.
pub fn fit_forest<R: Rng + ?Sized>(
    sample: &LearningSample,
    k: usize,
    q: usize,
    rng: &mut R,
) -> Result<ForestEstimator> {
    if q == 0 {
        return Err(PurfError::InvalidArgument("a forest needs at least one tree".into()));
    }
    let partitions = (0..q).map(|_| UniformPartition::sample(k, rng)).collect();
    fit_forest_on(sample, partitions)
}

/// Fits one tree per given partition on the same sample. The design points
/// are sorted once and each tree assigns cells by a merge walk, O(n + k) per
/// tree after the sort. Trees are fitted in parallel.
pub fn fit_forest_on(sample: &LearningSample, partitions: Vec<UniformPartition>) -> Result<ForestEstimator> {
    require_nonempty(sample)?;
    if partitions.is_empty() {
        return Err(PurfError::InvalidArgument("a forest needs at least one tree".into()));
    }
    let xs = sample.xs();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_unstable_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let trees = partitions
        .into_par_iter()
        .map(|partition| {
            let sorted_cells = partition.locate_sorted(order.iter().map(|&i| xs[i]));
            let mut cells = vec![0usize; xs.len()];
            for (&i, &c) in order.iter().zip(&sorted_cells) {
                cells[i] = c;
            }
            tree_from_cells(partition, sample.ys(), &cells)
        })
        .collect();
    Ok(ForestEstimator { trees })
}
