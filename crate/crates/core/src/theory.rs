//! Closed-form bounds, rates, and interleaving counts for uniform random
//! trees and forests.

use serde::Serialize;

use crate::error::{PurfError, Result};
use crate::model::RegressionModel;
use crate::partition::expected_m12;

/// Theoretical overlay for one `(n, k)` configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSet {
    /// `σ²(k+1)/n`, leading term of the tree variance.
    pub tree_variance_leading: f64,
    /// `6MC²/(k+1)²`, a non-asymptotic bound on the tree bias.
    pub bias_bound: f64,
    pub tree_risk_bound: f64,
    /// `(3/4)·σ²(k+1)/n`
    pub forest_variance_leading: f64,
    pub forest_risk_bound: f64,
    /// `k` with `k + 1 = round(n^{1/3})`
    pub minimax_k: usize,
    pub rate_exponent: f64,
}

pub const RATE_EXPONENT: f64 = -2.0 / 3.0;

/// The rate-optimal number of cuts: `round(n^{1/3}) − 1`, at least 0.
pub fn minimax_k(n: usize) -> usize {
    ((n as f64).cbrt().round() as usize).saturating_sub(1)
}

pub fn bounds(model: &RegressionModel, n: usize, k: usize) -> BoundSet {
    let cells = (k + 1) as f64;
    let tree_variance_leading = model.noise_variance() * cells / n as f64;
    let c = model.lipschitz_const();
    let bias_bound = 6.0 * model.density_max() * c * c / (cells * cells);
    let forest_variance_leading = 0.75 * tree_variance_leading;
    BoundSet {
        tree_variance_leading,
        bias_bound,
        tree_risk_bound: tree_variance_leading + bias_bound,
        forest_variance_leading,
        forest_risk_bound: forest_variance_leading + bias_bound,
        minimax_k: minimax_k(n),
        rate_exponent: RATE_EXPONENT,
    }
}

/// Least-squares line through `(ln n, ln risk)`; returns `(slope, intercept)`.
pub fn rate_fit(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(PurfError::InvalidArgument(format!(
            "rate fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(n, r)) = points.iter().find(|(n, r)| !(*n > 0.0 && *r > 0.0)) {
        return Err(PurfError::InvalidArgument(format!(
            "rate fit needs positive values, got ({n}, {r})"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(n, r)| (n.ln(), r.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(PurfError::InvalidArgument(
            "rate fit needs at least two distinct n".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// `E[N₁,₂] = k + 1 − E[M₁,₂]`, the expected number of terms in the
/// tree-tree covariance bound.
pub fn expected_n12(k: u64) -> f64 {
    (k + 1) as f64 - expected_m12(k)
}
