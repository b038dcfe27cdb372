//! Replicate-level summaries with an order-fixed reduction.

use serde::Serialize;

/// Pairwise (cascade) summation. The result depends only on the order of
/// `values`, never on how the values were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// Sample mean and standard error of the mean of i.i.d. replicate values.
    pub fn from_replicates(values: &[f64]) -> Self {
        let n = values.len();
        assert!(n >= 1, "no replicates");
        let mean = pairwise_sum(values) / n as f64;
        if n == 1 {
            return Estimate {
                value: mean,
                se: f64::INFINITY,
            };
        }
        let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = pairwise_sum(&sq) / (n - 1) as f64;
        Estimate {
            value: mean,
            se: (var / n as f64).sqrt(),
        }
    }

    /// Absolute deviation from `target` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.value - target;
        if d == 0.0 {
            0.0
        } else {
            d.abs() / self.se
        }
    }
}

/// Sample standard deviation.
pub fn sample_sd(values: &[f64]) -> f64 {
    Estimate::from_replicates(values).se * (values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 5050.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn mean_and_se() {
        let e = Estimate::from_replicates(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.value, 2.5);
        // sample variance 5/3, se = sqrt(5/12)
        assert!((e.se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(e.z_score(2.5), 0.0);
    }

    #[test]
    fn constant_replicates_have_zero_se() {
        let e = Estimate::from_replicates(&[0.25; 10]);
        assert_eq!(e.se, 0.0);
        assert_eq!(e.z_score(0.25), 0.0);
    }
}
