//! Purely uniformly random trees (PURT) and forests (PURF) for
//! one-dimensional random-design regression `Y = s(X) + ε` on [0, 1].
//!
//! A PURT is the regressogram of the learning sample on a partition of
//! [0, 1] cut at `k` i.i.d. Uniform(0, 1) points drawn independently of the
//! data. A PURF averages `q` PURTs built on the same sample.
//!
//! Besides the estimators the crate carries exact oracles for checking them:
//! per-cell conditional means by quadrature ([`oracle_tree`]), the exact
//! conditional variance on a fixed partition
//! ([`conditional_variance_eq9`]), the interleaving counts of two uniform
//! partitions ([`count_m12`], [`expected_m12`], [`crossing_probability`]),
//! and the closed-form bounds in [`theory`].

pub mod error;
pub mod estimators;
pub mod model;
pub mod partition;
pub mod quadrature;
pub mod risk;
pub mod rng;
pub mod stats;
pub mod step;
pub mod theory;

pub use error::{PurfError, Result};
pub use estimators::{fit_forest, fit_forest_on, fit_tree, oracle_tree, ForestEstimator, OracleTree, TreeEstimator};
pub use model::{catalog_model, DesignLaw, LearningSample, NoiseKind, RegressionModel, CATALOG};
pub use partition::{
    count_m12, crossing_probability, crossing_probability_total, expected_m12, merge, spacing_moment, CellLocator,
    MergedPartition, Origin, UniformPartition,
};
pub use quadrature::{Integrator, QuadratureSettings};
pub use risk::{
    conditional_variance_eq9, estimate_decomposition, estimate_forest_decomposition, estimate_tree_covariance,
    expected_inverse_positive_binomial, ise_regression, ise_steps, monte_carlo_conditional_variance,
    ConditionalVariance, CovarianceReport, RiskReport, RunConfig,
};
pub use rng::{MasterSeed, Purpose, SimRng};
pub use stats::Estimate;
pub use step::StepFunction;
pub use theory::{bounds, expected_n12, minimax_k, rate_fit, BoundSet};
