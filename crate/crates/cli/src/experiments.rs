//! The named experiments. Each returns one table row per grid point with
//! Monte Carlo estimates, standard errors, and the matching closed forms.
//!
//! Every grid point of a run uses the same master seed; within a grid point
//! replicate `r` draws from its own counter-derived substreams.

use purf::partition::crossing_probability_total;
use purf::rng::Purpose;
use purf::{
    bounds, catalog_model, conditional_variance_eq9, count_m12, estimate_decomposition, estimate_forest_decomposition,
    estimate_tree_covariance, expected_m12, expected_n12, minimax_k, monte_carlo_conditional_variance, rate_fit,
    Estimate, Integrator, MasterSeed, RegressionModel, Result, RiskReport, UniformPartition,
};
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::output::{Cell, Table};

/// Largest `k` for which the m12 table includes the O(k⁴) crossing sum.
const CROSSING_SUM_MAX_K: usize = 200;

const EQ9_TAG: u64 = 0xE9;

pub struct Outcome {
    pub table: Table,
    /// Columns shown in the printed summary.
    pub summary_columns: Vec<&'static str>,
    /// Violations of non-asymptotic bounds (bias above `6MC²/(k+1)²`).
    pub hard_bound_failures: Vec<String>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.experiment {
        Experiment::TreeDecomposition | Experiment::ForestDecomposition => decomposition(cfg),
        Experiment::CovarianceRatio => covariance_ratio(cfg),
        Experiment::M12 => m12(cfg),
        Experiment::Rate => rate(cfg),
        Experiment::Eq9Check => eq9_check(cfg),
    }
}

fn build_model(cfg: &ExperimentConfig) -> Result<RegressionModel> {
    catalog_model(&cfg.model)?
        .with_noise_kind(cfg.noise)
        .with_noise_sd(cfg.sigma)
}

fn est(e: &Estimate) -> [Cell; 2] {
    [e.value.into(), e.se.into()]
}

fn check_bias(report: &RiskReport, bound: f64, label: &str, failures: &mut Vec<String>) -> bool {
    let ok = report.bias_term.value <= bound;
    if !ok {
        let c = &report.config;
        failures.push(format!(
            "{label} bias {} exceeds the bound {bound} at n={}, k={}, q={}",
            report.bias_term.value, c.n, c.k, c.q
        ));
    }
    ok
}

fn decomposition(cfg: &ExperimentConfig) -> Result<Outcome> {
    let model = build_model(cfg)?;
    let quad = Integrator::default();
    let seed = MasterSeed(cfg.seed);
    let qs = if cfg.experiment == Experiment::TreeDecomposition {
        vec![1]
    } else {
        cfg.q.clone()
    };
    let mut table = Table::new(vec![
        "model",
        "sigma",
        "n",
        "k",
        "q",
        "replicates",
        "risk",
        "risk_se",
        "variance",
        "variance_se",
        "bias",
        "bias_se",
        "gap",
        "gap_se",
        "theory_tree_variance",
        "theory_forest_variance",
        "variance_ratio",
        "bias_bound",
        "tree_risk_bound",
        "forest_risk_bound",
        "bias_within_bound",
    ]);
    let mut failures = Vec::new();
    for &n in &cfg.n {
        for &k in &cfg.k {
            for &q in &qs {
                let r = estimate_forest_decomposition(&model, n, k, q, cfg.replicates, seed, &quad)?;
                let b = bounds(&model, n, k);
                let ok = check_bias(&r, b.bias_bound, cfg.experiment.name(), &mut failures);
                let gap = r.decomposition_gap();
                let mut row: Vec<Cell> = vec![
                    cfg.model.as_str().into(),
                    cfg.sigma.into(),
                    n.into(),
                    k.into(),
                    q.into(),
                    cfg.replicates.into(),
                ];
                row.extend(est(&r.risk));
                row.extend(est(&r.variance_term));
                row.extend(est(&r.bias_term));
                row.extend(est(&gap));
                row.extend([
                    b.tree_variance_leading.into(),
                    b.forest_variance_leading.into(),
                    (r.variance_term.value / b.tree_variance_leading).into(),
                    b.bias_bound.into(),
                    b.tree_risk_bound.into(),
                    b.forest_risk_bound.into(),
                    ok.into(),
                ]);
                table.push(row);
            }
        }
    }
    Ok(Outcome {
        table,
        summary_columns: vec![
            "n",
            "k",
            "q",
            "risk",
            "variance",
            "variance_se",
            "theory_tree_variance",
            "variance_ratio",
            "bias",
            "bias_bound",
        ],
        hard_bound_failures: failures,
    })
}

fn covariance_ratio(cfg: &ExperimentConfig) -> Result<Outcome> {
    let model = build_model(cfg)?;
    let quad = Integrator::default();
    let mut table = Table::new(vec![
        "model",
        "sigma",
        "n",
        "k",
        "replicates",
        "covariance",
        "covariance_se",
        "tree_variance",
        "tree_variance_se",
        "ratio",
        "ratio_se",
        "theory_tree_variance",
        "theory_covariance_bound",
        "expected_n12_ratio",
    ]);
    for &n in &cfg.n {
        for &k in &cfg.k {
            let c = estimate_tree_covariance(&model, n, k, cfg.replicates, MasterSeed(cfg.seed), &quad)?;
            let b = bounds(&model, n, k);
            let mut row: Vec<Cell> = vec![
                cfg.model.as_str().into(),
                cfg.sigma.into(),
                n.into(),
                k.into(),
                cfg.replicates.into(),
            ];
            row.extend(est(&c.covariance));
            row.extend(est(&c.tree_variance));
            row.extend([
                c.ratio.into(),
                c.ratio_se.into(),
                b.tree_variance_leading.into(),
                b.forest_variance_leading.into(),
                (expected_n12(k as u64) / (k + 1) as f64).into(),
            ]);
            table.push(row);
        }
    }
    Ok(Outcome {
        table,
        summary_columns: vec![
            "n",
            "k",
            "covariance",
            "tree_variance",
            "ratio",
            "ratio_se",
            "expected_n12_ratio",
        ],
        hard_bound_failures: Vec::new(),
    })
}

/// `M₁,₂` of `pairs` independent partition pairs with `k` cuts; pair `i`
/// draws both partitions from substream `(i, Pair, k)`.
pub fn m12_counts(k: usize, pairs: usize, seed: MasterSeed) -> Result<Vec<f64>> {
    (0..pairs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.substream(i, Purpose::Pair, k as u64);
            let p1 = UniformPartition::sample(k, &mut rng);
            let p2 = UniformPartition::sample(k, &mut rng);
            Ok(count_m12(&p1, &p2)? as f64)
        })
        .collect()
}

fn m12(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut table = Table::new(vec![
        "k",
        "pairs",
        "mc_mean",
        "mc_se",
        "closed_form",
        "crossing_sum",
        "z",
        "mc_ratio",
        "closed_ratio",
        "expected_n12",
    ]);
    for &k in &cfg.k {
        let counts = m12_counts(k, cfg.replicates, MasterSeed(cfg.seed))?;
        let e = Estimate::from_replicates(&counts);
        let closed = expected_m12(k as u64);
        let crossing = if k <= CROSSING_SUM_MAX_K {
            crossing_probability_total(k)
        } else {
            f64::NAN
        };
        let cells = (k + 1) as f64;
        table.push(vec![
            k.into(),
            cfg.replicates.into(),
            e.value.into(),
            e.se.into(),
            closed.into(),
            crossing.into(),
            e.z_score(closed).into(),
            (e.value / cells).into(),
            (closed / cells).into(),
            expected_n12(k as u64).into(),
        ]);
    }
    Ok(Outcome {
        table,
        summary_columns: vec!["k", "pairs", "mc_mean", "mc_se", "closed_form", "crossing_sum", "z"],
        hard_bound_failures: Vec::new(),
    })
}

fn rate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let model = build_model(cfg)?;
    let quad = Integrator::default();
    let seed = MasterSeed(cfg.seed);
    let mut table = Table::new(vec![
        "model",
        "sigma",
        "n",
        "k",
        "q",
        "replicates",
        "tree_risk",
        "tree_risk_se",
        "forest_risk",
        "forest_risk_se",
        "tree_bias",
        "forest_bias",
        "bias_bound",
        "tree_risk_bound",
        "forest_risk_bound",
        "tree_slope",
        "forest_slope",
        "theory_slope",
    ]);
    let mut failures = Vec::new();
    let trees: Vec<RiskReport> = cfg
        .n
        .iter()
        .map(|&n| estimate_decomposition(&model, n, minimax_k(n), cfg.replicates, seed, &quad))
        .collect::<Result<_>>()?;
    let slope = |reports: &[RiskReport]| {
        let pts: Vec<(f64, f64)> = reports.iter().map(|r| (r.config.n as f64, r.risk.value)).collect();
        rate_fit(&pts).map(|(s, _)| s).unwrap_or(f64::NAN)
    };
    let tree_slope = slope(&trees);
    for &q in &cfg.q {
        let forests: Vec<RiskReport> = cfg
            .n
            .iter()
            .map(|&n| estimate_forest_decomposition(&model, n, minimax_k(n), q, cfg.replicates, seed, &quad))
            .collect::<Result<_>>()?;
        let forest_slope = slope(&forests);
        for (tree, forest) in trees.iter().zip(&forests) {
            let (n, k) = (tree.config.n, tree.config.k);
            let b = bounds(&model, n, k);
            check_bias(tree, b.bias_bound, "tree", &mut failures);
            check_bias(forest, b.bias_bound, "forest", &mut failures);
            let mut row: Vec<Cell> = vec![
                cfg.model.as_str().into(),
                cfg.sigma.into(),
                n.into(),
                k.into(),
                q.into(),
                cfg.replicates.into(),
            ];
            row.extend(est(&tree.risk));
            row.extend(est(&forest.risk));
            row.extend([
                tree.bias_term.value.into(),
                forest.bias_term.value.into(),
                b.bias_bound.into(),
                b.tree_risk_bound.into(),
                b.forest_risk_bound.into(),
                tree_slope.into(),
                forest_slope.into(),
                b.rate_exponent.into(),
            ]);
            table.push(row);
        }
    }
    failures.dedup();
    Ok(Outcome {
        table,
        summary_columns: vec![
            "n",
            "k",
            "q",
            "tree_risk",
            "forest_risk",
            "tree_slope",
            "forest_slope",
            "theory_slope",
        ],
        hard_bound_failures: failures,
    })
}

/// Partition `index` of the eq9-check grid point `(n, k)`.
pub fn eq9_partition(seed: MasterSeed, n: usize, k: usize, index: usize) -> UniformPartition {
    let mut rng = seed.stream(&[EQ9_TAG, Purpose::Partition as u64, n as u64, k as u64, index as u64]);
    UniformPartition::sample(k, &mut rng)
}

/// Master seed of the fixed-partition Monte Carlo for partition `index`.
pub fn eq9_mc_seed(seed: MasterSeed, n: usize, k: usize, index: usize) -> MasterSeed {
    seed.derive(&[EQ9_TAG, Purpose::Sample as u64, n as u64, k as u64, index as u64])
}

fn eq9_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let model = build_model(cfg)?;
    let quad = Integrator::default();
    let seed = MasterSeed(cfg.seed);
    let mut table = Table::new(vec![
        "model",
        "sigma",
        "n",
        "k",
        "partition",
        "samples",
        "eq9",
        "empty_cells",
        "exact",
        "mc_mean",
        "mc_se",
        "z_exact",
        "z_eq9",
    ]);
    for &n in &cfg.n {
        for &k in &cfg.k {
            for i in 0..cfg.partitions {
                let p = eq9_partition(seed, n, k, i);
                let cv = conditional_variance_eq9(&model, &p, n, &quad)?;
                let mc =
                    monte_carlo_conditional_variance(&model, &p, n, cfg.replicates, eq9_mc_seed(seed, n, k, i), &quad)?;
                table.push(vec![
                    cfg.model.as_str().into(),
                    cfg.sigma.into(),
                    n.into(),
                    k.into(),
                    i.into(),
                    cfg.replicates.into(),
                    cv.eq9.into(),
                    cv.empty_cells.into(),
                    cv.total.into(),
                    mc.value.into(),
                    mc.se.into(),
                    mc.z_score(cv.total).into(),
                    mc.z_score(cv.eq9).into(),
                ]);
            }
        }
    }
    Ok(Outcome {
        table,
        summary_columns: vec!["n", "k", "partition", "eq9", "exact", "mc_mean", "mc_se", "z_exact"],
        hard_bound_failures: Vec::new(),
    })
}
