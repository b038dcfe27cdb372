//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use purf::partition::crossing_probability_total;
use purf::{
    bounds, catalog_model, conditional_variance_eq9, estimate_decomposition, estimate_forest_decomposition,
    estimate_tree_covariance, expected_m12, expected_n12, minimax_k, monte_carlo_conditional_variance, rate_fit,
    Estimate, Integrator, MasterSeed, RiskReport,
};
use purf_lab::experiments::{eq9_mc_seed, eq9_partition, m12_counts};

const SEED: MasterSeed = MasterSeed(20_260_101);
const Z: f64 = 3.0;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    details: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict {
            pass: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.pass &= ok;
        self.details.push(format!("{}{detail}", if ok { "" } else { "!! " }));
    }
}

fn paired_difference(a: &[f64], b: &[f64]) -> Estimate {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    Estimate::from_replicates(&d)
}

fn lemma3_exactness() -> Verdict {
    let mut v = Verdict::new();
    for k in [3usize, 4, 10, 50, 100] {
        let counts = m12_counts(k, 100_000, SEED).unwrap();
        let e = Estimate::from_replicates(&counts);
        let z = e.z_score(expected_m12(k as u64));
        v.check(
            z.abs() <= Z,
            format!(
                "k={k}: mc {:.5} ± {:.5} vs {:.5} (z {z:+.2})",
                e.value,
                e.se,
                expected_m12(k as u64)
            ),
        );
    }
    for k in [4usize, 10, 20] {
        let diff = (crossing_probability_total(k) - expected_m12(k as u64)).abs();
        v.check(
            diff <= 1e-9,
            format!("k={k}: |crossing sum - closed form| = {diff:.2e}"),
        );
    }
    v
}

fn asymptotic_quarter() -> Verdict {
    let mut v = Verdict::new();
    let k = 10_000u64;
    let ratio = expected_m12(k) / (k + 1) as f64;
    v.check(
        (0.249..=0.251).contains(&ratio),
        format!("E[M12]/(k+1) at k=1e4 = {ratio:.6}"),
    );
    v
}

fn bias_bound() -> Verdict {
    let mut v = Verdict::new();
    let quad = Integrator::default();
    for name in ["linear-uniform", "sine-uniform"] {
        let model = catalog_model(name).unwrap().with_noise_sd(0.0).unwrap();
        for k in [4usize, 9, 19, 49] {
            let r = estimate_decomposition(&model, 1000, k, 400, SEED, &quad).unwrap();
            let bound = bounds(&model, 1000, k).bias_bound;
            let bias = r.bias_term;
            v.check(
                bias.value <= bound,
                format!("{name} k={k}: bias {:.3e} <= bound {bound:.3e}", bias.value),
            );
            if name == "linear-uniform" {
                let exact = 1.0 / (2.0 * (k + 2) as f64 * (k + 3) as f64);
                let z = bias.z_score(exact);
                v.check(
                    z.abs() <= Z,
                    format!(
                        "{name} k={k}: bias {:.4e} ± {:.1e} vs exact {exact:.4e} (z {z:+.2})",
                        bias.value, bias.se
                    ),
                );
            }
        }
    }
    v
}

fn tree_variance() -> Verdict {
    let mut v = Verdict::new();
    let quad = Integrator::default();
    let model = catalog_model("linear-uniform").unwrap();
    for (n, k) in [(10_000usize, 20usize), (40_000, 33)] {
        let r = estimate_decomposition(&model, n, k, 400, SEED, &quad).unwrap();
        let ratio = r.variance_term.value / bounds(&model, n, k).tree_variance_leading;
        v.check(
            (0.85..=1.15).contains(&ratio),
            format!("n={n} k={k}: variance / (σ²(k+1)/n) = {ratio:.4}"),
        );
    }
    v
}

fn forest_variance_reduction() -> Verdict {
    let mut v = Verdict::new();
    let quad = Integrator::default();
    let model = catalog_model("linear-uniform").unwrap();
    let (n, k) = (20_000usize, 100usize);
    let c = estimate_tree_covariance(&model, n, k, 500, SEED, &quad).unwrap();
    let target = expected_n12(k as u64) / (k + 1) as f64;
    v.check(
        (0.70..=0.80).contains(&c.ratio),
        format!(
            "covariance / tree variance = {:.4} ± {:.4} (E[N12]/(k+1) = {target:.4})",
            c.ratio, c.ratio_se
        ),
    );
    let forest = estimate_forest_decomposition(&model, n, k, 200, 500, SEED, &quad).unwrap();
    let tree = estimate_decomposition(&model, n, k, 500, SEED, &quad).unwrap();
    let ratio = forest.variance_term.value / tree.variance_term.value;
    let d = paired_difference(&tree.samples.variance, &forest.samples.variance);
    v.check(ratio < 0.80, format!("forest/tree variance at q=200 = {ratio:.4}"));
    v.check(
        d.value > Z * d.se,
        format!(
            "tree - forest variance = {:.3e} ± {:.1e} ({:.1} SE)",
            d.value,
            d.se,
            d.value / d.se
        ),
    );
    v
}

fn forest_bias() -> Verdict {
    let mut v = Verdict::new();
    let quad = Integrator::default();
    for sigma in [0.0, 1.0] {
        let model = catalog_model("sine-uniform").unwrap().with_noise_sd(sigma).unwrap();
        let tree = estimate_decomposition(&model, 10_000, 50, 200, SEED, &quad).unwrap();
        let forest = estimate_forest_decomposition(&model, 10_000, 50, 100, 200, SEED, &quad).unwrap();
        let (t, f) = (tree.bias_term, forest.bias_term);
        let se = (t.se * t.se + f.se * f.se).sqrt();
        v.check(
            f.value <= t.value + Z * se,
            format!(
                "σ={sigma}: forest bias {:.4e} vs tree bias {:.4e} (combined SE {se:.1e})",
                f.value, t.value
            ),
        );
    }
    v
}

fn minimax_rate() -> Verdict {
    let mut v = Verdict::new();
    let quad = Integrator::default();
    let model = catalog_model("sine-uniform").unwrap();
    let grid = [512usize, 1448, 4096, 11585, 32768];
    let run = |q: usize| -> Vec<RiskReport> {
        grid.iter()
            .map(|&n| estimate_forest_decomposition(&model, n, minimax_k(n), q, 300, SEED, &quad).unwrap())
            .collect()
    };
    let (trees, forests) = (run(1), run(100));
    let slope = |rs: &[RiskReport]| {
        let pts: Vec<(f64, f64)> = rs.iter().map(|r| (r.config.n as f64, r.risk.value)).collect();
        rate_fit(&pts).unwrap().0
    };
    for (label, rs) in [("tree", &trees), ("forest", &forests)] {
        let s = slope(rs);
        v.check((-0.80..=-0.55).contains(&s), format!("{label} log-log slope = {s:.4}"));
    }
    for (t, f) in trees.iter().zip(&forests) {
        v.check(
            f.risk.value < t.risk.value,
            format!(
                "n={} k={}: forest risk {:.4e} < tree risk {:.4e}",
                t.config.n, t.config.k, f.risk.value, t.risk.value
            ),
        );
    }
    v
}

fn conditional_variance_oracle() -> Verdict {
    let mut v = Verdict::new();
    let quad = Integrator::default();
    let model = catalog_model("sine-uniform").unwrap();
    for (n, k, partitions) in [(100usize, 5usize, 10usize), (10_000, 50, 5)] {
        let mut worst: f64 = 0.0;
        let mut worst_eq9: f64 = 0.0;
        for i in 0..partitions {
            let p = eq9_partition(SEED, n, k, i);
            let cv = conditional_variance_eq9(&model, &p, n, &quad).unwrap();
            let mc =
                monte_carlo_conditional_variance(&model, &p, n, 100_000, eq9_mc_seed(SEED, n, k, i), &quad).unwrap();
            let z = mc.z_score(cv.total);
            worst = worst.max(z.abs());
            worst_eq9 = worst_eq9.max(mc.z_score(cv.eq9).abs());
            v.check(
                z.abs() <= Z,
                format!(
                    "n={n} k={k} partition {i}: exact {:.5e}, mc {:.5e} ± {:.1e} (z {z:+.2})",
                    cv.total, mc.value, mc.se
                ),
            );
        }
        v.details.push(format!(
            "n={n} k={k}: max |z| {worst:.2}; without the empty-cell term max |z| {worst_eq9:.2}"
        ));
    }
    v
}

fn determinism() -> Verdict {
    let mut v = Verdict::new();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("det.cfg");
    std::fs::write(
        &cfg,
        "model = sine-uniform\nsigma = 1\nn = 1000, 4000\nk = 9, 15\nq = 1, 25\nreplicates = 20\nseed = 11\n",
    )
    .unwrap();
    for (experiment, format) in [
        ("forest-decomposition", "csv"),
        ("covariance-ratio", "json"),
        ("m12", "csv"),
        ("eq9-check", "json"),
    ] {
        let outputs: Vec<Vec<u8>> = ["1", "2", "4", "1"]
            .iter()
            .map(|threads| {
                let out = Command::new(env!("CARGO_BIN_EXE_purf-lab"))
                    .args([
                        experiment,
                        "--config",
                        cfg.to_str().unwrap(),
                        "--format",
                        format,
                        "--threads",
                        threads,
                    ])
                    .output()
                    .unwrap();
                assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
                out.stdout
            })
            .collect();
        let same = outputs.windows(2).all(|w| w[0] == w[1]);
        v.check(
            same,
            format!("{experiment} ({format}) byte-identical over --threads 1, 2, 4 and a re-run"),
        );
    }
    v
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "count_m12 mean and crossing sum match the closed form",
            lemma3_exactness,
        ),
        ("E[M12]/(k+1) tends to 1/4", asymptotic_quarter),
        ("bias below 6MC²/(k+1)² and equal to the linear closed form", bias_bound),
        ("tree variance matches σ²(k+1)/n", tree_variance),
        ("forest variance reduction", forest_variance_reduction),
        ("forest bias does not exceed tree bias", forest_bias),
        ("risk decays at the n^(-2/3) rate", minimax_rate),
        (
            "conditional variance matches fixed-partition Monte Carlo",
            conditional_variance_oracle,
        ),
        ("output is deterministic across thread counts", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let status = if verdict.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} criterion {}: {name} ({:.1}s)",
            i + 1,
            start.elapsed().as_secs_f64()
        );
        for d in &verdict.details {
            println!("       {d}");
        }
        failed += usize::from(!verdict.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
