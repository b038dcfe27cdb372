use purf::{catalog_model, Estimate, MasterSeed, CATALOG};

#[test]
fn noise_mean_obeys_clt() {
    let m = catalog_model("linear-uniform").unwrap();
    let n = 100_000;
    let s = m.sample(n, &mut MasterSeed(21).stream(&[0])).unwrap();
    let resid: Vec<f64> = s.xs().iter().zip(s.ys()).map(|(x, y)| y - x).collect();
    let mean = resid.iter().sum::<f64>() / n as f64;
    assert!(mean.abs() < 3.0 / (n as f64).sqrt(), "{mean}");
    let sd = Estimate::from_replicates(&resid).se * (n as f64).sqrt();
    assert!((sd - 1.0).abs() < 0.01);
}

#[test]
fn design_ecdf_converges() {
    let n = 100_000;
    for name in CATALOG {
        let m = catalog_model(name).unwrap();
        let s = m.sample(n, &mut MasterSeed(22).stream(&[0])).unwrap();
        let mut xs = s.xs().to_vec();
        xs.sort_by(f64::total_cmp);
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = m.design().cdf(x);
                (f - i as f64 / n as f64)
                    .abs()
                    .max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "{name}: KS = {ks}");
    }
}

#[test]
fn tilted_design_is_not_uniform() {
    // guards the KS check above against a design sampler that ignores the law
    let m = catalog_model("linear-tilted").unwrap();
    let s = m.sample(50_000, &mut MasterSeed(23).stream(&[0])).unwrap();
    let below_half = s.xs().iter().filter(|&&x| x <= 0.5).count() as f64 / 50_000.0;
    // F(1/2) = (1/2)(2/3)(1 + 1/4) = 5/12
    assert!((below_half - 5.0 / 12.0).abs() < 0.01);
}
