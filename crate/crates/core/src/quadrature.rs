//! Composite Gauss–Legendre quadrature with panel doubling.

use serde::Serialize;

use crate::error::{PurfError, Result};

/// Quadrature settings for every integral against the design density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSettings {
    /// Gauss–Legendre nodes per panel.
    pub nodes: usize,
    /// Stop when successive panel-doubling estimates differ by at most
    /// `rel_tol * ∫|f| + abs_tol`.
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of doublings (the finest level has `2^max_levels` panels).
    pub max_levels: u32,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            nodes: 16,
            rel_tol: 1e-10,
            abs_tol: 1e-18,
            max_levels: 12,
        }
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Single-panel rule on [a, b].
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Composite rule with `panels` equal panels on [a, b].
    pub fn integrate_composite<F: Fn(f64) -> f64>(&self, a: f64, b: f64, panels: usize, f: F) -> f64 {
        self.composite_with_magnitude(a, b, panels, f).0
    }

    /// Composite estimates of `∫f` and `∫|f|`.
    fn composite_with_magnitude<F: Fn(f64) -> f64>(&self, a: f64, b: f64, panels: usize, f: F) -> (f64, f64) {
        let h = (b - a) / panels as f64;
        let (mut signed, mut magnitude) = (0.0, 0.0);
        for p in 0..panels {
            let lo = a + h * p as f64;
            let hi = if p + 1 == panels { b } else { lo + h };
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (lo + hi);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                let v = w * f(mid + half * x) * half;
                signed += v;
                magnitude += v.abs();
            }
        }
        (signed, magnitude)
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates `f` over [a, b], doubling the panel count until two successive
/// estimates agree. `cell` only labels the error.
#[derive(Debug, Clone)]
pub struct Integrator {
    rule: GaussLegendre,
    settings: QuadratureSettings,
}

impl Integrator {
    pub fn new(settings: QuadratureSettings) -> Self {
        Integrator {
            rule: GaussLegendre::new(settings.nodes),
            settings,
        }
    }

    pub fn settings(&self) -> &QuadratureSettings {
        &self.settings
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, cell: usize, f: F) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let mut coarse = self.rule.integrate(a, b, &f);
        let mut panels = 1usize;
        for _ in 0..self.settings.max_levels {
            panels *= 2;
            let (fine, magnitude) = self.rule.composite_with_magnitude(a, b, panels, &f);
            if (fine - coarse).abs() <= self.settings.rel_tol * magnitude + self.settings.abs_tol {
                return Ok(fine);
            }
            coarse = fine;
        }
        Err(PurfError::QuadratureNonConvergence {
            cell,
            lo: a,
            hi: b,
            levels: self.settings.max_levels,
        })
    }
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::new(QuadratureSettings::default())
    }
}
