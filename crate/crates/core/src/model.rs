//! Regression models `Y = s(X) + ε` on the unit interval and learning-sample
//! generation.
//!
//! A model bundles the regression function `s`, the design law of `X` (with
//! density `μ` on [0, 1]), the noise law of `ε`, and the declared constants
//! used by the closed-form bounds: the Lipschitz constant `C` of `s` and the
//! density bounds `m ≤ μ ≤ M`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{PurfError, Result};
use crate::quadrature::Integrator;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Names accepted by [`catalog_model`].
pub const CATALOG: [&str; 4] = ["linear-uniform", "sine-uniform", "linear-tilted", "constant-uniform"];

const GRID_POINTS: usize = 10_000;

/// Law of the design variable `X` on [0, 1].
#[derive(Clone)]
pub enum DesignLaw {
    /// μ ≡ 1; sampled directly.
    Uniform,
    /// μ(x) = intercept + slope·x with intercept + slope/2 = 1; sampled by the
    /// exact inverse CDF.
    Affine { intercept: f64, slope: f64 },
    /// Arbitrary density, sampled by rejection from a Uniform(0, 1) proposal
    /// accepted with probability μ(x)/envelope. `envelope` must bound μ.
    /// The CDF is evaluated by quadrature.
    Rejection { density: RealFn, envelope: f64 },
}

impl fmt::Debug for DesignLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignLaw::Uniform => write!(f, "Uniform"),
            DesignLaw::Affine { intercept, slope } => {
                write!(f, "Affine {{ intercept: {intercept}, slope: {slope} }}")
            }
            DesignLaw::Rejection { envelope, .. } => write!(f, "Rejection {{ envelope: {envelope} }}"),
        }
    }
}

impl DesignLaw {
    pub fn density(&self, x: f64) -> f64 {
        match self {
            DesignLaw::Uniform => 1.0,
            DesignLaw::Affine { intercept, slope } => intercept + slope * x,
            DesignLaw::Rejection { density, .. } => density(x),
        }
    }

    /// P(X ≤ x) for x in [0, 1].
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            DesignLaw::Uniform => x,
            DesignLaw::Affine { intercept, slope } => x * (intercept + 0.5 * slope * x),
            DesignLaw::Rejection { density, .. } => Integrator::default()
                .integrate(0.0, x, 0, |t| density(t))
                .unwrap_or(f64::NAN),
        }
    }

    /// P(a < X ≤ b).
    pub fn prob(&self, a: f64, b: f64) -> f64 {
        match self {
            DesignLaw::Uniform => b - a,
            DesignLaw::Affine { intercept, slope } => (b - a) * (intercept + 0.5 * slope * (a + b)),
            DesignLaw::Rejection { density, .. } => Integrator::default()
                .integrate(a, b, 0, |t| density(t))
                .unwrap_or(f64::NAN),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DesignLaw::Uniform => rng.random::<f64>(),
            DesignLaw::Affine { intercept, slope } => {
                let u: f64 = rng.random();
                // root of slope/2·x² + intercept·x − u = 0, cancellation-free form
                2.0 * u / (intercept + (intercept * intercept + 2.0 * slope * u).sqrt())
            }
            DesignLaw::Rejection { density, envelope } => loop {
                let x: f64 = rng.random();
                let accept: f64 = rng.random::<f64>() * envelope;
                if accept < density(x) {
                    break x;
                }
            },
        }
    }

    /// (min, max) of the density: exact for the closed-form laws, over a
    /// 10⁴-point grid otherwise.
    fn bounds(&self) -> (f64, f64) {
        match self {
            DesignLaw::Uniform => (1.0, 1.0),
            DesignLaw::Affine { intercept, slope } => {
                let (a, b) = (*intercept, intercept + slope);
                (a.min(b), a.max(b))
            }
            DesignLaw::Rejection { .. } => grid_extrema(|x| self.density(x)),
        }
    }
}

fn grid_extrema<F: Fn(f64) -> f64>(f: F) -> (f64, f64) {
    unit_grid()
        .map(f)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn unit_grid() -> impl Iterator<Item = f64> {
    (0..GRID_POINTS).map(|i| i as f64 / (GRID_POINTS - 1) as f64)
}

/// Shape of the additive noise. Every shape is scaled to mean 0 and the
/// model's `noise_sd`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseKind {
    #[default]
    Gaussian,
    /// Uniform(−a, a) with a = √3·σ.
    Uniform,
}

impl NoiseKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "gaussian" => Some(NoiseKind::Gaussian),
            "uniform" => Some(NoiseKind::Uniform),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Uniform => "uniform",
        }
    }
}

/// The data-generating process. Immutable and cheap to clone.
#[derive(Clone)]
pub struct RegressionModel {
    name: String,
    regression_fn: RealFn,
    design: DesignLaw,
    noise: NoiseKind,
    noise_sd: f64,
    lipschitz_const: f64,
    density_max: f64,
    density_min: f64,
}

impl fmt::Debug for RegressionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegressionModel")
            .field("name", &self.name)
            .field("design", &self.design)
            .field("noise", &self.noise)
            .field("noise_sd", &self.noise_sd)
            .field("lipschitz_const", &self.lipschitz_const)
            .field("density_max", &self.density_max)
            .field("density_min", &self.density_min)
            .finish()
    }
}

impl RegressionModel {
    /// Builds and validates a model. Density bounds are derived from `design`.
    pub fn new(
        name: impl Into<String>,
        regression_fn: RealFn,
        design: DesignLaw,
        noise_sd: f64,
        lipschitz_const: f64,
    ) -> Result<Self> {
        let (density_min, density_max) = design.bounds();
        let model = RegressionModel {
            name: name.into(),
            regression_fn,
            design,
            noise: NoiseKind::Gaussian,
            noise_sd,
            lipschitz_const,
            density_max,
            density_min,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_noise_sd(mut self, sd: f64) -> Result<Self> {
        if !(sd >= 0.0 && sd.is_finite()) {
            return Err(PurfError::InvalidArgument(format!(
                "noise sd must be finite and >= 0, got {sd}"
            )));
        }
        self.noise_sd = sd;
        Ok(self)
    }

    pub fn with_noise_kind(mut self, kind: NoiseKind) -> Self {
        self.noise = kind;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// s(x)
    pub fn regression(&self, x: f64) -> f64 {
        (self.regression_fn)(x)
    }

    pub fn regression_fn(&self) -> &RealFn {
        &self.regression_fn
    }

    /// μ(x)
    pub fn density(&self, x: f64) -> f64 {
        self.design.density(x)
    }

    pub fn design(&self) -> &DesignLaw {
        &self.design
    }

    pub fn noise_kind(&self) -> NoiseKind {
        self.noise
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_sd * self.noise_sd
    }

    pub fn lipschitz_const(&self) -> f64 {
        self.lipschitz_const
    }

    pub fn density_max(&self) -> f64 {
        self.density_max
    }

    pub fn density_min(&self) -> f64 {
        self.density_min
    }

    /// Checks the declared constants: μ integrates to 1, m ≤ μ ≤ M on a grid,
    /// and s is C-Lipschitz between adjacent grid points.
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(PurfError::InvalidModel(format!(
                "noise sd {} must be finite and >= 0",
                self.noise_sd
            )));
        }
        if self.lipschitz_const.is_nan() || self.lipschitz_const <= 0.0 {
            return Err(PurfError::InvalidModel(format!(
                "Lipschitz constant {} must be positive",
                self.lipschitz_const
            )));
        }
        if self.density_min.is_nan() || self.density_min <= 0.0 {
            return Err(PurfError::InvalidModel(format!(
                "density minimum {} must be positive",
                self.density_min
            )));
        }
        if let DesignLaw::Rejection { envelope, .. } = &self.design {
            if *envelope < self.density_max {
                return Err(PurfError::InvalidModel(format!(
                    "rejection envelope {envelope} is below the density maximum {}",
                    self.density_max
                )));
            }
        }
        let mass = Integrator::default().integrate(0.0, 1.0, 0, |x| self.density(x))?;
        if (mass - 1.0).abs() > 1e-8 {
            return Err(PurfError::InvalidModel(format!(
                "design density integrates to {mass}, not 1"
            )));
        }
        let slack = 1e-12;
        for x in unit_grid() {
            let mu = self.density(x);
            if mu < self.density_min - slack || mu > self.density_max + slack {
                return Err(PurfError::InvalidModel(format!(
                    "density {mu} at x = {x} is outside [{}, {}]",
                    self.density_min, self.density_max
                )));
            }
        }
        let h = 1.0 / (GRID_POINTS - 1) as f64;
        let xs: Vec<f64> = unit_grid().collect();
        for w in xs.windows(2) {
            let rise = (self.regression(w[1]) - self.regression(w[0])).abs();
            if rise > self.lipschitz_const * h * (1.0 + 1e-9) + 1e-15 {
                return Err(PurfError::InvalidModel(format!(
                    "|s({}) - s({})| = {rise} exceeds C·|x - y| with C = {}",
                    w[1], w[0], self.lipschitz_const
                )));
            }
        }
        Ok(())
    }

    /// One noise draw.
    pub fn draw_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.noise {
            NoiseKind::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                self.noise_sd * z
            }
            NoiseKind::Uniform => {
                let half = self.noise_sd * 3f64.sqrt();
                half * (2.0 * rng.random::<f64>() - 1.0)
            }
        }
    }

    /// Draws `n` i.i.d. pairs. Each pair consumes the design draw, then the
    /// noise draw, from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<LearningSample> {
        if n == 0 {
            return Err(PurfError::InvalidArgument("sample size must be at least 1".into()));
        }
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let x = self.design.draw(rng);
            let y = self.regression(x) + self.draw_noise(rng);
            xs.push(x);
            ys.push(y);
        }
        Ok(LearningSample { xs, ys })
    }
}

/// Looks up a model from the fixed catalog. Every entry has σ = 1 with
/// Gaussian noise; adjust with [`RegressionModel::with_noise_sd`].
///
/// | name               | s(x)       | μ(x)           | C  | m   | M   |
/// |--------------------|------------|----------------|----|-----|-----|
/// | `linear-uniform`   | x          | 1              | 1  | 1   | 1   |
/// | `sine-uniform`     | sin(2πx)   | 1              | 2π | 1   | 1   |
/// | `linear-tilted`    | x          | (2/3)(1 + x)   | 1  | 2/3 | 4/3 |
/// | `constant-uniform` | 1          | 1              | 1  | 1   | 1   |
pub fn catalog_model(name: &str) -> Result<RegressionModel> {
    let (s, design, c): (RealFn, DesignLaw, f64) = match name {
        "linear-uniform" => (Arc::new(|x| x), DesignLaw::Uniform, 1.0),
        "sine-uniform" => (Arc::new(|x| (2.0 * PI * x).sin()), DesignLaw::Uniform, 2.0 * PI),
        "linear-tilted" => (
            Arc::new(|x| x),
            DesignLaw::Affine {
                intercept: 2.0 / 3.0,
                slope: 2.0 / 3.0,
            },
            1.0,
        ),
        "constant-uniform" => (Arc::new(|_| 1.0), DesignLaw::Uniform, 1.0),
        _ => {
            return Err(PurfError::UnknownModel {
                name: name.to_string(),
                valid: CATALOG.to_vec(),
            });
        }
    };
    RegressionModel::new(name, s, design, 1.0, c)
}

/// A learning set of `n` design points and responses.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl LearningSample {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(PurfError::InvalidArgument(format!(
                "xs has {} points but ys has {}",
                xs.len(),
                ys.len()
            )));
        }
        if let Some(&x) = xs.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(PurfError::OutOfUnitInterval {
                what: "design point",
                value: x,
            });
        }
        Ok(LearningSample { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}
