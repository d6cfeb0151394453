//! Generalized Gaussian distribution: density, exact sampling and
//! moment-ratio shape estimation.
//!
//! The density is `A · exp(-|β (x - μ)|^c)` with
//! `β = sqrt(Γ(3/c) / Γ(1/c)) / σ` and `A = β c / (2 Γ(1/c))`, so `σ` is the
//! standard deviation for every shape `c`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::special::ln_gamma;

/// Shape, scale and location of a generalized Gaussian distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GgdParams {
    c: f64,
    sigma: f64,
    mu: f64,
}

impl GgdParams {
    pub fn new(c: f64, sigma: f64, mu: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("shape c must be positive, got {c}")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu must be finite, got {mu}")));
        }
        Ok(Self { c, sigma, mu })
    }

    /// Zero-mean, unit-variance distribution with shape `c`.
    pub fn standard(c: f64) -> Result<Self> {
        Self::new(c, 1.0, 0.0)
    }

    pub fn shape(&self) -> f64 {
        self.c
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn ln_beta(&self) -> f64 {
        let c = self.c;
        // c > 0 is guaranteed by construction, so the arguments are positive.
        let lg3 = ln_gamma(3.0 / c).expect("positive argument");
        let lg1 = ln_gamma(1.0 / c).expect("positive argument");
        0.5 * (lg3 - lg1) - self.sigma.ln()
    }

    pub fn beta(&self) -> f64 {
        self.ln_beta().exp()
    }

    /// The normalizing constant `A`.
    pub fn normalizer(&self) -> f64 {
        let lg1 = ln_gamma(1.0 / self.c).expect("positive argument");
        (self.ln_beta() + (self.c / 2.0).ln() - lg1).exp()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let z = (self.beta() * (x - self.mu)).abs();
        self.normalizer() * (-z.powf(self.c)).exp()
    }

    /// `count` i.i.d. draws, deterministic in `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        self.sample_with(&mut rng, count)
    }

    /// Draws from a caller-supplied generator.
    ///
    /// Uses `|X - μ| = G^{1/c} / β` with `G ~ Gamma(1/c, 1)` and a fair sign.
    /// `G` is produced in log space so tiny shapes cannot underflow.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        let shape = 1.0 / self.c;
        let ln_beta = self.ln_beta();
        (0..count)
            .map(|_| {
                let ln_g = ln_gamma_variate(rng, shape);
                let magnitude = (ln_g / self.c - ln_beta).exp();
                if rng.random::<bool>() {
                    self.mu + magnitude
                } else {
                    self.mu - magnitude
                }
            })
            .collect()
    }
}

/// Logarithm of a Gamma(shape, 1) variate (Marsaglia–Tsang squeeze, with the
/// `U^{1/a}` boost for shape below one).
pub fn ln_gamma_variate<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    if shape < 1.0 {
        let boosted = ln_gamma_variate(rng, shape + 1.0);
        let u = open_unit(rng);
        return boosted + u.ln() / shape;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = open_unit(rng);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return (d * v).ln();
        }
    }
}

/// Uniform on (0, 1].
#[inline]
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Outcome of moment-ratio shape estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeFit {
    pub params: GgdParams,
    /// Set when the observed ratio fell outside the attainable range and the
    /// shape was pinned to a bracket boundary.
    pub clamped: bool,
}

pub const SHAPE_BRACKET: (f64, f64) = (0.1, 20.0);
const SHAPE_TOL: f64 = 1e-6;
const MIN_FIT_SAMPLES: usize = 10;

/// `Γ(2/c)² / (Γ(1/c) Γ(3/c))`, increasing in `c`.
pub fn moment_ratio(c: f64) -> f64 {
    let lg = |x: f64| ln_gamma(x).expect("positive argument");
    (2.0 * lg(2.0 / c) - lg(1.0 / c) - lg(3.0 / c)).exp()
}

/// Estimates `(c, σ, μ)` by matching `(E|x-μ|)² / E(x-μ)²` to [`moment_ratio`].
pub fn fit_shape(samples: &[f64]) -> Result<ShapeFit> {
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if samples.is_empty() {
        return Err(Error::Empty("shape fit needs samples"));
    }
    let n = samples.len() as f64;
    let mu = samples.iter().sum::<f64>() / n;
    let second = samples.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / n;
    if !(second > 0.0) || second.sqrt() <= 1e-300 {
        return Err(Error::DegenerateSample("zero variance".into()));
    }
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::DegenerateSample(format!(
            "need at least {MIN_FIT_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let first = samples.iter().map(|x| (x - mu).abs()).sum::<f64>() / n;
    let target = first * first / second;
    let sigma = second.sqrt();

    let (mut lo, mut hi) = SHAPE_BRACKET;
    let (c, clamped) = if target <= moment_ratio(lo) {
        (lo, true)
    } else if target >= moment_ratio(hi) {
        (hi, true)
    } else {
        while hi - lo > SHAPE_TOL {
            let mid = 0.5 * (lo + hi);
            if moment_ratio(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi), false)
    };
    Ok(ShapeFit { params: GgdParams::new(c, sigma, mu)?, clamped })
}
