//! Kolmogorov–Smirnov tests and the Monte-Carlo check of the Rayleigh law for
//! the Benford-Fourier estimation error.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::benford::{estimate_bf_coefficient, exact_bf_coefficient};
use crate::error::{Error, Result};
use crate::ggd::GgdParams;
use crate::par;
use crate::rng::child_rng;

const SERIES_CUTOFF: f64 = 1e-12;

/// Outcome of a KS test. For one-sample tests `n_b` is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d_statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
}

fn sorted_finite(xs: &[f64], what: &'static str) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::Empty(what));
    }
    if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mut v = xs.to_vec();
    v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(v)
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2k²λ²)`.
///
/// Below λ = 1 the equivalent Jacobi-theta form
/// `1 - (√(2π)/λ) Σ_{k≥1} exp(-(2k-1)²π²/(8λ²))` is summed instead, since
/// the alternating series converges slowly there.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 1.0;
    }
    let q = if lambda < 1.0 {
        let mut s = 0.0;
        for k in 1..=100u32 {
            let odd = (2 * k - 1) as f64;
            let term = (-(odd * odd) * PI * PI / (8.0 * lambda * lambda)).exp();
            s += term;
            if term < SERIES_CUTOFF {
                break;
            }
        }
        1.0 - (2.0 * PI).sqrt() / lambda * s
    } else {
        let mut s = 0.0;
        for k in 1..=100u32 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            s += if k % 2 == 1 { term } else { -term };
            if term < SERIES_CUTOFF {
                break;
            }
        }
        2.0 * s
    };
    q.clamp(0.0, 1.0)
}

/// Asymptotic p-value with the Stephens correction for effective size `n_e`.
pub fn ks_p_value(d: f64, n_e: f64) -> f64 {
    let root = n_e.sqrt();
    kolmogorov_survival(d * (root + 0.12 + 0.11 / root))
}

/// Two-sample KS test: `D = sup_x |F_a(x) - F_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let a = sorted_finite(a, "first KS sample is empty")?;
    let b = sorted_finite(b, "second KS sample is empty")?;
    let (na, nb) = (a.len(), b.len());
    let d = ks_d_sorted(&a, &b);
    let n_e = (na * nb) as f64 / (na + nb) as f64;
    Ok(KsResult { d_statistic: d, p_value: ks_p_value(d, n_e), n_a: na, n_b: nb })
}

/// D statistic of two ascending samples.
fn ks_d_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < na && a[i] == x {
            i += 1;
        }
        while j < nb && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    d
}

/// One-sample KS test against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<KsResult> {
    let xs = sorted_finite(sample, "KS sample is empty")?;
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(KsResult { d_statistic: d, p_value: ks_p_value(d, n), n_a: xs.len(), n_b: 0 })
}

/// Average two-sample p-value of `sample` against `trials` independent sets
/// of `draws` points from `params`.
pub fn ks_one_sample_vs_ggd(
    sample: &[f64],
    params: &GgdParams,
    draws: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 || draws == 0 {
        return Err(Error::InvalidParameter("draws and trials must be positive".into()));
    }
    let sorted = sorted_finite(sample, "KS sample is empty")?;
    let p_values = par::map_range(trials, |t| {
        let mut rng = child_rng(seed, t as u64);
        let mut reference = params.sample_with(&mut rng, draws);
        reference.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        let d = ks_d_sorted(&sorted, &reference);
        let n_e = (sorted.len() * draws) as f64 / (sorted.len() + draws) as f64;
        ks_p_value(d, n_e)
    });
    Ok(p_values.iter().sum::<f64>() / trials as f64)
}

/// `E[t²] - E[t]²` of a complex sample.
pub fn pseudo_variance(values: &[Complex64]) -> Result<Complex64> {
    if values.is_empty() {
        return Err(Error::Empty("pseudo-variance needs values"));
    }
    let m = values.len() as f64;
    let mean = values.iter().sum::<Complex64>() / m;
    let mean_sq = values.iter().map(|t| t * t).sum::<Complex64>() / m;
    Ok(mean_sq - mean * mean)
}

/// Rayleigh CDF with scale `s`.
pub fn rayleigh_cdf(r: f64, s: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        -(-(r * r) / (2.0 * s * s)).exp_m1()
    }
}

/// Monte-Carlo summary of `|â_n - a_n|` against its Rayleigh model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayleighReport {
    pub c: f64,
    pub n: u32,
    pub m: usize,
    pub trials: usize,
    pub exact_magnitude: f64,
    pub empirical_mean_abs_error: f64,
    pub empirical_var_abs_error: f64,
    /// `½ √(π/M)`
    pub predicted_mean: f64,
    /// `(4 - π) / (4M)`
    pub predicted_var: f64,
    /// KS p-value of the errors against Rayleigh with `s² = 1/(2M)`.
    pub rayleigh_ks_p: f64,
    /// KS p-value against Rayleigh with `s² = (1 - |a_n|²)/(2M)`.
    pub rayleigh_ks_p_exact_scale: f64,
    /// `|E[ε²] - E[ε]²|` over the trials.
    pub pseudo_variance_magnitude: f64,
    /// The same, divided by the mean squared error magnitude.
    pub pseudo_variance_normalized: f64,
}

/// Draws `trials` sets of `M` points from GGD(c, σ = 1), estimates `a_n`
/// from each and compares the error law with the Rayleigh prediction.
pub fn verify_rayleigh(c: f64, n: u32, m: usize, trials: usize, seed: u64) -> Result<RayleighReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("harmonic index must be at least 1".into()));
    }
    if m < 100 {
        return Err(Error::InvalidParameter(format!("M must be at least 100, got {m}")));
    }
    if trials < 100 {
        return Err(Error::InvalidParameter(format!("trials must be at least 100, got {trials}")));
    }
    let params = GgdParams::standard(c)?;
    let exact = exact_bf_coefficient(&params, n)?;
    let errors = par::map_range(trials, |t| -> Result<Complex64> {
        let mut rng = child_rng(seed, t as u64);
        let xs = params.sample_with(&mut rng, m);
        Ok(estimate_bf_coefficient(&xs, n)?.value - exact.value)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let abs: Vec<f64> = errors.iter().map(|e| e.norm()).collect();
    let k = trials as f64;
    let mean = abs.iter().sum::<f64>() / k;
    let var = abs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let mf = m as f64;
    let s_approx = (1.0 / (2.0 * mf)).sqrt();
    let s_exact = ((1.0 - exact.magnitude().powi(2)) / (2.0 * mf)).sqrt();
    let pv = pseudo_variance(&errors)?.norm();
    let mean_sq = abs.iter().map(|a| a * a).sum::<f64>() / k;
    Ok(RayleighReport {
        c,
        n,
        m,
        trials,
        exact_magnitude: exact.magnitude(),
        empirical_mean_abs_error: mean,
        empirical_var_abs_error: var,
        predicted_mean: 0.5 * (PI / mf).sqrt(),
        predicted_var: (4.0 - PI) / (4.0 * mf),
        rayleigh_ks_p: ks_one_sample(&abs, |r| rayleigh_cdf(r, s_approx))?.p_value,
        rayleigh_ks_p_exact_scale: ks_one_sample(&abs, |r| rayleigh_cdf(r, s_exact))?.p_value,
        pseudo_variance_magnitude: pv,
        pseudo_variance_normalized: pv / mean_sq,
    })
}
