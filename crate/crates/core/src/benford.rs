//! Benford-Fourier coefficients of the log-mantissa `log10|x| mod 1`.
//!
//! For a zero-mean generalized Gaussian `X` the n-th coefficient is
//! `a_n = E[exp(-j 2π n log10|X|)]`, available in closed form through the
//! complex Gamma function. Its magnitude depends on the shape `c` only and
//! also equals an infinite product, which [`exact_bf_magnitude`] evaluates
//! independently of the Gamma route. [`estimate_bf_coefficient`] is the
//! sample average used on network responses.

use std::f64::consts::{LN_10, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ggd::GgdParams;
use crate::par;
use crate::record::{ActivationRecord, MbfFeature};
use crate::special::{ln_gamma, ln_gamma_complex};

/// Entries with magnitude below this are treated as exact zeros and dropped.
pub const ZERO_THRESHOLD: f64 = 1e-12;
pub const DEFAULT_HARMONICS: usize = 16;

const TWO_PI: f64 = 2.0 * PI;

/// `log10|x| mod 1`, in `[0, 1)`.
pub fn log_mantissa(x: f64) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "log-mantissa needs a finite nonzero value, got {x}"
        )));
    }
    let l = x.abs().log10();
    let z = l - l.floor();
    Ok(if z >= 1.0 { 0.0 } else { z })
}

/// A complex Benford-Fourier coefficient `a_n = |a_n| e^{jφ_n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BfCoefficient {
    pub n: u32,
    pub value: Complex64,
}

impl BfCoefficient {
    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn im(&self) -> f64 {
        self.value.im
    }

    pub fn magnitude(&self) -> f64 {
        self.value.norm()
    }

    /// Phase in `(-π, π]`.
    pub fn phase(&self) -> f64 {
        self.value.arg()
    }

    /// Cosine-series coefficient `A_n = Re(a_n)`.
    pub fn cosine_coeff(&self) -> f64 {
        self.value.re
    }

    /// Sine-series coefficient `B_n = -Im(a_n)`.
    pub fn sine_coeff(&self) -> f64 {
        -self.value.im
    }
}

// Explicit product terms run until the ratio u_k drops below this; the rest
// of the log-product is summed analytically with Hurwitz zeta values.
const TAIL_SWITCH: f64 = 0.01;
const MIN_EXPLICIT_TERMS: usize = 16;

/// `|a_n|` from the infinite product
/// `Π_{k≥0} [1 + (2πn / (ln10 (ck + 1)))²]^{-1/2}`.
pub fn exact_bf_magnitude(c: f64, n: u32) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("shape c must be positive, got {c}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("harmonic index must be at least 1".into()));
    }
    let b = TWO_PI * n as f64 / LN_10;
    let mut log_sum = 0.0;
    let mut k = 0usize;
    loop {
        let u = b / (c * k as f64 + 1.0);
        if k >= MIN_EXPLICIT_TERMS && u < TAIL_SWITCH {
            break;
        }
        log_sum += u.mul_add(u, 0.0).ln_1p();
        k += 1;
    }
    // Σ_{k≥K} ln(1 + x²/(k+1/c)²) = Σ_m (-1)^{m+1}/m · x^{2m} ζ(2m, K + 1/c)
    let x = b / c;
    let q = k as f64 + 1.0 / c;
    let x2 = x * x;
    let mut power = 1.0;
    let mut tail = 0.0;
    for m in 1..=40u32 {
        power *= x2;
        let term = power * hurwitz_zeta(2.0 * m as f64, q) / m as f64;
        tail += if m % 2 == 1 { term } else { -term };
        if term < 1e-18 * tail.abs().max(1e-300) {
            break;
        }
    }
    Ok((-0.5 * (log_sum + tail)).exp())
}

/// Hurwitz zeta `ζ(s, q)` for `s > 1` and `q ≥ 16` by Euler–Maclaurin.
fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    debug_assert!(s > 1.0 && q >= 16.0);
    // B_{2j} / (2j)!
    const BERNOULLI_OVER_FACT: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
    ];
    let q_pow = q.powf(-s);
    let mut sum = q * q_pow / (s - 1.0) + 0.5 * q_pow;
    // B_{2j}/(2j)! · s(s+1)…(s+2j-2) · q^{-s-2j+1}
    let mut rising = s;
    let mut qp = q_pow / q;
    for (j, &coef) in BERNOULLI_OVER_FACT.iter().enumerate() {
        if j > 0 {
            let k = 2.0 * j as f64;
            rising *= (s + k - 1.0) * (s + k);
            qp /= q * q;
        }
        sum += coef * rising * qp;
    }
    sum
}

/// `a_n` of a zero-mean generalized Gaussian via the complex Gamma function:
/// `a_n = e^{j 2πn ln β / ln10} Γ((ln10 - j2πn) / (c ln10)) / Γ(1/c)`.
///
/// The location parameter is ignored (responses are centred before use).
pub fn exact_bf_coefficient(params: &GgdParams, n: u32) -> Result<BfCoefficient> {
    if n == 0 {
        return Err(Error::InvalidParameter("harmonic index must be at least 1".into()));
    }
    let c = params.shape();
    let omega = TWO_PI * n as f64 / LN_10;
    let arg = Complex64::new(1.0 / c, -omega / c);
    let ln_a = ln_gamma_complex(arg)? - ln_gamma(1.0 / c)?
        + Complex64::new(0.0, omega * params.ln_beta());
    Ok(BfCoefficient { n, value: ln_a.exp() })
}

/// Sample estimate `(1/M) Σ exp(-j 2πn log10|x_m|)` over the entries whose
/// magnitude is at least [`ZERO_THRESHOLD`].
pub fn estimate_bf_coefficient(samples: &[f64], n: u32) -> Result<BfCoefficient> {
    let mantissas = retained_mantissas(samples);
    if mantissas.is_empty() {
        return Err(Error::DegenerateResponse);
    }
    Ok(BfCoefficient { n, value: mean_phasor(&mantissas, n) })
}

fn retained_mantissas(samples: &[f64]) -> Vec<f64> {
    samples
        .iter()
        .filter(|x| x.is_finite() && x.abs() >= ZERO_THRESHOLD)
        .map(|&x| {
            let l = x.abs().log10();
            let z = l - l.floor();
            if z >= 1.0 {
                0.0
            } else {
                z
            }
        })
        .collect()
}

fn mean_phasor(mantissas: &[f64], n: u32) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    let w = TWO_PI * n as f64;
    for &z in mantissas {
        let (s, c) = (w * z).sin_cos();
        re += c;
        im -= s;
    }
    let m = mantissas.len() as f64;
    Complex64::new(re / m, im / m)
}

/// Feature extraction settings: harmonics per layer (`T`) and whether each
/// layer is centred on its own mean first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub harmonics: usize,
    pub mean_subtract: bool,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self { harmonics: DEFAULT_HARMONICS, mean_subtract: true }
    }
}

/// Layer-major vector of `|â_n|`, `n = 1..=T`, for every layer of `record`.
///
/// A layer left with fewer than two usable entries yields zeros and is listed
/// in [`MbfFeature::degenerate_layers`].
pub fn extract_mbf_features(record: &ActivationRecord, cfg: &ExtractionConfig) -> Result<MbfFeature> {
    if cfg.harmonics == 0 {
        return Err(Error::InvalidParameter("harmonic count T must be at least 1".into()));
    }
    record.validate()?;
    let t = cfg.harmonics;
    let mut values = Vec::with_capacity(t * record.layers.len());
    let mut degenerate_layers = Vec::new();
    for (l, layer) in record.layers.iter().enumerate() {
        let mantissas = if cfg.mean_subtract {
            let mean = layer.iter().sum::<f64>() / layer.len() as f64;
            let centred: Vec<f64> = layer.iter().map(|x| x - mean).collect();
            retained_mantissas(&centred)
        } else {
            retained_mantissas(layer)
        };
        if mantissas.len() < 2 {
            degenerate_layers.push(l);
            values.extend(std::iter::repeat_n(0.0, t));
            continue;
        }
        values.extend((1..=t as u32).map(|n| mean_phasor(&mantissas, n).norm()));
    }
    Ok(MbfFeature {
        sample_id: record.sample_id,
        group: record.group,
        attack: record.attack,
        values,
        degenerate_layers,
    })
}

/// [`extract_mbf_features`] over a batch, fanned out per record.
pub fn extract_batch(records: &[ActivationRecord], cfg: &ExtractionConfig) -> Result<Vec<MbfFeature>> {
    par::map_slice(records, |r| extract_mbf_features(r, cfg)).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::{AttackId, Group};
    use approx::assert_relative_eq;

    // |Γ(1/c - j2πn/(c ln10))| / Γ(1/c), evaluated with 30-digit arithmetic.
    #[allow(clippy::excessive_precision)]
    const HIGH_PRECISION: [(f64, u32, f64); 8] = [
        (0.5, 1, 0.006_147_612_066_595_280_5),
        (0.5, 2, 3.249_749_648_150_523_8e-6),
        (1.0, 1, 0.056_957_274_164_890_691),
        (1.0, 4, 2.964_904_300_267_079_1e-7),
        (2.0, 1, 0.165_848_862_373_445_63),
        (2.0, 8, 5.063_183_392_269_227_4e-8),
        (4.0, 1, 0.266_042_445_902_835_85),
        (4.0, 16, 1.361_883_610_090_007_3e-8),
    ];

    #[test]
    fn log_mantissa_values() {
        assert_eq!(log_mantissa(1.0).unwrap(), 0.0);
        assert_relative_eq!(log_mantissa(200.0).unwrap(), std::f64::consts::LOG10_2, epsilon = 1e-12);
        assert_relative_eq!(log_mantissa(0.02).unwrap(), std::f64::consts::LOG10_2, epsilon = 1e-12);
        assert_relative_eq!(log_mantissa(-200.0).unwrap(), std::f64::consts::LOG10_2, epsilon = 1e-12);
        assert!(log_mantissa(0.0).is_err());
    }

    #[test]
    fn magnitude_matches_high_precision_values() {
        for &(c, n, expect) in &HIGH_PRECISION {
            let got = exact_bf_magnitude(c, n).unwrap();
            assert_relative_eq!(got, expect, max_relative = 1e-11);
        }
    }

    #[test]
    fn magnitude_decreases_with_n() {
        for &c in &[0.5, 1.0, 2.0, 4.0, 10.0] {
            let mut prev = 1.0;
            for n in 1..=16 {
                let m = exact_bf_magnitude(c, n).unwrap();
                assert!(m > 0.0 && m < prev, "c = {c}, n = {n}");
                prev = m;
            }
        }
    }

    #[test]
    fn hurwitz_zeta_against_direct_sum() {
        for &(s, q) in &[(2.0, 16.5), (4.0, 20.0), (6.0, 100.25)] {
            let direct: f64 = (0..2_000_000).map(|k| (q + k as f64).powf(-s)).sum::<f64>()
                + (q + 2e6).powf(1.0 - s) / (s - 1.0);
            assert_relative_eq!(hurwitz_zeta(s, q), direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn coefficient_magnitude_ignores_sigma() {
        let a = exact_bf_coefficient(&GgdParams::new(2.0, 1.0, 0.0).unwrap(), 1).unwrap();
        let b = exact_bf_coefficient(&GgdParams::new(2.0, 3.0, 0.0).unwrap(), 1).unwrap();
        assert_relative_eq!(a.magnitude(), b.magnitude(), max_relative = 1e-12);
        assert!((a.phase() - b.phase()).abs() > 1e-3);
        // A decade scale turns the phase by exactly 2πn.
        let d = exact_bf_coefficient(&GgdParams::new(2.0, 10.0, 0.0).unwrap(), 1).unwrap();
        assert!((a.value - d.value).norm() < 1e-12);
        let a8 = exact_bf_coefficient(&GgdParams::new(2.0, 1.0, 0.0).unwrap(), 8).unwrap();
        assert!(a8.magnitude() < a.magnitude());
    }

    #[test]
    fn coefficient_sign_convention() {
        let a = exact_bf_coefficient(&GgdParams::new(1.3, 0.7, 0.0).unwrap(), 2).unwrap();
        assert_relative_eq!(a.magnitude(), a.cosine_coeff().hypot(a.sine_coeff()), max_relative = 1e-14);
        assert_relative_eq!(a.phase().tan(), -a.sine_coeff() / a.cosine_coeff(), max_relative = 1e-9);
    }

    #[test]
    fn estimator_trivial_cases() {
        let xs = [0.3, -2.0, 7.1, 0.0];
        let a0 = estimate_bf_coefficient(&xs, 0).unwrap();
        assert_eq!(a0.value, Complex64::new(1.0, 0.0));
        let ones = [1.0, -1.0, 10.0, 0.01];
        let a3 = estimate_bf_coefficient(&ones, 3).unwrap();
        assert_relative_eq!(a3.re(), 1.0, epsilon = 1e-12);
        assert!(a3.im().abs() < 1e-12);
        assert_eq!(estimate_bf_coefficient(&[0.0, 1e-13], 1), Err(Error::DegenerateResponse));
        let scaled: Vec<f64> = xs.iter().map(|x| x * 10.0).collect();
        let (a, b) = (estimate_bf_coefficient(&xs, 1).unwrap(), estimate_bf_coefficient(&scaled, 1).unwrap());
        assert!((a.value - b.value).norm() < 1e-12);
    }

    #[test]
    fn extraction_shapes_and_trivial_values() {
        let rec = ActivationRecord::new(1, Group::Clean, AttackId::None, 0, vec![vec![1.0, 10.0, 100.0]]).unwrap();
        let cfg = ExtractionConfig { harmonics: 4, mean_subtract: false };
        let f = extract_mbf_features(&rec, &cfg).unwrap();
        assert_eq!(f.values.len(), 4);
        for v in &f.values {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-12);
        }
        let rec = ActivationRecord::new(2, Group::Adversarial, AttackId::Bim, 3, vec![vec![0.5; 7], vec![1.5, 2.0], vec![3.0; 4]]).unwrap();
        let f = extract_mbf_features(&rec, &ExtractionConfig::default()).unwrap();
        assert_eq!(f.values.len(), 48);
        assert_eq!(f.label(), 1.0);
    }

    #[test]
    fn degenerate_layer_zeroed_and_flagged() {
        // With centring, a constant layer has no usable entries.
        let rec = ActivationRecord::new(3, Group::Noisy, AttackId::None, 0, vec![vec![2.0; 5], vec![0.1, 0.7, 3.0]]).unwrap();
        let f = extract_mbf_features(&rec, &ExtractionConfig { harmonics: 3, mean_subtract: true }).unwrap();
        assert_eq!(f.degenerate_layers, vec![0]);
        assert_eq!(&f.values[..3], &[0.0; 3]);
        assert!(f.values[3..].iter().all(|v| *v > 0.0));
        assert!(extract_mbf_features(&rec, &ExtractionConfig { harmonics: 0, mean_subtract: true }).is_err());
    }

    #[test]
    fn extraction_concentrates_on_exact_magnitudes() {
        let xs = GgdParams::standard(2.0).unwrap().sample(100_000, 21);
        let rec = ActivationRecord::new(0, Group::Clean, AttackId::None, 0, vec![xs]).unwrap();
        let f = extract_mbf_features(&rec, &ExtractionConfig { harmonics: 16, mean_subtract: false }).unwrap();
        let bound = 3.0 * 0.5 * (PI / 1e5).sqrt();
        for (i, v) in f.values.iter().enumerate() {
            let exact = exact_bf_magnitude(2.0, i as u32 + 1).unwrap();
            assert!((v - exact).abs() < bound, "n = {}: {v} vs {exact}", i + 1);
        }
    }
}
