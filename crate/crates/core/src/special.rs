//! Gamma function for real and complex arguments in the right half-plane.
//!
//! Both routines share one Lanczos approximation (g = 7, nine coefficients).
//! Arguments with real part below 1/2 are shifted up once with
//! `Γ(z) = Γ(z + 1) / z`, so no reflection formula is involved.

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma requires a positive finite argument, got {x}"
        )));
    }
    if x < 0.5 {
        return Ok(gamma(x + 1.0)? / x);
    }
    if x > 140.0 {
        return Ok(ln_gamma(x)?.exp());
    }
    let w = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (k, &p) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += p / (w + k as f64);
    }
    let t = w + LANCZOS_G + 0.5;
    Ok((2.0 * std::f64::consts::PI).sqrt() * t.powf(w + 0.5) * (-t).exp() * series)
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "ln_gamma requires a positive finite argument, got {x}"
        )));
    }
    Ok(ln_gamma_complex(Complex64::new(x, 0.0))?.re)
}

/// Γ(z) for Re(z) > 0.
pub fn gamma_complex(z: Complex64) -> Result<Complex64> {
    Ok(ln_gamma_complex(z)?.exp())
}

/// A logarithm of Γ(z) for Re(z) > 0.
///
/// The imaginary part is not reduced to the principal branch; it is only
/// meaningful modulo 2π, which is all that exponentiation needs.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "complex gamma requires Re(z) > 0, got {z}"
        )));
    }
    if z.re < 0.5 {
        return Ok(lanczos_ln(z + 1.0) - z.ln());
    }
    Ok(lanczos_ln(z))
}

fn lanczos_ln(z: Complex64) -> Complex64 {
    let w = z - 1.0;
    let mut series = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (k, &p) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += p / (w + k as f64);
    }
    let t = w + (LANCZOS_G + 0.5);
    HALF_LN_TWO_PI + (w + 0.5) * t.ln() - t + series.ln()
}
