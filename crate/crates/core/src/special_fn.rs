//! Scalar special functions: `ln Γ`, real-argument binomial coefficients and
//! the zero-order modified Bessel function `I₀`.

use std::f64::consts::PI;

use crate::error::{PhaseError, Result};

/// Tolerance and length cap shared by the series evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl EvalConfig {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(PhaseError::InvalidConfig(format!(
                "rel_tol must lie in (0, 1), got {rel_tol}"
            )));
        }
        if max_terms == 0 {
            return Err(PhaseError::InvalidConfig("max_terms must be at least 1".into()));
        }
        Ok(EvalConfig { rel_tol, max_terms })
    }
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            rel_tol: 1e-15,
            max_terms: 50_000_000,
        }
    }
}

// Lanczos approximation with g = 607/128 and 15 coefficients (Godfrey's
// set, as published with Numerical Recipes 3rd ed. `gammln`). The shift
// constant 671/128 = g + 1/2.
const LANCZOS_SHIFT: f64 = 5.242_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_092;
const LANCZOS_COEFFS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];
// sqrt(2π)
const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(PhaseError::domain("log_gamma requires a finite x > 0", x));
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    let t = x + LANCZOS_SHIFT;
    let head = (x + 0.5) * t.ln() - t;
    let mut series = LANCZOS_C0;
    let mut y = x;
    for c in LANCZOS_COEFFS {
        y += 1.0;
        series += c / y;
    }
    Ok(head + (SQRT_TWO_PI * series / x).ln())
}

/// `ln C(a, k)` for real `a` and integer `k`, with `a - k + 1 > 0`.
pub fn log_binomial(a: f64, k: u64) -> Result<f64> {
    if !a.is_finite() {
        return Err(PhaseError::domain("log_binomial upper argument must be finite", a));
    }
    let kf = k as f64;
    if a - kf + 1.0 <= 0.0 {
        return Err(PhaseError::domain("log_binomial requires a - k + 1 > 0", a - kf + 1.0));
    }
    if k == 0 {
        return Ok(0.0);
    }
    Ok(log_gamma(a + 1.0)? - log_gamma(kf + 1.0)? - log_gamma(a - kf + 1.0)?)
}

/// Branch point between the Taylor series and the asymptotic expansion.
const BESSEL_SPLIT: f64 = 15.0;

/// `I₀(x)`. Overflows to infinity past `|x| ≈ 713`; use
/// [`bessel_i0_scaled`] where that matters.
pub fn bessel_i0(x: f64) -> Result<f64> {
    let ax = x.abs();
    if ax <= BESSEL_SPLIT {
        check_finite(x)?;
        Ok(i0_taylor(ax))
    } else {
        Ok(bessel_i0_scaled(x)? * ax.exp())
    }
}

/// `e^{-|x|} I₀(x)`.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    check_finite(x)?;
    let ax = x.abs();
    if ax <= BESSEL_SPLIT {
        Ok(i0_taylor(ax) * (-ax).exp())
    } else {
        Ok(i0_asymptotic_scaled(ax))
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(PhaseError::domain("bessel_i0 requires a finite argument", x))
    }
}

// Σ (x²/4)^k / (k!)², all terms positive.
fn i0_taylor(ax: f64) -> f64 {
    let q = 0.25 * ax * ax;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * k);
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
    }
}

// Hankel expansion e^{-x} I₀(x) ~ (2πx)^{-1/2} Σ ((2k-1)!!)² / (k! (8x)^k),
// truncated at the smallest term.
fn i0_asymptotic_scaled(ax: f64) -> f64 {
    let mut term = 1.0_f64;
    let mut sum = 1.0;
    let mut k = 0.0_f64;
    loop {
        k += 1.0;
        let factor = (2.0 * k - 1.0).powi(2) / (8.0 * k * ax);
        if factor >= 1.0 {
            break;
        }
        term *= factor;
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    sum / (2.0 * PI * ax).sqrt()
}
