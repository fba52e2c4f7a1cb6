//! Statistics of the canonical phase measurement on a single squeezed
//! vacuum state.
//!
//! The outcome density is `p(φ|θ) = |S(φ-θ)|²` on `[0, π)` with
//!
//! ```text
//! S(φ) = ((1-β²)/π²)^{1/4} Σ_k (√((2k)!)/k!) (β e^{2iφ}/2)^k
//! ```
//!
//! and the Fisher information `I = ∫ (∂_θ p)²/p dφ` bounds the variance of
//! any estimator built from `N` repeated measurements, `(Δθ̂)² ≥ 1/(N I)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{PhaseError, Result};
use crate::quadrature::{integrate_with, EndpointMap, QuadConfig};
use crate::special_fn::log_gamma;

/// Hard cap on the amplitude series length.
pub const MAX_SERIES_TERMS: usize = 1_000_000;

/// Absolute bound on the discarded tail `Σ_{k>K} |c_k|`.
const TAIL_BOUND: f64 = 1e-17;

/// Below this density the Fisher integrand is taken as zero.
const DENSITY_FLOOR: f64 = 1e-300;

/// Outcome density of the canonical measurement for one SVS copy.
///
/// The series coefficients are tabulated once at construction; the value
/// is immutable afterwards and can be shared between threads.
#[derive(Debug, Clone)]
pub struct PhaseDensity {
    beta: f64,
    prefactor: f64,
    coeffs: Vec<f64>,
}

impl PhaseDensity {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && (0.0..1.0).contains(&beta)) {
            return Err(PhaseError::domain("beta must lie in [0, 1)", beta));
        }
        let prefactor = ((1.0 - beta) * (1.0 + beta) / (PI * PI)).powf(0.25);
        let mut coeffs = vec![1.0];
        if beta > 0.0 {
            // c_k / c_{k-1} = β √((2k-1)/(2k)) < β, so the tail after c_K is
            // at most c_K β/(1-β).
            let mut c = 1.0f64;
            let mut k = 0usize;
            while c * beta / (1.0 - beta) > TAIL_BOUND {
                k += 1;
                if k > MAX_SERIES_TERMS {
                    let needed = (TAIL_BOUND * (1.0 - beta)).ln() / beta.ln();
                    return Err(PhaseError::NonConvergence {
                        what: "phase amplitude series (needs about this many terms)",
                        reached: needed.ceil() as usize,
                    });
                }
                let kf = k as f64;
                c *= beta * ((2.0 * kf - 1.0) / (2.0 * kf)).sqrt();
                coeffs.push(c);
            }
        }
        Ok(PhaseDensity { beta, prefactor, coeffs })
    }

    pub fn from_photons(n: f64) -> Result<Self> {
        if !(n.is_finite() && n >= 0.0) {
            return Err(PhaseError::domain("mean photon number must be finite and >= 0", n));
        }
        Self::new((n / (n + 1.0)).sqrt())
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Mean photon number `β²/(1-β²)`.
    pub fn n(&self) -> f64 {
        self.beta * self.beta / ((1.0 - self.beta) * (1.0 + self.beta))
    }

    /// Number of retained series terms.
    pub fn terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Series coefficients `√((2k)!)/k! (β/2)^k`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// `((1-β²)/π²)^{1/4}`.
    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn amplitude(&self, phi: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, 2.0 * phi);
        let mut s = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            s = s * z + c;
        }
        s * self.prefactor
    }

    /// `S(φ)` and `dS/dφ` from one Horner pass.
    pub fn amplitude_with_derivative(&self, phi: f64) -> (Complex64, Complex64) {
        let z = Complex64::from_polar(1.0, 2.0 * phi);
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        // d/dφ Σ c_k z^k = 2i z P'(z)
        let deriv = Complex64::new(0.0, 2.0) * z * dp;
        (p * self.prefactor, deriv * self.prefactor)
    }

    /// `p(φ|θ) = |S(φ-θ)|²`.
    pub fn density(&self, phi: f64, theta: f64) -> f64 {
        self.amplitude(phi - theta).norm_sqr()
    }

    /// `p(φ|θ)` and `∂p/∂θ`.
    pub fn density_with_theta_derivative(&self, phi: f64, theta: f64) -> (f64, f64) {
        let (s, ds) = self.amplitude_with_derivative(phi - theta);
        // ∂_θ |S(φ-θ)|² = -2 Re(S̄ S')
        (s.norm_sqr(), -2.0 * (s.conj() * ds).re)
    }

    /// `ln p(ψ|0)` and its derivative in `ψ`.
    pub fn log_density_with_derivative(&self, psi: f64) -> (f64, f64) {
        let (s, ds) = self.amplitude_with_derivative(psi);
        let p = s.norm_sqr();
        (p.ln(), 2.0 * (s.conj() * ds).re / p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FisherMethod {
    Numeric,
    Asymptotic,
}

impl FisherMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FisherMethod::Numeric => "numeric",
            FisherMethod::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherResult {
    pub info: f64,
    pub method: FisherMethod,
    pub err_est: f64,
}

/// Fisher information at `θ = 0`.
pub fn fisher_numeric(pd: &PhaseDensity) -> Result<FisherResult> {
    fisher_numeric_at(pd, 0.0)
}

/// Fisher information at an arbitrary true phase. The measurement is
/// covariant, so the result does not depend on `theta`; it is exposed to
/// make that checkable.
pub fn fisher_numeric_at(pd: &PhaseDensity, theta: f64) -> Result<FisherResult> {
    if !theta.is_finite() {
        return Err(PhaseError::domain("theta must be finite", theta));
    }
    let integrand = |phi: f64| {
        let (p, dp) = pd.density_with_theta_derivative(phi, theta);
        if p < DENSITY_FLOOR {
            0.0
        } else {
            dp * dp / p
        }
    };
    let cfg = QuadConfig::with_tolerances(1e-11, 1e-14);
    // The density peaks at φ = θ (mod π); put a panel boundary there.
    let peak = theta.rem_euclid(PI);
    let mut info = 0.0;
    let mut err_est = 0.0;
    for (a, b) in [(0.0, peak), (peak, PI)] {
        if b - a <= 0.0 {
            continue;
        }
        let r = integrate_with(integrand, a, b, EndpointMap::Identity, &cfg)?.require_converged()?;
        info += r.value;
        err_est += r.err_est;
    }
    Ok(FisherResult {
        info,
        method: FisherMethod::Numeric,
        err_est,
    })
}

/// Large-squeezing law `I ≈ 6/(7(1-β)²)`.
pub fn fisher_asymptotic(beta: f64) -> Result<FisherResult> {
    if !(beta.is_finite() && (0.0..1.0).contains(&beta)) {
        return Err(PhaseError::domain("beta must lie in [0, 1)", beta));
    }
    Ok(FisherResult {
        info: 6.0 / (7.0 * (1.0 - beta).powi(2)),
        method: FisherMethod::Asymptotic,
        err_est: f64::NAN,
    })
}

/// Photon-number form of the same law, `I ≈ 24n²/7`.
pub fn fisher_asymptotic_photons(n: f64) -> Result<f64> {
    if !(n.is_finite() && n >= 0.0) {
        return Err(PhaseError::domain("mean photon number must be finite and >= 0", n));
    }
    Ok(24.0 * n * n / 7.0)
}

/// `β = √(n/(n+1))`.
pub fn beta_from_photons(n: f64) -> f64 {
    (n / (n + 1.0)).sqrt()
}

/// `n = β²/(1-β²)`.
pub fn photons_from_beta(beta: f64) -> f64 {
    beta * beta / ((1.0 - beta) * (1.0 + beta))
}

/// Asymptotic Cramér–Rao bound `(Δθ̂)² ≥ 7/(24 n² N)`.
pub fn cramer_rao(n: f64, copies: u32) -> Result<f64> {
    if !(n.is_finite() && n > 0.0) {
        return Err(PhaseError::domain("Cramér-Rao bound needs n > 0", n));
    }
    if copies == 0 {
        return Err(PhaseError::domain("copies must be >= 1", 0.0));
    }
    Ok(7.0 / (24.0 * n * n * copies as f64))
}

/// Finite-`n` Cramér–Rao bound `1/(N I(β))` from the numeric Fisher
/// information.
pub fn cramer_rao_exact(pd: &PhaseDensity, copies: u32) -> Result<f64> {
    if copies == 0 {
        return Err(PhaseError::domain("copies must be >= 1", 0.0));
    }
    let info = fisher_numeric(pd)?.info;
    if info <= 0.0 {
        return Err(PhaseError::InfiniteVariance);
    }
    Ok(1.0 / (copies as f64 * info))
}

/// Density with the coefficients replaced by their Stirling form
/// `(πk)^{-1/4}`, i.e. `|S|² ∝ |Li_{1/4}(β e^{2iφ})|²`. Only meant for
/// comparison with the exact density at large `β`.
pub fn stirling_density(pd: &PhaseDensity, phi: f64) -> f64 {
    let z = Complex64::from_polar(pd.beta, 2.0 * phi);
    let mut s = Complex64::new(0.0, 0.0);
    for k in (1..pd.coeffs.len()).rev() {
        s = (s + (k as f64).powf(-0.25)) * z;
    }
    (s * pd.prefactor * PI.powf(-0.25)).norm_sqr()
}

/// Leading singular term `Li_{1/4}(z) ≈ Γ(3/4)(1-z)^{-3/4}` of
/// [`stirling_density`].
pub fn leading_density(pd: &PhaseDensity, phi: f64) -> f64 {
    let z = Complex64::from_polar(pd.beta, 2.0 * phi);
    let gamma_34 = log_gamma(0.75).map(f64::exp).unwrap_or(f64::NAN);
    let li = (Complex64::new(1.0, 0.0) - z).powf(-0.75) * gamma_34;
    (li * pd.prefactor * PI.powf(-0.25)).norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_is_uniform() {
        let pd = PhaseDensity::new(0.0).unwrap();
        assert_eq!(pd.terms(), 1);
        for phi in [0.0, 0.4, 1.3, 3.0] {
            assert_relative_eq!(pd.density(phi, 0.9), 1.0 / PI, max_relative = 1e-15);
            assert_relative_eq!(pd.amplitude(phi).norm(), PI.sqrt().recip(), max_relative = 1e-15);
        }
        let i = fisher_numeric(&pd).unwrap();
        assert_eq!(i.info, 0.0);
    }

    #[test]
    fn coefficients_match_log_gamma_form() {
        let beta: f64 = 0.97;
        let pd = PhaseDensity::new(beta).unwrap();
        for (k, &c) in pd.coefficients().iter().enumerate().step_by(37) {
            let kf = k as f64;
            let ln_c = 0.5 * log_gamma(2.0 * kf + 1.0).unwrap() - log_gamma(kf + 1.0).unwrap()
                + kf * (beta / 2.0).ln();
            assert_relative_eq!(c, ln_c.exp(), max_relative = 1e-11);
        }
    }

    #[test]
    fn amplitude_matches_direct_sum() {
        // 200 direct terms at β = 0.5 leave a tail below 1e-60.
        let beta: f64 = 0.5;
        let pd = PhaseDensity::new(beta).unwrap();
        let mut direct = 0.0;
        let mut ln_fact_k = 0.0;
        let mut ln_fact_2k = 0.0;
        for k in 0..200u32 {
            if k > 0 {
                let kf = k as f64;
                ln_fact_k += kf.ln();
                ln_fact_2k += (2.0 * kf - 1.0).ln() + (2.0 * kf).ln();
            }
            direct += (0.5 * ln_fact_2k - ln_fact_k + k as f64 * (beta / 2.0).ln()).exp();
        }
        direct *= pd.prefactor();
        let s = pd.amplitude(0.0);
        assert_relative_eq!(s.re, direct, max_relative = 1e-14);
        assert!(s.im.abs() < 1e-15);
    }

    #[test]
    fn amplitude_modulus_is_even() {
        let pd = PhaseDensity::new(0.8).unwrap();
        for phi in [0.1, 0.7, 1.4] {
            assert_relative_eq!(pd.amplitude(phi).norm(), pd.amplitude(-phi).norm(), max_relative = 1e-13);
        }
    }

    #[test]
    fn density_is_covariant_and_periodic() {
        let pd = PhaseDensity::new(0.9).unwrap();
        for (phi, theta) in [(0.3, 0.1), (2.0, 1.1), (0.05, 3.0)] {
            let d = 0.37;
            assert_relative_eq!(pd.density(phi, theta), pd.density(phi + d, theta + d), max_relative = 1e-11);
            assert_relative_eq!(pd.density(phi, theta), pd.density(phi + PI, theta), max_relative = 1e-11);
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let pd = PhaseDensity::new(0.9).unwrap();
        let h = 1e-6;
        for phi in [0.02, 0.3, 1.2] {
            let (_, dp) = pd.density_with_theta_derivative(phi, 0.0);
            let fd = (pd.density(phi, h) - pd.density(phi, -h)) / (2.0 * h);
            assert_relative_eq!(dp, fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn asymptotic_forms() {
        let r = fisher_asymptotic(0.9).unwrap();
        assert_relative_eq!(r.info, 6.0 / 0.07, max_relative = 1e-12);
        assert!(fisher_asymptotic(1.0).is_err());
        // 6/(7(1-β)²) vs 24n²/7 at β → 1: equal to leading order in 1/n.
        let beta = 0.9999;
        let n = photons_from_beta(beta);
        let ratio = fisher_asymptotic(beta).unwrap().info / fisher_asymptotic_photons(n).unwrap();
        assert!((ratio - 1.0).abs() < 3.0 / n, "ratio {ratio}");
    }

    #[test]
    fn cramer_rao_values() {
        assert_relative_eq!(cramer_rao(1.0, 1).unwrap(), 7.0 / 24.0, max_relative = 1e-15);
        assert_relative_eq!(cramer_rao(2.0, 3).unwrap(), 7.0 / 288.0, max_relative = 1e-15);
        let hl = 1.0 / (8.0 * 16.0 * 9.0);
        assert_relative_eq!(cramer_rao(4.0, 9).unwrap() / hl, 7.0 / 3.0, max_relative = 1e-14);
        assert!(cramer_rao(0.0, 1).is_err());
    }

    #[test]
    fn stirling_form_approaches_exact_density() {
        let mut prev = 0.0;
        for beta in [0.9, 0.99, 0.999] {
            let pd = PhaseDensity::new(beta).unwrap();
            let ratio = stirling_density(&pd, 0.0) / pd.density(0.0, 0.0);
            assert!(ratio > prev && ratio < 1.0, "beta {beta}: {ratio}");
            prev = ratio;
        }
        assert!(prev > 0.98);
        let pd = PhaseDensity::new(0.999).unwrap();
        let lead = leading_density(&pd, 0.0) / pd.density(0.0, 0.0);
        assert!((lead - 1.0).abs() < 0.01, "{lead}");
    }

    #[test]
    fn rejects_beta_outside_range() {
        assert!(PhaseDensity::new(1.0).is_err());
        assert!(PhaseDensity::new(-0.2).is_err());
        assert!(PhaseDensity::new(f64::NAN).is_err());
        let err = PhaseDensity::new(1.0 - 1e-9).unwrap_err();
        assert!(matches!(err, PhaseError::NonConvergence { .. }));
    }
}
