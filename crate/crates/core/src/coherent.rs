//! Coherent-state baseline.
//!
//! `N` copies of `|α⟩` are unitarily equivalent to one copy of `|√N α⟩`,
//! so every quantity here depends on `(n, N)` only through `a² = nN`.

use std::f64::consts::PI;

use crate::error::{PhaseError, Result};
use crate::precision::{Method, PrecisionResult, RegimeAdvisory};
use crate::quadrature::{integrate_with, EndpointMap, QuadConfig};
use crate::special_fn::EvalConfig;
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentEnsemble {
    n: f64,
    copies: u32,
}

impl CoherentEnsemble {
    pub fn new(n: f64, copies: u32) -> Result<Self> {
        if !(n.is_finite() && n >= 0.0) {
            return Err(PhaseError::domain("mean photon number must be finite and >= 0", n));
        }
        if copies == 0 {
            return Err(PhaseError::domain("copies must be >= 1", 0.0));
        }
        Ok(CoherentEnsemble { n, copies })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn copies(&self) -> u32 {
        self.copies
    }

    /// `|α_eff|² = nN`.
    pub fn total_energy(&self) -> f64 {
        self.n * self.copies as f64
    }
}

/// `F = e^{-a²} Σ_k a^{2k+1} / (k! √(k+1))` with `a² = nN`.
///
/// The Poisson weights are generated by recurrence outward from the mode
/// and normalised by their own sum, so no `e^{-a²}` prefactor is ever formed.
pub fn fidelity_series(e: &CoherentEnsemble, cfg: &EvalConfig) -> Result<PrecisionResult> {
    let a2 = e.total_energy();
    if a2 == 0.0 {
        return Ok(PrecisionResult::from_fidelity(0.0, Method::Series, 0.0));
    }
    let a = a2.sqrt();
    let mode = a2.floor() as usize;

    let mut weight = CompensatedSum::default();
    let mut fid = CompensatedSum::default();
    let mut infid = CompensatedSum::default();
    let mut add = |weight: &mut CompensatedSum, k: usize, w: f64| {
        let kp1 = (k + 1) as f64;
        let root = kp1.sqrt();
        weight.add(w);
        fid.add(w * a / root);
        infid.add(w * (kp1 - a2) / (root * (root + a)));
    };

    let mut terms = 1usize;
    add(&mut weight, mode, 1.0);
    let mut w = 1.0;
    for k in (0..mode).rev() {
        w *= (k + 1) as f64 / a2;
        if w < 1e-300 {
            break;
        }
        add(&mut weight, k, w);
        terms += 1;
    }

    let mut w = 1.0;
    let mut k = mode;
    let mut tail;
    loop {
        k += 1;
        w *= a2 / k as f64;
        add(&mut weight, k, w);
        terms += 1;
        // Beyond the mode the ratio a²/(k+1) only decreases.
        let next = a2 / (k + 1) as f64;
        tail = if next < 1.0 { w * next / (1.0 - next) } else { f64::INFINITY };
        if tail <= cfg.rel_tol * weight.value() {
            break;
        }
        if terms >= cfg.max_terms {
            return Err(PhaseError::NonConvergence {
                what: "coherent fidelity series",
                reached: terms,
            });
        }
    }

    let total = weight.value();
    let f = fid.value() / total;
    let d = infid.value() / total;
    let err_est = tail / total + terms as f64 * f64::EPSILON * f;
    Ok(combine(f, d, Method::Series, err_est))
}

/// `F = (a/√π) ∫₀¹ e^{-x a²} / √(-ln(1-x)) dx`.
pub fn fidelity_integral(e: &CoherentEnsemble) -> Result<PrecisionResult> {
    fidelity_integral_with(e, &QuadConfig::default())
}

pub fn fidelity_integral_with(e: &CoherentEnsemble, cfg: &QuadConfig) -> Result<PrecisionResult> {
    let a2 = e.total_energy();
    if a2 <= 0.0 {
        return Err(PhaseError::domain("integral form needs nN > 0", a2));
    }
    let a = a2.sqrt();
    // x ∈ (0, 1/2]: singular like x^{-1/2} at 0.
    let left = integrate_with(
        |x: f64| (-x * a2).exp() / (-(-x).ln_1p()).sqrt(),
        0.0,
        0.5,
        EndpointMap::ExpLeft,
        cfg,
    )?
    .require_converged()?;
    // x = 1 - w, w ∈ (0, 1/2]
    let right = integrate_with(
        |w: f64| (-(1.0 - w) * a2).exp() / (-w.ln()).sqrt(),
        0.0,
        0.5,
        EndpointMap::ExpLeft,
        cfg,
    )?
    .require_converged()?;
    let scale = a / PI.sqrt();
    let f = scale * (left.value + right.value);
    let err_est = scale * (left.err_est + right.err_est);
    Ok(PrecisionResult::from_fidelity(f, Method::Integral, err_est))
}

/// Leading large-`nN` law `F ≈ 1 - 1/(8nN)`.
pub fn fidelity_asymptotic(e: &CoherentEnsemble) -> Result<PrecisionResult> {
    let a2 = e.total_energy();
    if a2 <= 0.0 {
        return Err(PhaseError::domain("asymptotic law needs nN > 0", a2));
    }
    let advisory = (a2 < 1.0).then_some(RegimeAdvisory::PhotonNumberTooSmall { n: a2 });
    Ok(PrecisionResult::from_infidelity(1.0 / (8.0 * a2), Method::Asymptotic, f64::NAN).with_advisory(advisory))
}

/// `(Δθ̂)² = 1/(4nN)`.
pub fn variance_asymptotic(e: &CoherentEnsemble) -> Result<f64> {
    let a2 = e.total_energy();
    if a2 <= 0.0 {
        return Err(PhaseError::domain("variance is infinite at nN = 0", a2));
    }
    Ok(1.0 / (4.0 * a2))
}

pub(crate) fn combine(f: f64, d: f64, method: Method, err_est: f64) -> PrecisionResult {
    if d < 0.5 {
        PrecisionResult::from_infidelity(d, method, err_est)
    } else {
        PrecisionResult::from_fidelity(f, method, err_est)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ens(n: f64, copies: u32) -> CoherentEnsemble {
        CoherentEnsemble::new(n, copies).unwrap()
    }

    /// Plain forward summation of the defining series, log-space terms.
    fn brute_force(a2: f64, k_max: usize) -> f64 {
        let a = a2.sqrt();
        let mut s = 0.0;
        let mut ln_fact = 0.0;
        for k in 0..=k_max {
            if k > 0 {
                ln_fact += (k as f64).ln();
            }
            let ln_t = -a2 + (2 * k + 1) as f64 * a.ln() - ln_fact - 0.5 * ((k + 1) as f64).ln();
            s += ln_t.exp();
        }
        s
    }

    #[test]
    fn vacuum_has_no_phase_information() {
        let r = fidelity_series(&ens(0.0, 1), &EvalConfig::default()).unwrap();
        assert_eq!(r.fidelity, 0.0);
        assert!(r.holevo_variance.is_infinite());
    }

    #[test]
    fn single_photon_matches_brute_force() {
        let oracle = brute_force(1.0, 200);
        let r = fidelity_series(&ens(1.0, 1), &EvalConfig::default()).unwrap();
        assert_relative_eq!(r.fidelity, oracle, max_relative = 1e-14);
        // Frozen from the 200-term oracle above.
        assert_relative_eq!(oracle, 0.773_192_656_379_286_0, max_relative = 1e-14);
    }

    #[test]
    fn copies_reduce_to_one_amplitude() {
        let cfg = EvalConfig::default();
        let a = fidelity_series(&ens(1.0, 2), &cfg).unwrap();
        let b = fidelity_series(&ens(2.0, 1), &cfg).unwrap();
        assert_eq!(a.fidelity, b.fidelity);
        let a = fidelity_integral(&ens(0.25, 4)).unwrap();
        let b = fidelity_integral(&ens(1.0, 1)).unwrap();
        assert_eq!(a.fidelity, b.fidelity);
    }

    #[test]
    fn integral_matches_series_on_grid() {
        let cfg = EvalConfig::default();
        for n in [0.1, 1.0, 10.0, 100.0] {
            for copies in [1, 2, 4] {
                let e = ens(n, copies);
                let s = fidelity_series(&e, &cfg).unwrap();
                let i = fidelity_integral(&e).unwrap();
                assert_relative_eq!(s.fidelity, i.fidelity, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn integral_vanishes_with_amplitude() {
        let r = fidelity_integral(&ens(1e-12, 1)).unwrap();
        assert!(r.fidelity < 2e-6 && r.fidelity > 0.0);
        assert!(fidelity_integral(&ens(0.0, 3)).is_err());
    }

    #[test]
    fn large_energy_subleading_law() {
        let r = fidelity_integral(&ens(1000.0, 1)).unwrap();
        assert!((r.fidelity - (1.0 - 1.0 / 8000.0)).abs() < 2e-6);
        let s = fidelity_series(&ens(1000.0, 1), &EvalConfig::default()).unwrap();
        assert!((1000.0 * s.infidelity - 0.125).abs() < 0.01 * 0.125);
    }

    #[test]
    fn asymptotic_variance() {
        assert_eq!(variance_asymptotic(&ens(1.0, 1)).unwrap(), 0.25);
        assert_eq!(variance_asymptotic(&ens(1.0, 4)).unwrap(), 0.0625);
        assert_eq!(
            variance_asymptotic(&ens(3.0, 2)).unwrap(),
            2.0 * variance_asymptotic(&ens(3.0, 4)).unwrap()
        );
        assert!(variance_asymptotic(&ens(0.0, 4)).is_err());
    }

    #[test]
    fn monotone_in_energy() {
        let cfg = EvalConfig::default();
        let mut prev_f = 0.0;
        let mut prev_v = f64::INFINITY;
        let mut e = 1e-3;
        while e < 1e4 {
            let r = fidelity_series(&ens(e, 1), &cfg).unwrap();
            assert!(r.fidelity > prev_f && r.holevo_variance < prev_v, "nN = {e}");
            prev_f = r.fidelity;
            prev_v = r.holevo_variance;
            e *= 1.5;
        }
    }

    #[test]
    fn variance_approaches_twice_infidelity() {
        let cfg = EvalConfig::default();
        for n in [20.0, 100.0, 1e3, 1e4] {
            let r = fidelity_series(&ens(n, 1), &cfg).unwrap();
            assert!(r.fidelity > 0.99);
            let two_d = 2.0 * r.infidelity;
            assert!((r.holevo_variance - two_d).abs() <= 10.0 * r.infidelity * two_d);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(CoherentEnsemble::new(-1.0, 1).is_err());
        assert!(CoherentEnsemble::new(f64::NAN, 1).is_err());
        assert!(CoherentEnsemble::new(1.0, 0).is_err());
    }
}
