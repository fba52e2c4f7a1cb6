//! Optimal fidelity and Holevo variance for `N` identical squeezed vacuum
//! states.
//!
//! In the symmetric `2k`-photon basis the `N`-copy state has amplitudes
//! `(1-β²)^{N/4} β^k h_k` with `h_k = √C(N/2+k-1, k)`, so the pair number
//! `k` follows a negative binomial law with shape `N/2` and failure
//! probability `β²`. The optimal (canonical) measurement reaches
//!
//! ```text
//! F = (1-β²)^{N/2} Σ_k β^{2k+1} h_k h_{k+1} = β E[√((N/2+k)/(k+1))]
//! ```
//!
//! which is evaluated here either as that expectation or through its
//! one-dimensional integral representation involving `I₀`.

use crate::coherent::combine;
use crate::error::{PhaseError, Result};
use crate::precision::{Method, PrecisionResult, RegimeAdvisory};
use crate::quadrature::{integrate_with, EndpointMap, QuadConfig};
use crate::special_fn::{bessel_i0_scaled, log_binomial, EvalConfig};
use crate::sum::CompensatedSum;

/// Tolerance for agreement between a supplied `β` and the one implied by `n`.
pub const PAIR_CONSISTENCY_TOL: f64 = 1e-12;

/// Series evaluation is refused this close to `β = 1`.
pub const BETA_REFUSAL_MARGIN: f64 = 1e-12;

/// Reference values of the large-`n` coefficients `ξ_N`, `N = 1..=4`.
/// `ξ₂ = 1/2` is exact; the others are two-digit values that
/// [`estimate_xi`] reproduces from exact fidelities.
pub const XI_TABLE: [f64; 4] = [0.55, 0.5, 0.58, 0.30];

/// Default photon-number grid for [`estimate_xi`].
pub const DEFAULT_XI_GRID: [f64; 5] = [1e3, 3e3, 1e4, 3e4, 1e5];

/// `N` identical squeezed vacuum states with `β = tanh r = √(n/(n+1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedEnsemble {
    n: f64,
    beta: f64,
    beta_sq: f64,
    one_minus_beta_sq: f64,
    copies: u32,
}

impl SqueezedEnsemble {
    pub fn from_photons(n: f64, copies: u32) -> Result<Self> {
        if !(n.is_finite() && n >= 0.0) {
            return Err(PhaseError::domain("mean photon number must be finite and >= 0", n));
        }
        check_copies(copies)?;
        let beta_sq = n / (n + 1.0);
        Ok(SqueezedEnsemble {
            n,
            beta: beta_sq.sqrt(),
            beta_sq,
            one_minus_beta_sq: 1.0 / (n + 1.0),
            copies,
        })
    }

    pub fn from_beta(beta: f64, copies: u32) -> Result<Self> {
        if !(beta.is_finite() && (0.0..1.0).contains(&beta)) {
            return Err(PhaseError::domain("beta must lie in [0, 1)", beta));
        }
        check_copies(copies)?;
        let one_minus_beta_sq = (1.0 - beta) * (1.0 + beta);
        let beta_sq = beta * beta;
        Ok(SqueezedEnsemble {
            n: beta_sq / one_minus_beta_sq,
            beta,
            beta_sq,
            one_minus_beta_sq,
            copies,
        })
    }

    /// Takes both parameters; they must describe the same state.
    pub fn from_both(n: f64, beta: f64, copies: u32) -> Result<Self> {
        let e = Self::from_photons(n, copies)?;
        if (e.beta - beta).abs() > PAIR_CONSISTENCY_TOL {
            return Err(PhaseError::InvalidConfig(format!(
                "beta = {beta} is inconsistent with n = {n} (expected {})",
                e.beta
            )));
        }
        Ok(e)
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn copies(&self) -> u32 {
        self.copies
    }

    /// Squeezing parameter `r = atanh β`.
    pub fn squeezing(&self) -> f64 {
        self.beta.atanh()
    }

    pub fn total_energy(&self) -> f64 {
        self.n * self.copies as f64
    }

    fn shape(&self) -> f64 {
        0.5 * self.copies as f64
    }
}

fn check_copies(copies: u32) -> Result<()> {
    if copies == 0 {
        Err(PhaseError::domain("copies must be >= 1", 0.0))
    } else {
        Ok(())
    }
}

/// `h_k = √C(N/2 + k - 1, k)`.
pub fn h_coeff(k: u64, copies: u32) -> f64 {
    let a = 0.5 * copies as f64 + k as f64 - 1.0;
    // a - k + 1 = N/2 > 0, so the binomial is always defined.
    let ln_c = log_binomial(a, k).expect("N/2 > 0 keeps the binomial in its domain");
    (0.5 * ln_c).exp()
}

/// Negative binomial pair-number law `℘_k = h_k² β^{2k} (1-β²)^{N/2}`.
pub fn negbin_pmf(k: u64, e: &SqueezedEnsemble) -> f64 {
    if e.beta == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let ln_h2 = 2.0 * h_coeff(k, e.copies).ln();
    (ln_h2 + k as f64 * e.beta_sq.ln() + e.shape() * e.one_minus_beta_sq.ln()).exp()
}

/// `⟨k⟩ = (N/2) β²/(1-β²) = nN/2`.
pub fn negbin_mean(e: &SqueezedEnsemble) -> f64 {
    e.shape() * e.n
}

/// `(Δk)² = ⟨k⟩/(1-β²)`.
pub fn negbin_variance(e: &SqueezedEnsemble) -> f64 {
    negbin_mean(e) * (e.n + 1.0)
}

/// Initial series cut `⌈⟨k⟩ + 12 Δk⌉ + 64`.
pub fn initial_cutoff(e: &SqueezedEnsemble) -> u64 {
    (negbin_mean(e) + 12.0 * negbin_variance(e).sqrt()).ceil() as u64 + 64
}

/// Outcome of a weighted sweep over the pair-number law.
struct Sweep {
    total_weight: f64,
    /// Upper bound on the weight beyond the last summed term.
    tail_weight: f64,
    terms: usize,
}

/// Visits `k` with unnormalised weights `w_k ∝ ℘_k`, anchored at the mode
/// with `w_mode = 1`, until the remaining weight is below `rel_tol` of
/// the running total.
fn sweep_pairs(
    e: &SqueezedEnsemble,
    cfg: &EvalConfig,
    what: &'static str,
    mut visit: impl FnMut(u64, f64),
) -> Result<Sweep> {
    let r = e.shape();
    let q = e.beta_sq;
    let mode = if r > 1.0 { ((r - 1.0) * e.n).floor() as u64 } else { 0 };

    let mut total = CompensatedSum::default();
    let mut terms = 1usize;
    visit(mode, 1.0);
    total.add(1.0);

    let mut w = 1.0;
    let mut k = mode;
    while k > 0 {
        w *= k as f64 / (q * (r + k as f64 - 1.0));
        k -= 1;
        if w < 1e-300 {
            break;
        }
        visit(k, w);
        total.add(w);
        terms += 1;
    }

    let cutoff = initial_cutoff(e).max(mode);
    let mut w = 1.0;
    let mut k = mode;
    loop {
        w *= q * (r + k as f64) / (k + 1) as f64;
        k += 1;
        visit(k, w);
        total.add(w);
        terms += 1;
        if k >= cutoff {
            // For r >= 1 the step ratio decreases towards q, for r < 1 it
            // increases towards q; either way it is bounded by this.
            let next = q * (r + k as f64) / (k + 1) as f64;
            let rho = if r >= 1.0 { next } else { q };
            if rho < 1.0 {
                let tail = w * rho / (1.0 - rho);
                if tail <= cfg.rel_tol * total.value() {
                    return Ok(Sweep {
                        total_weight: total.value(),
                        tail_weight: tail,
                        terms,
                    });
                }
            }
        }
        if terms >= cfg.max_terms {
            return Err(PhaseError::NonConvergence { what, reached: terms });
        }
    }
}

fn refuse_near_one(e: &SqueezedEnsemble) -> Result<()> {
    if e.beta >= 1.0 - BETA_REFUSAL_MARGIN {
        Err(PhaseError::Refused(format!(
            "beta = {} is within {BETA_REFUSAL_MARGIN} of 1; use an asymptotic method",
            e.beta
        )))
    } else {
        Ok(())
    }
}

/// Exact optimal fidelity as the negative binomial expectation
/// `F = β Σ_k ℘_k √((N/2+k)/(k+1))`.
///
/// `1 - F` is accumulated directly as `Σ ℘_k (1 - β s_k)` with the
/// difference formed without cancellation, which keeps full relative
/// accuracy deep in the `F → 1` regime.
pub fn fidelity_series(e: &SqueezedEnsemble, cfg: &EvalConfig) -> Result<PrecisionResult> {
    if e.beta == 0.0 {
        return Ok(PrecisionResult::from_fidelity(0.0, Method::Series, 0.0));
    }
    refuse_near_one(e)?;
    let r = e.shape();
    let q = e.beta_sq;
    let omq = e.one_minus_beta_sq;

    let mut fid = CompensatedSum::default();
    let mut infid = CompensatedSum::default();
    let sweep = sweep_pairs(e, cfg, "squeezed fidelity series", |k, w| {
        let k1 = k as f64 + 1.0;
        let y = q * (r + k as f64) / k1;
        let one_minus_y = (omq * k1 - q * (r - 1.0)) / k1;
        fid.add(w * y.sqrt());
        infid.add(w * one_minus_y / (1.0 + y.sqrt()));
    })?;

    let total = sweep.total_weight;
    let f = fid.value() / total;
    let d = infid.value() / total;
    let err_est = sweep.tail_weight / total * r.sqrt().max(1.0) + sweep.terms as f64 * f64::EPSILON * f;
    Ok(combine(f, d, Method::Series, err_est))
}

/// Optimal fidelity from the integral representation
///
/// ```text
/// F = (N/2) β (1-β²)^{N/2} ∫₀¹ u^{(N-2)/4} I₀(((2-N)/4) ln u) / (1-uβ²)^{N/2+1} du
/// ```
///
/// The interval is split at `u = 1/2`; both halves are integrated with the
/// exponential endpoint map, the right half in `w = 1 - u` so the peak of
/// width `~1-β²` at `u → 1` is resolved without cancellation.
pub fn fidelity_integral(e: &SqueezedEnsemble) -> Result<PrecisionResult> {
    fidelity_integral_with(e, &QuadConfig::default())
}

pub fn fidelity_integral_with(e: &SqueezedEnsemble, cfg: &QuadConfig) -> Result<PrecisionResult> {
    if !(e.beta > 0.0) {
        return Err(PhaseError::domain("integral form needs beta > 0", e.beta));
    }
    let copies = e.copies as f64;
    let r = e.shape();
    let q = e.beta_sq;
    let omq = e.one_minus_beta_sq;
    let ln_pref = r.ln() + e.beta.ln() + r * omq.ln();
    let bessel_coeff = (2.0 - copies) / 4.0;
    // u^{(N-2)/4} e^{|x|} collapses to u^{power}: 0 for N >= 2, -1/2 for N = 1.
    let power = (copies - 2.0) / 4.0 - (copies - 2.0).abs() / 4.0;
    let den_exp = r + 1.0;

    let integrand = |ln_u: f64, ln_den: f64| -> f64 {
        let i0s = bessel_i0_scaled(bessel_coeff * ln_u).unwrap_or(f64::NAN);
        (ln_pref + power * ln_u - den_exp * ln_den).exp() * i0s
    };
    let left = integrate_with(
        |u: f64| integrand(u.ln(), (-u * q).ln_1p()),
        0.0,
        0.5,
        EndpointMap::ExpLeft,
        cfg,
    )?
    .require_converged()?;
    let right = integrate_with(
        |w: f64| integrand((-w).ln_1p(), (omq + q * w).ln()),
        0.0,
        0.5,
        EndpointMap::ExpLeft,
        cfg,
    )?
    .require_converged()?;
    let f = left.value + right.value;
    Ok(PrecisionResult::from_fidelity(f, Method::Integral, left.err_est + right.err_est))
}

/// Evaluates the ensemble with the requested method.
pub fn evaluate(e: &SqueezedEnsemble, method: Method, cfg: &EvalConfig) -> Result<PrecisionResult> {
    match method {
        Method::Series => fidelity_series(e, cfg),
        Method::Integral => {
            if e.beta == 0.0 {
                Ok(PrecisionResult::from_fidelity(0.0, Method::Integral, 0.0))
            } else {
                fidelity_integral(e)
            }
        }
        Method::Asymptotic => Ok(fidelity_asymptotic(e)),
        Method::LargeN => fidelity_large_n(e),
        Method::SmallSqueezing => Ok(small_squeezing(e)),
    }
}

/// `V = F^{-2} - 1`, failing when the chosen method yields `F = 0`.
pub fn holevo_variance(e: &SqueezedEnsemble, method: Method, cfg: &EvalConfig) -> Result<PrecisionResult> {
    let r = evaluate(e, method, cfg)?;
    if r.fidelity <= 0.0 {
        return Err(PhaseError::InfiniteVariance);
    }
    Ok(r)
}

/// Leading large-`n` statistical variance `(Δθ̂)²`:
/// `ξ_N/(2n^{N/2})` for `N ≤ 3`, `((1/8) ln n + ξ₄)/(2n²)` for `N = 4`
/// and `1/(8(N-4)n²)` for `N ≥ 5`.
pub fn variance_asymptotic_large_n(e: &SqueezedEnsemble) -> f64 {
    let n = e.n;
    match e.copies {
        c @ 1..=3 => XI_TABLE[c as usize - 1] / (2.0 * n.powf(0.5 * c as f64)),
        4 => (0.125 * n.ln() + XI_TABLE[3]) / (2.0 * n * n),
        c => 1.0 / (8.0 * (c - 4) as f64 * n * n),
    }
}

/// Fidelity form of [`variance_asymptotic_large_n`], `1 - F = 2(Δθ̂)²`.
pub fn fidelity_asymptotic(e: &SqueezedEnsemble) -> PrecisionResult {
    let d = 2.0 * variance_asymptotic_large_n(e);
    clamped(1.0 - d, Method::Asymptotic).with_advisory(regime_check(e, Method::Asymptotic))
}

/// Heisenberg-limit law for many copies, `(Δθ̂)² = 1/(8n(n+1)N)`.
pub fn variance_large_n(e: &SqueezedEnsemble) -> Result<f64> {
    if e.n <= 0.0 {
        return Err(PhaseError::domain("large-N law needs n > 0", e.n));
    }
    Ok(1.0 / (8.0 * e.n * (e.n + 1.0) * e.copies as f64))
}

/// `F = 1 - (1-β²)²/(4β²N)`.
pub fn fidelity_large_n(e: &SqueezedEnsemble) -> Result<PrecisionResult> {
    let d = 2.0 * variance_large_n(e)?;
    if d >= 1.0 {
        return Ok(clamped(1.0 - d, Method::LargeN));
    }
    Ok(PrecisionResult::from_infidelity(d, Method::LargeN, f64::NAN))
}

/// Weak-squeezing law `F ≈ √(nN/2)`; depends on the total energy only.
pub fn small_squeezing(e: &SqueezedEnsemble) -> PrecisionResult {
    let f = (0.5 * e.total_energy()).sqrt();
    let r = clamped(f, Method::SmallSqueezing);
    let advisory = r.advisory.clone().or_else(|| regime_check(e, Method::SmallSqueezing));
    r.with_advisory(advisory)
}

/// `V ≈ 2/(nN)`.
pub fn small_squeezing_variance(e: &SqueezedEnsemble) -> f64 {
    2.0 / e.total_energy()
}

fn clamped(f: f64, method: Method) -> PrecisionResult {
    if (0.0..=1.0).contains(&f) {
        PrecisionResult::from_fidelity(f, method, f64::NAN)
    } else {
        let c = if f.is_nan() { 0.0 } else { f.clamp(0.0, 1.0) };
        PrecisionResult::from_fidelity(c, method, f64::NAN)
            .with_advisory(Some(RegimeAdvisory::FidelityClamped { raw: f }))
    }
}

/// Warns when an approximate method is used outside the regime where it
/// holds. Exact methods never warn.
pub fn regime_check(e: &SqueezedEnsemble, method: Method) -> Option<RegimeAdvisory> {
    match method {
        Method::Asymptotic | Method::LargeN if e.n < 1.0 => {
            Some(RegimeAdvisory::PhotonNumberTooSmall { n: e.n })
        }
        Method::SmallSqueezing if e.total_energy() > 0.1 => Some(RegimeAdvisory::EnergyNotSmall {
            energy: e.total_energy(),
        }),
        _ => None,
    }
}

/// Fitted large-`n` coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct XiEstimate {
    pub copies: u32,
    pub xi: f64,
    /// Coefficient of the `n^{-1/2}` correction.
    pub correction: f64,
    /// RMS residual of the fit.
    pub residual: f64,
    pub points: usize,
}

/// Recovers `ξ_N` (`N ≤ 4`) by fitting `ξ + c n^{-1/2}` to the exact
/// rescaled infidelity `n^{N/2}(1-F)` (for `N = 4`: `n²(1-F) - (1/8) ln n`).
pub fn estimate_xi(copies: u32, n_grid: &[f64], cfg: &EvalConfig) -> Result<XiEstimate> {
    if !(1..=4).contains(&copies) {
        return Err(PhaseError::domain("xi is defined for N in 1..=4", copies as f64));
    }
    if n_grid.len() < 3 {
        return Err(PhaseError::IllConditioned(format!(
            "need at least 3 grid points, got {}",
            n_grid.len()
        )));
    }
    if let Some(&n) = n_grid.iter().find(|&&n| !(n >= 1e3) || !n.is_finite()) {
        return Err(PhaseError::IllConditioned(format!(
            "grid point n = {n} is outside the asymptotic regime (n >= 1e3)"
        )));
    }
    let mut xs = Vec::with_capacity(n_grid.len());
    let mut ys = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let e = SqueezedEnsemble::from_photons(n, copies)?;
        let d = fidelity_series(&e, cfg)?.infidelity;
        let y = if copies == 4 {
            n * n * d - 0.125 * n.ln()
        } else {
            d * n.powf(0.5 * copies as f64)
        };
        xs.push(n.powf(-0.5));
        ys.push(y);
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let spread = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(sxx > 0.0) || spread < 1e-6 * mx {
        return Err(PhaseError::IllConditioned("grid points are not distinct enough".into()));
    }
    let correction = sxy / sxx;
    let xi = my - correction * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - xi - correction * x).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(XiEstimate {
        copies,
        xi,
        correction,
        residual,
        points: xs.len(),
    })
}
