//! Monte Carlo of repeated, non-adaptive canonical measurements on `N`
//! copies: draw outcomes, build an estimate, accumulate the doubled-phase
//! phasor `e^{2i(θ-θ̂)}`.
//!
//! Outcomes are drawn by inverting a tabulated CDF. The CDF of `p(φ|0)` is
//! known in closed form as a sine series whose coefficients are the
//! autocorrelations of the amplitude coefficients, so table nodes are exact
//! and only the linear interpolation between them is approximate.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PhaseError, Result};
use crate::fisher::PhaseDensity;
use crate::sum::CompensatedSum;

/// Nodes on each half of `[0, π]` before refinement (8192 cells total).
const HALF_NODES: usize = 4096;
/// Maximum allowed linear-interpolation error of the CDF table.
pub const CDF_INTERP_TOL: f64 = 1e-9;
const MAX_TABLE_NODES: usize = 1 << 22;

/// Coarse maximum-likelihood grid size before auto-doubling.
pub const ML_GRID: usize = 512;
/// Golden-section stopping width.
pub const ML_TOL: f64 = 1e-10;
/// Log-likelihood spread below which the landscape counts as flat.
const ML_FLAT: f64 = 1e-9;

const BOOTSTRAP_RESAMPLES: usize = 500;
const BOOTSTRAP_STREAM: u64 = u64::MAX;

/// Inverse-CDF sampler for the canonical-measurement outcome.
#[derive(Debug, Clone)]
pub struct PhaseSampler {
    /// `b_m = √(1-β²)/π · R_m/m`, `R_m = Σ_k c_k c_{k+m}`.
    sine: Vec<f64>,
    norm: f64,
    nodes: Vec<f64>,
    cdf: Vec<f64>,
    max_interp_error: f64,
}

impl PhaseSampler {
    pub fn new(pd: &PhaseDensity) -> Result<Self> {
        let c = pd.coefficients();
        let k = c.len();
        let pref_sq = pd.prefactor() * pd.prefactor();
        let sine: Vec<f64> = (1..k)
            .into_par_iter()
            .map(|m| {
                let mut r = CompensatedSum::default();
                for j in 0..k - m {
                    r.add(c[j] * c[j + m]);
                }
                pref_sq * r.value() / m as f64
            })
            .collect();
        let mut sq = CompensatedSum::default();
        c.iter().for_each(|&x| sq.add(x * x));
        let norm = pref_sq * PI * sq.value();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(PhaseError::InvalidConfig(format!(
                "outcome density normalises to {norm}, not 1"
            )));
        }
        let mut sampler = PhaseSampler {
            sine,
            norm,
            nodes: Vec::new(),
            cdf: Vec::new(),
            max_interp_error: 0.0,
        };
        sampler.build_table(pd.beta())?;
        Ok(sampler)
    }

    /// Exact CDF of `p(·|0)` on `[0, π]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let z = Complex64::from_polar(1.0, 2.0 * x);
        let mut s = Complex64::new(0.0, 0.0);
        for &b in self.sine.iter().rev() {
            s = (s + b) * z;
        }
        (x / PI + s.im) / self.norm
    }

    fn build_table(&mut self, beta: f64) -> Result<()> {
        // Exponentially stretched nodes, dense within ~(1-β) of the peaks at
        // 0 and π.
        let width = (1.0 - beta).max(1e-12);
        let stretch = (1.0 + 0.5 * PI / width).ln();
        let half: Vec<f64> = (0..=HALF_NODES)
            .map(|j| {
                let x = width * ((stretch * j as f64 / HALF_NODES as f64).exp() - 1.0);
                x.min(0.5 * PI)
            })
            .collect();
        let mut nodes = half.clone();
        nodes.extend(half.iter().rev().skip(1).map(|x| PI - x));
        nodes[HALF_NODES] = 0.5 * PI;
        *nodes.last_mut().expect("non-empty") = PI;

        let mut values: Vec<f64> = nodes.par_iter().map(|&x| self.cdf(x)).collect();
        values[0] = 0.0;
        *values.last_mut().expect("non-empty") = 1.0;

        loop {
            let checks: Vec<(f64, f64, f64)> = nodes
                .par_windows(2)
                .zip(values.par_windows(2))
                .map(|(x, c)| {
                    let mid = 0.5 * (x[0] + x[1]);
                    let exact = self.cdf(mid);
                    let err = (exact - 0.5 * (c[0] + c[1])).abs();
                    (mid, exact, err)
                })
                .collect();
            let worst = checks.iter().map(|c| c.2).fold(0.0, f64::max);
            if worst <= CDF_INTERP_TOL {
                self.max_interp_error = worst;
                break;
            }
            if nodes.len() * 2 > MAX_TABLE_NODES {
                return Err(PhaseError::NonConvergence {
                    what: "outcome CDF table refinement",
                    reached: nodes.len(),
                });
            }
            let mut new_nodes = Vec::with_capacity(nodes.len() * 2);
            let mut new_values = Vec::with_capacity(nodes.len() * 2);
            for (i, &(mid, exact, err)) in checks.iter().enumerate() {
                new_nodes.push(nodes[i]);
                new_values.push(values[i]);
                if err > CDF_INTERP_TOL {
                    new_nodes.push(mid);
                    new_values.push(exact);
                }
            }
            new_nodes.push(PI);
            new_values.push(1.0);
            nodes = new_nodes;
            values = new_values;
        }
        self.nodes = nodes;
        self.cdf = values;
        Ok(())
    }

    pub fn table_len(&self) -> usize {
        self.nodes.len()
    }

    /// Largest midpoint interpolation error found during construction.
    pub fn max_interp_error(&self) -> f64 {
        self.max_interp_error
    }

    /// Maps `u ∈ [0, 1)` to an outcome of `p(·|0)`.
    pub fn invert(&self, u: f64) -> f64 {
        let j = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1) - 1;
        let (c0, c1) = (self.cdf[j], self.cdf[j + 1]);
        let (x0, x1) = (self.nodes[j], self.nodes[j + 1]);
        if c1 <= c0 {
            return x0;
        }
        x0 + (u - c0) / (c1 - c0) * (x1 - x0)
    }

    /// Draws an outcome `φ ∈ [0, π)` for true phase `theta`.
    pub fn sample<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> f64 {
        (self.invert(rng.random::<f64>()) + theta).rem_euclid(PI)
    }
}

/// One outcome of the canonical measurement; see [`PhaseSampler::sample`].
pub fn sample_outcome<R: Rng + ?Sized>(sampler: &PhaseSampler, theta: f64, rng: &mut R) -> f64 {
    sampler.sample(theta, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    CircularMean,
    MaxLikelihood,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::CircularMean => "circular_mean",
            Estimator::MaxLikelihood => "max_likelihood",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub theta: f64,
    /// The likelihood was flat and the circular mean was returned instead.
    pub fallback: bool,
}

/// `½ arg Σ e^{2iφ_j}`, in `[0, π)`.
pub fn circular_mean(samples: &[f64]) -> f64 {
    let (s, c) = samples
        .iter()
        .fold((0.0, 0.0), |(s, c), &phi| (s + (2.0 * phi).sin(), c + (2.0 * phi).cos()));
    (0.5 * s.atan2(c)).rem_euclid(PI)
}

/// Periodic cubic-Hermite table of `ln p(ψ|0)` on `[0, π)`.
#[derive(Debug, Clone)]
struct LogDensityTable {
    step: f64,
    value: Vec<f64>,
    slope: Vec<f64>,
}

impl LogDensityTable {
    fn new(pd: &PhaseDensity) -> Self {
        let width = (1.0 - pd.beta()).max(1e-12);
        let size = ((64.0 * PI / width).ceil() as usize).max(4096).next_power_of_two();
        let step = PI / size as f64;
        let (value, slope): (Vec<f64>, Vec<f64>) = (0..size)
            .into_par_iter()
            .map(|j| pd.log_density_with_derivative(j as f64 * step))
            .unzip();
        LogDensityTable { step, value, slope }
    }

    fn eval(&self, psi: f64) -> f64 {
        let size = self.value.len();
        let x = psi.rem_euclid(PI) / self.step;
        let j = (x.floor() as usize).min(size - 1);
        let t = x - j as f64;
        let j1 = (j + 1) % size;
        let (y0, y1) = (self.value[j], self.value[j1]);
        let (m0, m1) = (self.slope[j] * self.step, self.slope[j1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    }
}

/// Builds phase estimates from outcome samples. The likelihood table is
/// built once and reused across calls.
#[derive(Debug, Clone)]
pub struct PhaseEstimator {
    table: LogDensityTable,
    grid: usize,
}

impl PhaseEstimator {
    pub fn new(pd: &PhaseDensity) -> Self {
        // The likelihood peak is ~(1-β) wide; keep grid spacing below a
        // quarter of that.
        let mut grid = ML_GRID;
        let width = 1.0 - pd.beta();
        while PI / grid as f64 >= width / 4.0 && grid < (1 << 24) {
            grid *= 2;
        }
        PhaseEstimator {
            table: LogDensityTable::new(pd),
            grid,
        }
    }

    pub fn grid_size(&self) -> usize {
        self.grid
    }

    pub fn log_likelihood(&self, samples: &[f64], theta: f64) -> f64 {
        samples.iter().map(|&phi| self.table.eval(phi - theta)).sum()
    }

    pub fn estimate(&self, samples: &[f64], method: Estimator) -> Result<Estimate> {
        if samples.is_empty() {
            return Err(PhaseError::InvalidConfig("estimation needs at least one sample".into()));
        }
        match method {
            Estimator::CircularMean => Ok(Estimate {
                theta: circular_mean(samples),
                fallback: false,
            }),
            Estimator::MaxLikelihood => Ok(self.max_likelihood(samples)),
        }
    }

    fn max_likelihood(&self, samples: &[f64]) -> Estimate {
        let h = PI / self.grid as f64;
        let mut best = (0usize, f64::NEG_INFINITY);
        let mut lowest = f64::INFINITY;
        for j in 0..self.grid {
            let l = self.log_likelihood(samples, j as f64 * h);
            if l > best.1 {
                best = (j, l);
            }
            lowest = lowest.min(l);
        }
        if best.1 - lowest < ML_FLAT {
            return Estimate {
                theta: circular_mean(samples),
                fallback: true,
            };
        }
        let centre = best.0 as f64 * h;
        let theta = golden_section_max(|t| self.log_likelihood(samples, t), centre - h, centre + h, ML_TOL);
        Estimate {
            theta: theta.rem_euclid(PI),
            fallback: false,
        }
    }
}

/// Estimate from samples with a freshly built estimator.
pub fn estimate(samples: &[f64], method: Estimator, pd: &PhaseDensity) -> Result<Estimate> {
    PhaseEstimator::new(pd).estimate(samples, method)
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialConfig {
    /// Mean photon number per copy.
    pub n: f64,
    pub copies: u32,
    pub trials: u32,
    pub seed: u64,
    pub estimator: Estimator,
    /// True phase in `[0, π)`.
    pub theta_true: f64,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.n.is_finite() && self.n >= 0.0) {
            return Err(PhaseError::domain("mean photon number must be finite and >= 0", self.n));
        }
        if self.copies == 0 {
            return Err(PhaseError::InvalidConfig("copies must be >= 1".into()));
        }
        if self.trials == 0 {
            return Err(PhaseError::InvalidConfig("trials must be >= 1".into()));
        }
        if !(0.0..PI).contains(&self.theta_true) {
            return Err(PhaseError::domain("theta must lie in [0, pi)", self.theta_true));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub config: TrialConfig,
    /// `|⟨e^{2i(θ-θ̂)}⟩|` over trials.
    pub empirical_fidelity: f64,
    pub empirical_holevo_variance: f64,
    /// `V̂/4`.
    pub stat_variance: f64,
    /// Mean of `(θ-θ̂)²` with the error wrapped into `[-π/2, π/2)`.
    pub mean_sq_error: f64,
    /// `Im⟨e^{2i(θ-θ̂)}⟩`, zero for an unbiased estimator.
    pub im_residual: f64,
    /// `Re⟨e^{2i(θ-θ̂)}⟩`, non-negative for an unbiased estimator.
    pub re_residual: f64,
    /// Bootstrap 95% half-width of the Holevo variance.
    pub ci_halfwidth: f64,
    pub ml_fallbacks: u32,
}

struct TrialOutcome {
    phasor: Complex64,
    sq_error: f64,
    fallback: bool,
}

/// Runs `trials` independent experiments of `copies` measurements each.
///
/// Trial `i` draws from ChaCha8 stream `i` of the master seed, so results
/// do not depend on scheduling, and the reduction runs in trial order.
pub fn run_trials(tc: &TrialConfig) -> Result<TrialReport> {
    tc.validate()?;
    let pd = PhaseDensity::from_photons(tc.n)?;
    let sampler = PhaseSampler::new(&pd)?;
    let estimator = match tc.estimator {
        Estimator::MaxLikelihood => Some(PhaseEstimator::new(&pd)),
        Estimator::CircularMean => None,
    };

    let outcomes: Vec<TrialOutcome> = (0..tc.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
            rng.set_stream(i as u64);
            let samples: Vec<f64> = (0..tc.copies).map(|_| sampler.sample(tc.theta_true, &mut rng)).collect();
            let est = match &estimator {
                Some(e) => e.estimate(&samples, Estimator::MaxLikelihood)?,
                None => Estimate {
                    theta: circular_mean(&samples),
                    fallback: false,
                },
            };
            let delta = tc.theta_true - est.theta;
            let wrapped = (delta + 0.5 * PI).rem_euclid(PI) - 0.5 * PI;
            Ok(TrialOutcome {
                phasor: Complex64::from_polar(1.0, 2.0 * delta),
                sq_error: wrapped * wrapped,
                fallback: est.fallback,
            })
        })
        .collect::<Result<_>>()?;

    let t = outcomes.len() as f64;
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    let mut sq = CompensatedSum::default();
    for o in &outcomes {
        re.add(o.phasor.re);
        im.add(o.phasor.im);
        sq.add(o.sq_error);
    }
    let mean = Complex64::new(re.value() / t, im.value() / t);
    let fidelity = mean.norm();
    let holevo = holevo_from_fidelity(fidelity);

    let phasors: Vec<Complex64> = outcomes.iter().map(|o| o.phasor).collect();
    let ci_halfwidth = bootstrap_halfwidth(&phasors, tc.seed);

    Ok(TrialReport {
        config: *tc,
        empirical_fidelity: fidelity,
        empirical_holevo_variance: holevo,
        stat_variance: holevo / 4.0,
        mean_sq_error: sq.value() / t,
        im_residual: mean.im,
        re_residual: mean.re,
        ci_halfwidth,
        ml_fallbacks: outcomes.iter().filter(|o| o.fallback).count() as u32,
    })
}

fn holevo_from_fidelity(f: f64) -> f64 {
    if f > 0.0 {
        f.powi(-2) - 1.0
    } else {
        f64::INFINITY
    }
}

fn bootstrap_halfwidth(phasors: &[Complex64], seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(BOOTSTRAP_STREAM);
    let t = phasors.len();
    let mut stats: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let mut s = Complex64::new(0.0, 0.0);
            for _ in 0..t {
                s += phasors[rng.random_range(0..t)];
            }
            holevo_from_fidelity((s / t as f64).norm())
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let q = |p: f64| stats[((p * (stats.len() - 1) as f64).round() as usize).min(stats.len() - 1)];
    0.5 * (q(0.975) - q(0.025))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cdf_endpoints_and_symmetry() {
        let pd = PhaseDensity::new(0.9).unwrap();
        let s = PhaseSampler::new(&pd).unwrap();
        assert!(s.cdf(0.0).abs() < 1e-14);
        assert_relative_eq!(s.cdf(PI), 1.0, max_relative = 1e-12);
        assert_relative_eq!(s.cdf(0.5 * PI), 0.5, max_relative = 1e-12);
        for x in [0.01, 0.2, 1.0] {
            assert_relative_eq!(s.cdf(x) + s.cdf(PI - x), 1.0, max_relative = 1e-12);
        }
        assert!(s.max_interp_error() <= CDF_INTERP_TOL);
        assert!(s.table_len() >= 8193);
    }

    #[test]
    fn inversion_is_monotone() {
        let pd = PhaseDensity::new(0.95).unwrap();
        let s = PhaseSampler::new(&pd).unwrap();
        let mut prev = -1.0;
        for i in 0..1000 {
            let x = s.invert(i as f64 / 1000.0);
            assert!(x >= prev && (0.0..=PI).contains(&x));
            prev = x;
        }
    }

    #[test]
    fn circular_mean_of_symmetric_samples() {
        let t0 = 1.1;
        let samples = [t0 - 0.2, t0 + 0.2, t0 - 0.05, t0 + 0.05];
        assert_relative_eq!(circular_mean(&samples), t0, max_relative = 1e-12);
        // wraps across 0 ≡ π
        let samples = [0.05, PI - 0.05];
        assert!(circular_mean(&samples).min(PI - circular_mean(&samples)) < 1e-12);
    }

    #[test]
    fn single_sample_estimates() {
        let pd = PhaseDensity::new(0.8).unwrap();
        let est = PhaseEstimator::new(&pd);
        for phi in [0.0, 0.3, 2.9] {
            let ml = est.estimate(&[phi], Estimator::MaxLikelihood).unwrap();
            let d = (ml.theta - phi).rem_euclid(PI);
            assert!(d.min(PI - d) < 1e-8, "{phi} -> {}", ml.theta);
            assert!(!ml.fallback);
            let cm = est.estimate(&[phi], Estimator::CircularMean).unwrap();
            assert!((cm.theta - phi.rem_euclid(PI)).abs() < 1e-12);
        }
        assert!(est.estimate(&[], Estimator::CircularMean).is_err());
    }

    #[test]
    fn flat_likelihood_falls_back() {
        let pd = PhaseDensity::new(0.0).unwrap();
        let est = PhaseEstimator::new(&pd);
        let e = est.estimate(&[0.3, 0.4, 0.5], Estimator::MaxLikelihood).unwrap();
        assert!(e.fallback);
        assert_relative_eq!(e.theta, 0.4, max_relative = 1e-12);
    }

    #[test]
    fn log_table_matches_exact_density() {
        let pd = PhaseDensity::new(0.9).unwrap();
        let table = LogDensityTable::new(&pd);
        for psi in [0.0, 0.0123, 0.2, 1.57, 3.1] {
            let exact = pd.density(psi, 0.0).ln();
            assert!((table.eval(psi) - exact).abs() < 1e-9, "{psi}");
        }
    }

    #[test]
    fn grid_doubles_for_sharp_peaks() {
        let est = PhaseEstimator::new(&PhaseDensity::new(0.5).unwrap());
        assert_eq!(est.grid_size(), ML_GRID);
        let est = PhaseEstimator::new(&PhaseDensity::new(0.996).unwrap());
        assert!(PI / est.grid_size() as f64 <= 0.004 / 4.0);
    }

    #[test]
    fn config_validation() {
        let ok = TrialConfig {
            n: 1.0,
            copies: 3,
            trials: 2,
            seed: 1,
            estimator: Estimator::CircularMean,
            theta_true: 0.2,
        };
        assert!(ok.validate().is_ok());
        assert!(TrialConfig { trials: 0, ..ok }.validate().is_err());
        assert!(TrialConfig { copies: 0, ..ok }.validate().is_err());
        assert!(TrialConfig { theta_true: PI, ..ok }.validate().is_err());
        assert!(TrialConfig { n: -1.0, ..ok }.validate().is_err());
    }
}
