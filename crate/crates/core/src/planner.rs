//! Splitting a fixed photon budget `E = nN` over `N` identical squeezed
//! vacuum copies.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PhaseError, Result};
use crate::precision::Method;
use crate::special_fn::EvalConfig;
use crate::svs::{self, SqueezedEnsemble};

pub const DEFAULT_MAX_COPIES: u32 = 32;
/// Relative gap below which two variances count as tied.
pub const DEFAULT_TIE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitOptions {
    pub method: Method,
    /// Candidates within this relative distance of the minimum are tied,
    /// and the smallest tied `N` wins.
    pub tie_rel_tol: f64,
    pub eval: EvalConfig,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions {
            method: Method::Integral,
            tie_rel_tol: DEFAULT_TIE_REL_TOL,
            eval: EvalConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub copies: u32,
    pub n: f64,
    pub fidelity: f64,
    pub holevo_variance: f64,
    /// `E² V`
    pub rescaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitPlan {
    pub energy: f64,
    pub optimal_copies: u32,
    pub per_copy_n: f64,
    pub variance_at_optimum: f64,
    pub method: Method,
    /// One row per `N = 1..=N_max`, sorted by `N`.
    pub scan: Vec<ScanRow>,
}

impl SplitPlan {
    pub fn row(&self, copies: u32) -> Option<&ScanRow> {
        self.scan.get(copies.checked_sub(1)? as usize)
    }
}

/// Variance of every split of `energy` into `N = 1..=max_copies` copies.
pub fn scan_energy(energy: f64, max_copies: u32, method: Method, eval: &EvalConfig) -> Result<Vec<ScanRow>> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(PhaseError::domain("energy must be finite and > 0", energy));
    }
    if max_copies == 0 {
        return Err(PhaseError::InvalidConfig("max copies must be >= 1".into()));
    }
    if !matches!(method, Method::Series | Method::Integral) {
        return Err(PhaseError::InvalidConfig(format!(
            "energy splitting needs an exact method, got {method}"
        )));
    }
    (1..=max_copies)
        .into_par_iter()
        .map(|copies| {
            let n = energy / copies as f64;
            let point = || -> Result<ScanRow> {
                let e = SqueezedEnsemble::from_photons(n, copies)?;
                let r = svs::holevo_variance(&e, method, eval)?;
                Ok(ScanRow {
                    copies,
                    n,
                    fidelity: r.fidelity,
                    holevo_variance: r.holevo_variance,
                    rescaled: energy * energy * r.holevo_variance,
                })
            };
            point().map_err(|source| PhaseError::ScanPoint {
                copies,
                n,
                source: Box::new(source),
            })
        })
        .collect()
}

pub fn optimal_split(energy: f64, max_copies: u32, method: Method) -> Result<SplitPlan> {
    optimal_split_with(
        energy,
        max_copies,
        &SplitOptions {
            method,
            ..SplitOptions::default()
        },
    )
}

pub fn optimal_split_with(energy: f64, max_copies: u32, opts: &SplitOptions) -> Result<SplitPlan> {
    if !(opts.tie_rel_tol >= 0.0 && opts.tie_rel_tol < 1.0) {
        return Err(PhaseError::InvalidConfig(format!(
            "tie tolerance must lie in [0, 1), got {}",
            opts.tie_rel_tol
        )));
    }
    let scan = scan_energy(energy, max_copies, opts.method, &opts.eval)?;
    let min = scan.iter().map(|r| r.holevo_variance).fold(f64::INFINITY, f64::min);
    let best = scan
        .iter()
        .find(|r| r.holevo_variance <= min * (1.0 + opts.tie_rel_tol))
        .expect("scan is non-empty");
    debug_assert!(scan.iter().all(|r| best.holevo_variance <= r.holevo_variance * (1.0 + opts.tie_rel_tol)));
    Ok(SplitPlan {
        energy,
        optimal_copies: best.copies,
        per_copy_n: best.n,
        variance_at_optimum: best.holevo_variance,
        method: opts.method,
        scan,
    })
}

/// Where the optimal copy number fails to grow with the energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    /// `(energy, optimal N)` along the grid.
    pub path: Vec<(f64, u32)>,
    /// Consecutive grid pairs where the optimum decreased.
    pub decreases: Vec<(f64, f64)>,
}

impl MonotonicityReport {
    pub fn is_non_decreasing(&self) -> bool {
        self.decreases.is_empty()
    }
}

/// Tracks the optimal `N` across an energy grid. Never fails on a
/// decrease, it only records it.
pub fn monotonicity_check(energies: &[f64], max_copies: u32, opts: &SplitOptions) -> Result<MonotonicityReport> {
    let path = energies
        .iter()
        .map(|&e| optimal_split_with(e, max_copies, opts).map(|p| (e, p.optimal_copies)))
        .collect::<Result<Vec<_>>>()?;
    let decreases = path
        .windows(2)
        .filter(|w| w[1].1 < w[0].1)
        .map(|w| (w[0].0, w[1].0))
        .collect();
    Ok(MonotonicityReport { path, decreases })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimum_is_the_minimum_of_the_scan() {
        let plan = optimal_split(40.0, 16, Method::Series).unwrap();
        assert_eq!(plan.scan.len(), 16);
        assert!(plan.scan.iter().all(|r| plan.variance_at_optimum <= r.holevo_variance));
        assert!((plan.per_copy_n * plan.optimal_copies as f64 - 40.0).abs() < 1e-12 * 40.0);
        assert_eq!(plan.row(plan.optimal_copies).unwrap().holevo_variance, plan.variance_at_optimum);
        for (i, r) in plan.scan.iter().enumerate() {
            assert_eq!(r.copies as usize, i + 1);
        }
    }

    #[test]
    fn single_copy_budget() {
        let plan = optimal_split(3.0, 1, Method::Series).unwrap();
        assert_eq!(plan.optimal_copies, 1);
        assert_eq!(plan.per_copy_n, 3.0);
    }

    #[test]
    fn loose_tolerance_prefers_fewer_copies() {
        let opts = SplitOptions {
            method: Method::Series,
            tie_rel_tol: 1e-2,
            ..SplitOptions::default()
        };
        let plan = optimal_split_with(1e-3, 8, &opts).unwrap();
        assert_eq!(plan.optimal_copies, 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(optimal_split(0.0, 8, Method::Series).is_err());
        assert!(optimal_split(1.0, 0, Method::Series).is_err());
        assert!(optimal_split(1.0, 8, Method::Asymptotic).is_err());
        let opts = SplitOptions {
            tie_rel_tol: -1.0,
            ..SplitOptions::default()
        };
        assert!(optimal_split_with(1.0, 8, &opts).is_err());
    }

    #[test]
    fn rescaled_column() {
        let rows = scan_energy(10.0, 4, Method::Series, &EvalConfig::default()).unwrap();
        for r in rows {
            assert!((r.rescaled - 100.0 * r.holevo_variance).abs() <= 1e-12 * r.rescaled);
        }
    }
}
