//! Optimal Bayesian phase estimation with squeezed vacuum states.
//!
//! The crate computes the best achievable fidelity `F = |<e^{2i(θ-θ̂)}>|`
//! and Holevo variance `V = F^-2 - 1` for `N` identical squeezed vacuum
//! states (and the coherent-state baseline), the asymptotic laws that
//! govern them, the Fisher information of the canonical phase measurement,
//! Monte Carlo checks of repeated individual measurements and the optimal
//! way to split a fixed photon budget across copies.
//!
//! ```
//! use svs_phase::svs::SqueezedEnsemble;
//! use svs_phase::special_fn::EvalConfig;
//!
//! let e = SqueezedEnsemble::from_photons(1.0, 2).unwrap();
//! let r = svs_phase::svs::fidelity_series(&e, &EvalConfig::default()).unwrap();
//! assert!((r.fidelity - 0.5f64.sqrt()).abs() < 1e-12);
//! ```

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coherent;
pub mod error;
pub mod fisher;
pub mod output;
pub mod planner;
pub mod precision;
pub mod quadrature;
pub mod simulate;
pub mod special_fn;
pub mod svs;

mod sum;

pub use error::{PhaseError, Result};
pub use precision::{Method, PrecisionResult, RegimeAdvisory};
