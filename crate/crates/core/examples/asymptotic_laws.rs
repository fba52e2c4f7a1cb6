//! Exact variance against the large-n, large-N and weak-squeezing laws, and
//! a refit of the large-n coefficients xi_N.
//!
//! ```text
//! cargo run --release --example asymptotic_laws
//! ```

use svs_phase::special_fn::EvalConfig;
use svs_phase::svs::{self, SqueezedEnsemble, DEFAULT_XI_GRID, XI_TABLE};
use svs_phase::Method;

fn main() -> svs_phase::Result<()> {
    let cfg = EvalConfig::default();

    println!("large n, (dtheta)^2 exact / law:");
    for copies in 1..=8u32 {
        let row: Vec<String> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&n| {
                let e = SqueezedEnsemble::from_photons(n, copies).unwrap();
                let exact = svs::fidelity_series(&e, &cfg).unwrap().stat_variance;
                format!("{:.4}", exact / svs::variance_asymptotic_large_n(&e))
            })
            .collect();
        println!("  N = {copies}: {}", row.join("  "));
    }

    println!("many copies, (dtheta)^2 exact / (1/(8n(n+1)N)):");
    for n in [0.5, 1.0, 4.0] {
        let row: Vec<String> = [10u32, 100, 1000]
            .iter()
            .map(|&c| {
                let e = SqueezedEnsemble::from_photons(n, c).unwrap();
                let exact = svs::fidelity_series(&e, &cfg).unwrap().stat_variance;
                format!("{:.4}", exact / svs::variance_large_n(&e).unwrap())
            })
            .collect();
        println!("  n = {n}: {}", row.join("  "));
    }

    println!("weak squeezing, V nN at nN = 1e-3:");
    for copies in [1, 2, 4, 8] {
        let e = SqueezedEnsemble::from_photons(1e-3 / copies as f64, copies)?;
        let exact = svs::evaluate(&e, Method::Series, &cfg)?;
        let approx = svs::evaluate(&e, Method::SmallSqueezing, &cfg)?;
        println!(
            "  N = {copies}: exact {:.5}, law {:.5}",
            exact.holevo_variance * 1e-3,
            approx.holevo_variance * 1e-3
        );
    }

    println!("xi_N refit on n = {DEFAULT_XI_GRID:?}:");
    for copies in 1..=4u32 {
        let fit = svs::estimate_xi(copies, &DEFAULT_XI_GRID, &cfg)?;
        println!(
            "  xi_{copies} = {:.4} (tabulated {:.2}), correction {:+.3}/sqrt(n), rms {:.1e}",
            fit.xi,
            XI_TABLE[copies as usize - 1],
            fit.correction,
            fit.residual
        );
    }
    Ok(())
}
