//! Fidelity and Holevo variance of N squeezed vacuum copies, by series and
//! by integral.
//!
//! ```text
//! cargo run --example squeezed_fidelity -- 2.5 4
//! ```

use svs_phase::special_fn::EvalConfig;
use svs_phase::svs::{self, SqueezedEnsemble};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1.0);
    let copies: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);

    let e = SqueezedEnsemble::from_photons(n, copies)?;
    println!("n = {n}, N = {copies}, beta = {:.12}, squeezing r = {:.6}", e.beta(), e.squeezing());
    println!("pair number: mean {:.6}, variance {:.6}", svs::negbin_mean(&e), svs::negbin_variance(&e));

    let s = svs::fidelity_series(&e, &EvalConfig::default())?;
    let i = svs::fidelity_integral(&e)?;
    for r in [&s, &i] {
        println!(
            "{:>9}: F = {:.15}  1-F = {:.6e}  V = {:.6e}  (dtheta)^2 = {:.6e}  err ~ {:.1e}",
            r.method.as_str(),
            r.fidelity,
            r.infidelity,
            r.holevo_variance,
            r.stat_variance,
            r.err_est
        );
    }
    println!("relative gap: {:.2e}", (s.fidelity - i.fidelity).abs() / s.fidelity);

    // Two copies are exactly solvable: F = beta.
    let two = svs::fidelity_series(&SqueezedEnsemble::from_photons(n, 2)?, &EvalConfig::default())?;
    println!("N = 2 check: F = {:.15}, beta = {:.15}", two.fidelity, e.beta());
    Ok(())
}
