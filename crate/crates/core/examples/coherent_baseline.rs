//! Coherent-state baseline against squeezed vacuum at equal energy.
//!
//! ```text
//! cargo run --example coherent_baseline
//! ```

use svs_phase::coherent::{self, CoherentEnsemble};
use svs_phase::special_fn::EvalConfig;
use svs_phase::svs::{self, SqueezedEnsemble};

fn main() -> svs_phase::Result<()> {
    let cfg = EvalConfig::default();
    println!("{:>8} {:>4} {:>14} {:>14} {:>12} {:>14}", "n", "N", "V coherent", "V squeezed", "n(1-F_coh)", "1/(4nN)");
    for n in [0.1, 1.0, 10.0, 100.0, 1000.0] {
        for copies in [1, 4] {
            let c = coherent::fidelity_series(&CoherentEnsemble::new(n, copies)?, &cfg)?;
            let s = svs::fidelity_series(&SqueezedEnsemble::from_photons(n, copies)?, &cfg)?;
            let limit = coherent::variance_asymptotic(&CoherentEnsemble::new(n, copies)?)?;
            println!(
                "{n:>8} {copies:>4} {:>14.6e} {:>14.6e} {:>12.6} {:>14.6e}",
                c.holevo_variance,
                s.holevo_variance,
                n * copies as f64 * c.infidelity,
                limit
            );
        }
    }

    // N copies of |alpha> are one copy of |sqrt(N) alpha>.
    let a = coherent::fidelity_series(&CoherentEnsemble::new(2.0, 5)?, &cfg)?;
    let b = coherent::fidelity_series(&CoherentEnsemble::new(10.0, 1)?, &cfg)?;
    println!("F(2, 5) = {:.15}, F(10, 1) = {:.15}", a.fidelity, b.fidelity);
    let i = coherent::fidelity_integral(&CoherentEnsemble::new(10.0, 1)?)?;
    println!("integral form: {:.15}", i.fidelity);
    Ok(())
}
