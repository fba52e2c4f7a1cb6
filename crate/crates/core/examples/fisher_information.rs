//! Fisher information of the canonical phase measurement on one squeezed
//! vacuum copy, and the Cramer-Rao bound it implies.
//!
//! ```text
//! cargo run --release --example fisher_information
//! ```

use svs_phase::fisher::{self, PhaseDensity};

fn main() -> svs_phase::Result<()> {
    println!("{:>7} {:>10} {:>14} {:>10} {:>12} {:>12}", "beta", "n", "I", "I(1-b)^2", "n^2/I", "7/24");
    for beta in [0.5, 0.8, 0.9, 0.95, 0.99, 0.995, 0.999] {
        let pd = PhaseDensity::new(beta)?;
        let r = fisher::fisher_numeric(&pd)?;
        let n = pd.n();
        println!(
            "{beta:>7} {n:>10.3} {:>14.6} {:>10.6} {:>12.6} {:>12.6}",
            r.info,
            r.info * (1.0 - beta) * (1.0 - beta),
            n * n / r.info,
            7.0 / 24.0
        );
    }

    let pd = PhaseDensity::from_photons(5.0)?;
    println!("outcome density at n = 5 (theta = 0):");
    for phi in [0.0, 0.05, 0.1, 0.2, 0.5, 1.0, std::f64::consts::FRAC_PI_2] {
        println!(
            "  phi = {phi:.3}: p = {:.6}, Stirling form {:.6}, leading form {:.6}",
            pd.density(phi, 0.0),
            fisher::stirling_density(&pd, phi),
            fisher::leading_density(&pd, phi)
        );
    }
    println!(
        "Cramer-Rao at n = 5, N = 2000: finite-n {:.4e}, large-n law {:.4e}",
        fisher::cramer_rao_exact(&pd, 2000)?,
        fisher::cramer_rao(5.0, 2000)?
    );
    Ok(())
}
