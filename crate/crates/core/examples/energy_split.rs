//! How many copies to split a photon budget into.
//!
//! ```text
//! cargo run --release --example energy_split
//! ```

use svs_phase::planner::{self, SplitOptions};
use svs_phase::Method;

fn main() -> svs_phase::Result<()> {
    for energy in [1e-2, 1.0, 10.0, 40.0, 100.0, 1e3, 1e4] {
        let plan = planner::optimal_split(energy, 32, Method::Integral)?;
        println!(
            "E = {energy:>8}: N = {:>2}, n = {:>10.4}, E^2 V = {:.5}",
            plan.optimal_copies,
            plan.per_copy_n,
            plan.energy * plan.energy * plan.variance_at_optimum
        );
    }

    let plan = planner::optimal_split(1e4, 12, Method::Integral)?;
    println!("scan at E = 1e4:");
    for r in &plan.scan {
        println!("  N = {:>2}: E^2 V = {:.5}", r.copies, r.rescaled);
    }

    // At weak squeezing every split is within a fraction of a percent.
    let loose = SplitOptions {
        tie_rel_tol: 1e-2,
        ..SplitOptions::default()
    };
    let plan = planner::optimal_split_with(1e-3, 8, &loose)?;
    println!("E = 1e-3 with 1% ties: N = {}", plan.optimal_copies);

    let energies: Vec<f64> = (0..=12).map(|i| 10f64.powf(-2.0 + 0.5 * i as f64)).collect();
    let report = planner::monotonicity_check(&energies, 32, &SplitOptions::default())?;
    println!("optimal N along E: {:?}", report.path.iter().map(|p| p.1).collect::<Vec<_>>());
    Ok(())
}
