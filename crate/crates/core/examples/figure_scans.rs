//! Writes the two figure datasets (NV against n, E^2 V against E) as CSV
//! through the command-line front end.
//!
//! ```text
//! cargo run --release --example figure_scans -- out_dir
//! ```

use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    std::fs::create_dir_all(&dir).expect("create output directory");
    let nv = dir.join("scaled_variance.csv");
    let e2v = dir.join("rescaled_energy.csv");

    let runs: [Vec<String>; 2] = [
        ["svs-phase", "scan-n", "--copies-list", "1,2,3,4,5,6", "--n-min", "1e-3", "--n-max", "1e3", "--points", "121", "--out"]
            .iter()
            .map(|s| s.to_string())
            .chain([nv.display().to_string()])
            .collect(),
        ["svs-phase", "scan-energy", "--copies-list", "1,2,3,4,5,6,7,8,9,10,11,12", "--E-min", "1e-2", "--E-max", "1e4", "--points", "121", "--out"]
            .iter()
            .map(|s| s.to_string())
            .chain([e2v.display().to_string()])
            .collect(),
    ];
    for args in runs {
        let code = svs_phase::cli::run(&args);
        if code != 0 {
            std::process::exit(code);
        }
        println!("wrote {}", args.last().unwrap());
    }
}
