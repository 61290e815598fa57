//! Writes the hub scenario of the five-bus fixture as free MPS, reads it
//! back and solves both copies.
//!
//! cargo run --release --example export_lp [path.mps]

use std::path::Path;

use storval::formulation::{build_problem, read_mps, write_mps};
use storval::ingest::{parse_network_bundle, parse_scenario, resample_snapshots};
use storval::solver::{solve, SolverOptions};

fn main() -> anyhow::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let network = resample_snapshots(&parse_network_bundle(root.join("five-bus"))?, 8)?;
    let scenario = parse_scenario(root.join("scenarios/h2_hub.cfg"))?;
    let lp = build_problem(&network, &scenario)?;
    let text = write_mps(&lp, "five_bus_h2_hub");
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, &text)?;
        println!("wrote {path}");
    }
    println!(
        "{} columns, {} rows, {} nonzeros, {} bytes of MPS",
        lp.n_vars(),
        lp.n_rows(),
        lp.triplets.len(),
        text.len()
    );
    let back = read_mps(&text)?;
    let opts = SolverOptions::default();
    let a = solve(&lp, &opts)?;
    let b = solve(&back, &opts)?;
    println!("built {:.6e}, reread {:.6e} EUR", a.objective, b.objective);
    Ok(())
}
