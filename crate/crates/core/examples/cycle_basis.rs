//! Independent cycles of the five-bus grid and the voltage-law rows they
//! induce, with the cycle sums of an optimal dispatch.
//!
//! cargo run --release --example cycle_basis

use std::path::Path;

use storval::graph::{connected_components, cycle_basis, incidence_matrix};
use storval::ingest::{parse_network_bundle, parse_scenario, resample_snapshots};
use storval::run::solve_scenario;

fn main() -> anyhow::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let network = resample_snapshots(&parse_network_bundle(root.join("five-bus"))?, 8)?;
    let k = incidence_matrix(&network);
    let basis = cycle_basis(&network);
    let mut components = connected_components(&network);
    components.sort();
    components.dedup();
    println!(
        "{} buses, {} lines, {} components: {} independent cycles",
        network.buses.len(),
        k.n_lines(),
        components.len(),
        basis.len()
    );
    println!("closed under the incidence matrix: {}", basis.is_closed_under(&k));
    for (c, cycle) in basis.cycles.iter().enumerate() {
        let terms: Vec<String> =
            cycle.iter().map(|&(l, s)| format!("{}{}", if s > 0 { "+" } else { "-" }, network.lines[l].id)).collect();
        println!("  cycle {c}: {}", terms.join(" "));
    }

    let run = solve_scenario(&network, &parse_scenario(root.join("scenarios/variable_ep.cfg"))?)?;
    let mut worst: f64 = 0.0;
    for cycle in &basis.cycles {
        for t in 0..network.snapshots.len() {
            let sum: f64 =
                cycle.iter().map(|&(l, s)| s as f64 * network.lines[l].reactance * run.result.lines[l].flow[t]).sum();
            worst = worst.max(sum.abs());
        }
    }
    println!("largest reactance-weighted cycle sum of the optimal flows: {worst:.2e}");
    Ok(())
}
