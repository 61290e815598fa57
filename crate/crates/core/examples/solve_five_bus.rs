//! Solves the five-bus fixture under every storage scenario and prints
//! cost, certificate residuals and storage expansion.
//!
//! cargo run --release --example solve_five_bus [resample_step]

use std::path::Path;

use storval::analysis::component_mpi;
use storval::ingest::{parse_network_bundle, parse_scenario, resample_snapshots, StorageMode};
use storval::run::solve_scenario;

fn main() -> anyhow::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut network = parse_network_bundle(root.join("five-bus"))?;
    if let Some(step) = std::env::args().nth(1) {
        network = resample_snapshots(&network, step.parse()?)?;
    }
    for mode in StorageMode::ALL {
        let scenario = parse_scenario(root.join(format!("scenarios/{mode}.cfg")))?;
        let run = solve_scenario(&network, &scenario)?;
        println!(
            "{mode}: {} cost {:.4e} EUR, {} vars, {} rows, {} iterations, {:.2}s",
            run.solution.status.as_str(),
            run.solution.objective,
            run.lp.n_vars(),
            run.lp.n_rows(),
            run.solution.iterations,
            run.timings.solve_seconds
        );
        if let Some(c) = &run.certificate {
            println!(
                "  kkt: primal {:.1e}, dual {:.1e}, compl {:.1e}, gap {:.1e}, passed {}",
                c.max_primal_residual, c.max_dual_residual, c.max_complementarity, c.duality_gap, c.passed
            );
        }
        for (component, mpi) in component_mpi(&run.result, &network) {
            println!("  {component:<28} {mpi:>12.1}");
        }
    }
    Ok(())
}
