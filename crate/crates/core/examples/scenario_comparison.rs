//! Market potential of every storage component across the three storage
//! scenarios, with the zero, threshold and bigger-is-better verdicts.
//!
//! cargo run --release --example scenario_comparison [resample_step]

use std::path::Path;

use storval::analysis::{component_mpi, evaluate_criteria};
use storval::ingest::{parse_network_bundle, parse_scenario, resample_snapshots, StorageMode};
use storval::run::solve_scenario;

fn main() -> anyhow::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut network = parse_network_bundle(root.join("five-bus"))?;
    let step = std::env::args().nth(1).map_or(Ok(4), |s| s.parse())?;
    network = resample_snapshots(&network, step)?;

    let mut tables = Vec::new();
    let mut threshold = 0.0;
    for mode in StorageMode::ALL {
        let scenario = parse_scenario(root.join(format!("scenarios/{mode}.cfg")))?;
        threshold = scenario.threshold_mw;
        let run = solve_scenario(&network, &scenario)?;
        println!("{mode:<12} total cost {:.4e} EUR", run.solution.objective);
        tables.push((mode.to_string(), component_mpi(&run.result, &network)));
    }

    let pairs = [
        ("h2-low/discharger".to_string(), "h2-high/discharger".to_string()),
        ("h2-low/charger".to_string(), "h2-high/charger".to_string()),
    ];
    let report = evaluate_criteria(&tables, threshold, &pairs)?;
    println!("\n{:<24} {:>12} {:>12} {:>12}  verdict", "component", "fixed_ep", "variable_ep", "h2_hub");
    for v in &report.verdicts {
        let cells: Vec<String> = v.mpi.iter().map(|m| format!("{m:>12.1}")).collect();
        println!("{:<24} {}  {:?}", v.component, cells.join(" "), v.verdict);
    }
    for r in &report.rankings {
        let winners: Vec<&str> = r.winner.iter().map(|w| w.as_deref().unwrap_or("tie")).collect();
        println!("{} vs {}: {}", r.first, r.second, winners.join(", "));
    }
    Ok(())
}
