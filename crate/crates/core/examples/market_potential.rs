//! Market potential of two hydrogen designs on a wind-dominated bus with
//! long lulls: the costlier, more efficient design is the one the system
//! builds.
//!
//! cargo run --release --example market_potential

use std::path::Path;

use storval::analysis::{evaluate_criteria, lcos_report, market_potential, static_lcos, ReferenceStorage};
use storval::ingest::{parse_network_bundle, parse_scenario};
use storval::model::ComponentKind;
use storval::run::solve_scenario;

fn main() -> anyhow::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let network = parse_network_bundle(root.join("hydrogen-toy"))?;
    let scenario = parse_scenario(root.join("scenarios/fixed_ep.cfg"))?;

    for design in [ReferenceStorage::HydrogenLow, ReferenceStorage::HydrogenHigh] {
        println!("static LCOS {:<14} {:.3} EUR/kWh", design.name(), static_lcos(&design.assumptions())?);
    }

    let run = solve_scenario(&network, &scenario)?;
    println!("system cost {:.4e} EUR ({})", run.solution.objective, run.solution.status.as_str());
    let table = market_potential(&run.result, &network, ComponentKind::Discharger, None);
    for row in &table.rows {
        println!("  {:<10} {:<8} discharger MPI {:>9.2} MW", row.component, row.bus, row.expanded);
    }
    for m in lcos_report(&run.result, &network, scenario.min_mpi_mw, scenario.min_flh) {
        println!("  {:<10} modelled LCOS {:.3} EUR/kWh at {:.0} full load hours", m.tech, m.lcos, m.full_load_hours);
    }

    let per_scenario = vec![(scenario.storage_mode.to_string(), table.by_technology())];
    let report = evaluate_criteria(&per_scenario, scenario.threshold_mw, &[("h2-low".into(), "h2-high".into())])?;
    for v in &report.verdicts {
        println!("  {:<8} {:?}, above {} MW: {}", v.component, v.verdict, report.threshold_mw, v.threshold_pass);
    }
    Ok(())
}
