//! Locational marginal prices of the two-bus fixture: the balance-row duals
//! divided by snapshot weights, and the congestion rent on the line.
//!
//! cargo run --example nodal_prices

use std::path::Path;

use storval::ingest::{parse_network_bundle, ScenarioConfig};
use storval::run::solve_scenario;

fn main() -> anyhow::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let network = parse_network_bundle(root.join("two-bus"))?;
    let scenario =
        ScenarioConfig { equity_fraction: 0.0, line_volume_expansion_frac: None, ..ScenarioConfig::default() };
    let run = solve_scenario(&network, &scenario)?;
    let prices = &run.result.prices;
    let w = &network.snapshots.weights;
    for (i, bus) in prices.buses.iter().enumerate() {
        println!("{bus}: mean price {:.2} EUR/MWh", prices.mean(i, w));
    }
    let line = &run.result.lines[0];
    let l = &network.lines[0];
    let (from, to) = (prices.bus(&l.bus_from).unwrap(), prices.bus(&l.bus_to).unwrap());
    let rent: f64 = (0..w.len()).map(|t| w[t] * line.flow[t] * (to[t] - from[t])).sum();
    println!("{} congestion rent {rent:.0} EUR", l.id);
    println!("\n{:<22} {:>8} {:>8} {:>8}", "snapshot", "A", "B", "flow");
    for t in 0..w.len().min(12) {
        println!("{:<22} {:>8.2} {:>8.2} {:>8.1}", network.snapshots.timestamps[t], from[t], to[t], line.flow[t]);
    }
    Ok(())
}
