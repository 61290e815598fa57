//! Whole-system benefit of storage on the five-bus system: the same
//! emission-capped system solved without and with the storage designs.
//!
//! cargo run --release --example whole_system_benefit [resample]

use std::path::Path;

use storval::analysis::{kpis, whole_system_benefit};
use storval::ingest::{parse_network_bundle, parse_scenario, resample_snapshots};
use storval::model::Network;
use storval::results::SystemResult;
use storval::run::solve_scenario;

/// Weighted tCO2 of a solved system.
fn emissions(result: &SystemResult, net: &Network) -> f64 {
    result
        .generators
        .iter()
        .zip(&net.generators)
        .map(|(r, g)| {
            let factor = net.carriers.iter().find(|c| c.name == g.carrier).map_or(0.0, |c| c.emission_factor);
            factor * r.dispatch.iter().zip(&net.snapshots.weights).map(|(p, w)| p * w).sum::<f64>()
        })
        .sum()
}

fn main() -> anyhow::Result<()> {
    let step: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(4);
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let with_net = resample_snapshots(&parse_network_bundle(root.join("five-bus"))?, step)?;
    let mut without_net = with_net.clone();
    without_net.storage_techs.clear();

    // Full decarbonisation is infeasible without storage, so both runs share
    // a cap at a fraction of the uncapped emissions.
    let mut scenario = parse_scenario(root.join("scenarios/variable_ep.cfg"))?;
    scenario.co2_cap = None;
    let uncapped = solve_scenario(&without_net, &scenario)?.result;
    let baseline = emissions(&uncapped, &without_net);
    scenario.co2_cap = Some(0.3 * baseline);
    println!("uncapped emissions {baseline:.4e} t, cap {:.4e} t", 0.3 * baseline);

    let without = solve_scenario(&without_net, &scenario)?.result;
    let with = solve_scenario(&with_net, &scenario)?.result;
    let wsb = whole_system_benefit(&without, &with, &with_net)?;
    println!("cost without storage {:.4e} EUR", without.objective);
    println!("cost with storage    {:.4e} EUR", with.objective);
    println!(
        "net benefit {:.4e} EUR, storage capital {:.4e} EUR, gross {:.4e} EUR",
        wsb.net, wsb.storage_capital, wsb.gross
    );
    for (label, result, net) in [("without", &without, &without_net), ("with", &with, &with_net)] {
        let k = kpis(result, net);
        println!(
            "{label:<8} curtailment {:.1}% of demand, {:.2} ct/kWh, CO2 price {:.1} EUR/t",
            k.curtailment_percent.unwrap_or(0.0),
            k.relative_investment.unwrap_or(0.0),
            result.co2_price.unwrap_or(0.0)
        );
    }
    Ok(())
}
