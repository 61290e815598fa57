//! Fixtures and physics checks shared by the integration suites.
#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use storval::graph::cycle_basis;
use storval::ingest::{parse_network_bundle, parse_scenario, ScenarioConfig};
use storval::model::{
    Bus, Carrier, ComponentKind, Coupling, Generator, Network, SnapshotSet, StorageComponentSpec, StorageTech,
};
use storval::results::SystemResult;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load(name: &str) -> Network {
    parse_network_bundle(fixture(name)).unwrap()
}

pub fn scenario(mode: &str) -> ScenarioConfig {
    parse_scenario(fixture(&format!("scenarios/{mode}.cfg"))).unwrap()
}

/// A scenario without equity, line-volume or emission rows.
pub fn plain_scenario() -> ScenarioConfig {
    ScenarioConfig { equity_fraction: 0.0, line_volume_expansion_frac: None, ..ScenarioConfig::default() }
}

pub fn carriers() -> Vec<Carrier> {
    vec![
        Carrier { name: "wind".into(), emission_factor: 0.0, variable_renewable: true },
        Carrier { name: "gas".into(), emission_factor: 0.4, variable_renewable: false },
        Carrier { name: "coal".into(), emission_factor: 0.9, variable_renewable: false },
    ]
}

pub fn generator(id: &str, carrier: &str, capacity: f64, marginal_cost: f64, availability: Vec<f64>) -> Generator {
    Generator {
        id: id.into(),
        bus: "B".into(),
        carrier: carrier.into(),
        existing_capacity: capacity,
        extendable: false,
        capacity_min: 0.0,
        capacity_max: capacity,
        capital_cost: 0.0,
        marginal_cost,
        availability,
    }
}

pub fn extendable(mut g: Generator, capital_cost: f64) -> Generator {
    g.extendable = true;
    g.capacity_max = f64::INFINITY;
    g.capital_cost = capital_cost;
    g
}

/// A greenfield storage technology with uniform component data.
pub fn storage(id: &str, efficiency: f64, investment: f64) -> StorageTech {
    let spec = |kind| StorageComponentSpec::new(kind, investment, 0.0, 20.0, efficiency, 0.05);
    StorageTech {
        id: id.into(),
        technology: id.into(),
        bus: "B".into(),
        charger: spec(ComponentKind::Charger),
        store: StorageComponentSpec { efficiency: 1.0, ..spec(ComponentKind::Store) },
        discharger: spec(ComponentKind::Discharger),
        ep_ratio_hours: None,
        coupling: Coupling::Free,
        hub_id: None,
        shared_converter: false,
        inflow: None,
        spillage_allowed: false,
        dispatch_epsilon_cost: None,
    }
}

/// One bus `B` in country `AA` with the given load profile.
pub fn single_bus(load: Vec<f64>, weight: f64, generators: Vec<Generator>, storage: Vec<StorageTech>) -> Network {
    let n = load.len();
    Network {
        buses: vec![Bus { id: "B".into(), country: "AA".into(), coordinates: None }],
        lines: vec![],
        generators,
        storage_techs: storage,
        carriers: carriers(),
        snapshots: SnapshotSet::new((0..n).map(|t| format!("t{t}")).collect(), vec![weight; n]),
        loads: vec![load],
    }
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.abs().max(1.0)
}

/// Largest x-weighted flow sum around any basis cycle, relative to the
/// largest absolute term of that sum.
pub fn max_cycle_residual(result: &SystemResult, network: &Network) -> f64 {
    let basis = cycle_basis(network);
    let mut worst: f64 = 0.0;
    for cycle in &basis.cycles {
        for t in 0..network.snapshots.len() {
            let terms: Vec<f64> =
                cycle.iter().map(|&(l, s)| s as f64 * network.lines[l].reactance * result.lines[l].flow[t]).collect();
            let scale = terms.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            worst = worst.max(rel(terms.iter().sum::<f64>().abs(), scale));
        }
    }
    worst
}

/// Largest violation of the wrap-around energy balance, relative to the
/// store size.
pub fn max_cyclic_residual(result: &SystemResult, network: &Network) -> f64 {
    let w = &network.snapshots.weights;
    let last = w.len() - 1;
    let mut worst: f64 = 0.0;
    for (tech, r) in network.storage_techs.iter().zip(&result.storage) {
        if r.store_entity != tech.id {
            continue;
        }
        let standing = tech.store.efficiency.powf(w[0]);
        let inflow = tech.inflow.as_ref().map_or(0.0, |i| i[0]);
        let spill = r.spill.first().copied().unwrap_or(0.0);
        let e0 = standing * r.level[last]
            + w[0]
                * (tech.charger.efficiency * r.charge[0] - r.discharge[0] / tech.discharger.efficiency + inflow
                    - spill);
        worst = worst.max(rel((e0 - r.level[0]).abs(), r.store));
    }
    worst
}

/// Weighted simultaneous charge and discharge over total throughput.
pub fn overlap_share(result: &SystemResult, network: &Network) -> f64 {
    let w = &network.snapshots.weights;
    let (mut overlap, mut throughput) = (0.0, 0.0);
    for r in &result.storage {
        for t in 0..w.len() {
            overlap += w[t] * r.charge[t].min(r.discharge[t]);
            throughput += w[t] * (r.charge[t] + r.discharge[t]);
        }
    }
    if throughput > 0.0 {
        overlap / throughput
    } else {
        0.0
    }
}

/// Weighted output of emitting generators, MWh.
pub fn fossil_energy(result: &SystemResult, network: &Network) -> f64 {
    let w = &network.snapshots.weights;
    network
        .generators
        .iter()
        .zip(&result.generators)
        .filter(|(g, _)| network.carrier(&g.carrier).is_some_and(|c| c.emission_factor > 0.0))
        .map(|(_, r)| r.dispatch.iter().zip(w).map(|(d, w)| d * w).sum::<f64>())
        .sum()
}

/// Smallest relative slack of `generation ≥ fraction × demand` over countries.
pub fn min_equity_slack(result: &SystemResult, network: &Network, fraction: f64) -> f64 {
    let w = &network.snapshots.weights;
    let mut worst = f64::INFINITY;
    for country in network.countries() {
        let in_country = |bus: &str| network.buses.iter().any(|b| b.id == bus && b.country == country);
        let demand: f64 = network
            .buses
            .iter()
            .zip(&network.loads)
            .filter(|(b, _)| b.country == country)
            .map(|(_, l)| l.iter().zip(w).map(|(d, w)| d * w).sum::<f64>())
            .sum();
        let produced: f64 = network
            .generators
            .iter()
            .zip(&result.generators)
            .filter(|(g, _)| in_country(&g.bus))
            .map(|(_, r)| r.dispatch.iter().zip(w).map(|(d, w)| d * w).sum::<f64>())
            .sum();
        worst = worst.min(rel(produced - fraction * demand, demand));
    }
    worst
}

/// Line volume growth over existing volume.
pub fn line_volume_growth(result: &SystemResult, network: &Network) -> f64 {
    let existing: f64 = network.lines.iter().map(|l| l.existing_capacity * l.length).sum();
    let built: f64 = network.lines.iter().zip(&result.lines).map(|(l, r)| r.capacity * l.length).sum();
    (built - existing) / existing
}

/// Largest violation of fixed energy-to-power sizing, relative to size.
pub fn max_fixed_ep_residual(result: &SystemResult, network: &Network) -> f64 {
    let mut worst: f64 = 0.0;
    for (tech, r) in network.storage_techs.iter().zip(&result.storage) {
        worst = worst.max(rel((r.charger - r.discharger).abs(), r.discharger));
        if let Some(ratio) = tech.ep_ratio_hours {
            worst = worst.max(rel((r.store - ratio * r.discharger).abs(), r.store));
        }
    }
    worst
}
