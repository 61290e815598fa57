mod common;

use common::*;
use storval::analysis::{
    component_mpi, kpis, market_potential, modelled_lcos, static_lcos, storage_capital, whole_system_benefit,
    LcosAssumptions, LcosError, WsbError,
};
use storval::model::{ComponentKind, Network, StorageTech};
use storval::run::solve_scenario;
use storval::solver::SolveStatus;

fn frozen(mut tech: StorageTech, power: f64, energy: f64) -> StorageTech {
    for (spec, size) in [(&mut tech.charger, power), (&mut tech.discharger, power), (&mut tech.store, energy)] {
        spec.existing = size;
        spec.extendable = false;
        spec.capacity_max = size;
    }
    tech
}

/// Gas at 50 EUR/MWh covers the base load; a 4 h peak exceeds it and
/// must come from a 5 MW / 20 MWh lossless store.
fn peak_shaving(store: StorageTech) -> Network {
    let load: Vec<f64> = (0..24).map(|t| if (10..14).contains(&t) { 105.0 } else { 90.0 }).collect();
    single_bus(load, 1.0, vec![generator("gas", "gas", 100.0, 50.0, vec![1.0; 24])], vec![store])
}

#[test]
fn modelled_lcos_matches_static_at_flat_price() {
    let tech = frozen(storage("s", 1.0, 150.0), 5.0, 20.0);
    let net = peak_shaving(tech.clone());
    let run = solve_scenario(&net, &plain_scenario()).unwrap();
    assert_eq!(run.solution.status, SolveStatus::Optimal);
    let m = modelled_lcos(&run.result, &net, "s").unwrap();
    assert!((m.full_load_hours - 4.0).abs() < 1e-6);
    let reference = static_lcos(&LcosAssumptions {
        discharge_ratio_hours: 4.0,
        electricity_price: 50.0,
        yearly_full_load_hours: m.full_load_hours,
        charger_ratio: 1.0,
        charger: tech.charger.clone(),
        store: tech.store.clone(),
        discharger: tech.discharger.clone(),
    })
    .unwrap();
    assert!((m.lcos - reference).abs() <= 0.01 * reference, "{} vs {reference}", m.lcos);
    assert!((m.energy_cost - 50.0 * 20.0).abs() < 1e-6);
}

#[test]
fn idle_storage_has_no_modelled_lcos() {
    let mut net = peak_shaving(frozen(storage("s", 1.0, 150.0), 5.0, 20.0));
    net.loads[0] = vec![90.0; 24];
    let run = solve_scenario(&net, &plain_scenario()).unwrap();
    assert_eq!(modelled_lcos(&run.result, &net, "s"), Err(LcosError::ZeroDischarge("s".into())));
    assert_eq!(modelled_lcos(&run.result, &net, "nope"), Err(LcosError::UnknownTech("nope".into())));
}

fn wind_system(with_storage: bool) -> Network {
    let wind: Vec<f64> = (0..24).map(|t| if t % 8 < 5 { 1.0 } else { 0.05 }).collect();
    // Annual capital is scaled down to the single represented day.
    let day = 1.0 / 365.0;
    let techs = if with_storage { vec![storage("s", 0.9, 100.0 * day)] } else { vec![] };
    single_bus(
        vec![20.0; 24],
        1.0,
        vec![
            extendable(generator("wind", "wind", 0.0, 0.0, wind), 30_000.0 * day),
            generator("gas", "gas", 50.0, 150.0, vec![1.0; 24]),
        ],
        techs,
    )
}

#[test]
fn whole_system_benefit_of_cheap_storage() {
    let without_net = wind_system(false);
    let with_net = wind_system(true);
    let without = solve_scenario(&without_net, &plain_scenario()).unwrap().result;
    let with = solve_scenario(&with_net, &plain_scenario()).unwrap().result;
    let wsb = whole_system_benefit(&without, &with, &with_net).unwrap();
    // An added option never raises the optimum.
    assert!(wsb.net >= -1e-6);
    assert!((wsb.net - (without.objective - with.objective)).abs() < 1e-9);
    let s = &with.storage[0];
    assert!(s.discharger > 0.0);
    let spec = |k| with_net.storage_techs[0].component(k).annualized_cost_per_mw().unwrap();
    let capital = spec(ComponentKind::Charger) * s.charger
        + spec(ComponentKind::Store) * s.store
        + spec(ComponentKind::Discharger) * s.discharger;
    assert!((wsb.storage_capital - capital).abs() <= 1e-9 * capital);
    assert!((wsb.gross - wsb.net - capital).abs() <= 1e-9 * capital);
    assert_eq!(storage_capital(&without, &without_net).unwrap(), 0.0);
}

#[test]
fn whole_system_benefit_rejects_mismatched_runs() {
    let with_net = wind_system(true);
    let with = solve_scenario(&with_net, &plain_scenario()).unwrap().result;
    let two_bus = load("two-bus");
    let other = solve_scenario(&two_bus, &plain_scenario()).unwrap().result;
    assert!(matches!(whole_system_benefit(&other, &with, &with_net), Err(WsbError::MismatchedNetworks(_))));
    let mut failed = with.clone();
    failed.status = SolveStatus::Infeasible;
    assert_eq!(whole_system_benefit(&failed, &with, &with_net), Err(WsbError::NotOptimal));
}

#[test]
fn kpis_from_a_hand_solved_system() {
    // 30 MW of wind at availability 1 and 0.5 serves 10 MW: 25 MWh curtailed.
    let net = single_bus(vec![10.0, 10.0], 1.0, vec![generator("wind", "wind", 30.0, 2.0, vec![1.0, 0.5])], vec![]);
    let run = solve_scenario(&net, &plain_scenario()).unwrap();
    let k = kpis(&run.result, &net);
    assert!((k.total_system_cost - 40.0).abs() < 1e-9);
    assert!((k.annual_demand - 20.0).abs() < 1e-12);
    assert!((k.curtailed_energy - 25.0).abs() < 1e-9);
    assert!((k.curtailment_percent.unwrap() - 125.0).abs() < 1e-9);
    // 2 EUR/MWh is 0.2 ct/kWh.
    assert!((k.relative_investment.unwrap() - 0.2).abs() < 1e-9);
    assert_eq!(k.scenario, "fixed_ep");
}

#[test]
fn storage_kpis_and_market_potential() {
    let net = peak_shaving(frozen(storage("s", 1.0, 150.0), 5.0, 20.0));
    let run = solve_scenario(&net, &plain_scenario()).unwrap();
    let k = kpis(&run.result, &net);
    assert_eq!(k.storage.len(), 1);
    assert!((k.storage[0].ep_ratio.unwrap() - 4.0).abs() < 1e-9);
    assert!((k.storage[0].full_load_hours.unwrap() - 4.0).abs() < 1e-6);
    // Frozen capacities are existing assets, not market potential.
    let mpi = market_potential(&run.result, &net, ComponentKind::Discharger, None);
    assert_eq!(mpi.aggregate(), 0.0);

    let grown = wind_system(true);
    let run = solve_scenario(&grown, &plain_scenario()).unwrap();
    let mpi = component_mpi(&run.result, &grown);
    let discharger = run.result.storage[0].discharger;
    assert!((mpi["s/discharger"] - discharger).abs() < 1e-12);
    let only_elsewhere = market_potential(&run.result, &grown, ComponentKind::Discharger, Some(&["ZZ".to_string()]));
    assert!(only_elsewhere.rows.is_empty());
}

#[test]
fn nodal_prices_divide_out_snapshot_weights() {
    for weight in [0.5, 1.0, 4.0] {
        let net = single_bus(vec![30.0], weight, vec![generator("gas", "gas", 100.0, 42.0, vec![1.0])], vec![]);
        let run = solve_scenario(&net, &plain_scenario()).unwrap();
        assert!((run.result.prices.bus("B").unwrap()[0] - 42.0).abs() < 1e-9);
        assert!((run.result.prices.mean(0, &net.snapshots.weights) - 42.0).abs() < 1e-9);
    }
}
