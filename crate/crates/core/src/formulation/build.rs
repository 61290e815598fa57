//! Assembly of the capacity-expansion program.
//!
//! Sign conventions: a flow `f[l,t] > 0` runs from `bus_from` to `bus_to`;
//! capacities are bounded below by what is already installed and only the
//! expansion is charged, via a negative constant offset.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::lp::{Key, LinearProgram, LpBuilder, Relation, RowKind, VarKind};
use crate::graph::{cycle_basis, CycleBasis};
use crate::ingest::{ScenarioConfig, StorageMode};
use crate::model::{ComponentKind, Coupling, EconomicsError, Network, StorageComponentSpec, StorageTech};

#[derive(Debug, Error, PartialEq)]
pub enum FormulationError {
    #[error("network has no snapshots")]
    EmptySnapshots,
    #[error("{entity}: bounds are infeasible ({detail})")]
    InfeasibleBounds { entity: String, detail: String },
    #[error("hub {hub}: members sit on different buses ({buses})")]
    HubMembersAcrossBuses { hub: String, buses: String },
    #[error("{entity}: {source}")]
    Economics { entity: String, source: EconomicsError },
    #[error("{entity}: references unknown {what} `{name}`")]
    UnknownReference { entity: String, what: &'static str, name: String },
}

/// Registry entity of the store a technology charges into. Hub members
/// share `hub:<hub_id>` in hub scenarios; everything else owns its store.
pub fn store_entity(tech: &StorageTech, mode: StorageMode) -> String {
    match (&tech.hub_id, mode, tech.coupling) {
        (Some(hub), StorageMode::H2Hub, Coupling::HubMember) => format!("hub:{hub}"),
        _ => tech.id.clone(),
    }
}

/// Whether charger and discharger capacity must be equal.
pub fn converter_coupled(tech: &StorageTech, mode: StorageMode) -> bool {
    mode == StorageMode::FixedEp || tech.coupling == Coupling::FixedEp || tech.shared_converter
}

/// Whether the store is tied to the discharger by the energy-to-power ratio.
pub fn ep_coupled(tech: &StorageTech, mode: StorageMode) -> bool {
    tech.ep_ratio_hours.is_some() && (mode == StorageMode::FixedEp || tech.coupling == Coupling::FixedEp)
}

/// A store in the program: its own technology or a hub shared by members.
struct StoreGroup<'a> {
    entity: String,
    spec: &'a StorageComponentSpec,
    members: Vec<&'a StorageTech>,
}

pub fn build_problem(network: &Network, scenario: &ScenarioConfig) -> Result<LinearProgram, FormulationError> {
    if network.snapshots.is_empty() {
        return Err(FormulationError::EmptySnapshots);
    }
    let mut b = LpBuilder::new();
    let cycles = cycle_basis(network);
    add_generators(&mut b, network)?;
    add_flow_constraints(&mut b, network, &cycles)?;
    let groups = storage_groups(network, scenario.storage_mode)?;
    add_storage_constraints(&mut b, network, scenario, &groups)?;
    add_balance_constraints(&mut b, network)?;
    if let Some(cap) = scenario.co2_cap {
        add_emission_constraint(&mut b, network, cap);
    }
    add_equity_constraints(&mut b, network, scenario.equity_fraction);
    if let Some(frac) = scenario.line_volume_expansion_frac {
        add_line_volume_constraint(&mut b, network, frac);
    }
    Ok(b.build())
}

/// Capacity variable with expansion-only capital cost. Non-extendable
/// assets are fixed at their existing size and carry no cost.
fn add_capacity(
    b: &mut LpBuilder,
    kind: VarKind,
    entity: &str,
    existing: f64,
    extendable: bool,
    min: f64,
    max: f64,
    capital_cost: f64,
) -> Result<usize, FormulationError> {
    let (lo, hi) = if extendable { (existing.max(min), max) } else { (existing, existing) };
    if !(lo <= hi) || lo < 0.0 || !lo.is_finite() {
        return Err(FormulationError::InfeasibleBounds {
            entity: entity.to_string(),
            detail: format!("lower {lo} vs upper {hi}"),
        });
    }
    let cost = if extendable { capital_cost } else { 0.0 };
    let j = b.add_var(Key::new(kind, entity, None), cost, lo, hi);
    b.add_offset(-cost * existing);
    Ok(j)
}

fn is_fixed(b: &LpBuilder, var: usize) -> bool {
    b.lower(var) == b.upper(var)
}

pub fn add_generators(b: &mut LpBuilder, network: &Network) -> Result<(), FormulationError> {
    let w = &network.snapshots.weights;
    for g in &network.generators {
        let cap = add_capacity(
            b,
            VarKind::GenCapacity,
            &g.id,
            g.existing_capacity,
            g.extendable,
            g.capacity_min,
            g.capacity_max,
            g.capital_cost,
        )?;
        let fixed = is_fixed(b, cap).then(|| b.lower(cap));
        for (t, &wt) in w.iter().enumerate() {
            let avail = g.availability[t];
            match fixed {
                Some(size) => {
                    b.add_var(Key::new(VarKind::Dispatch, &g.id, Some(t)), g.marginal_cost * wt, 0.0, avail * size);
                }
                None => {
                    let d = b.add_var(
                        Key::new(VarKind::Dispatch, &g.id, Some(t)),
                        g.marginal_cost * wt,
                        0.0,
                        f64::INFINITY,
                    );
                    b.add_row(
                        Key::new(RowKind::GenAvailability, &g.id, Some(t)),
                        [(d, 1.0), (cap, -avail)],
                        Relation::Le,
                        0.0,
                    );
                }
            }
        }
    }
    Ok(())
}

pub fn add_flow_constraints(b: &mut LpBuilder, network: &Network, cycles: &CycleBasis) -> Result<(), FormulationError> {
    let n_t = network.snapshots.len();
    let mut flows = Vec::with_capacity(network.lines.len());
    for l in &network.lines {
        let cap = add_capacity(
            b,
            VarKind::LineCapacity,
            &l.id,
            l.existing_capacity,
            l.extendable,
            0.0,
            l.capacity_max,
            l.capital_cost,
        )?;
        let fixed = is_fixed(b, cap).then(|| b.lower(cap));
        let mut series = Vec::with_capacity(n_t);
        for t in 0..n_t {
            let a = l.availability[t];
            let f = match fixed {
                Some(size) => b.add_var(Key::new(VarKind::Flow, &l.id, Some(t)), 0.0, -a * size, a * size),
                None => {
                    let f = b.add_var(Key::new(VarKind::Flow, &l.id, Some(t)), 0.0, f64::NEG_INFINITY, f64::INFINITY);
                    b.add_row(Key::new(RowKind::FlowUpper, &l.id, Some(t)), [(f, 1.0), (cap, -a)], Relation::Le, 0.0);
                    b.add_row(Key::new(RowKind::FlowLower, &l.id, Some(t)), [(f, 1.0), (cap, a)], Relation::Ge, 0.0);
                    f
                }
            };
            series.push(f);
        }
        flows.push(series);
    }
    for (c, cycle) in cycles.cycles.iter().enumerate() {
        for t in 0..n_t {
            let entries: Vec<(usize, f64)> =
                cycle.iter().map(|&(l, s)| (flows[l][t], s as f64 * network.lines[l].reactance)).collect();
            b.add_row(Key::new(RowKind::Kvl, format!("cycle{c}"), Some(t)), entries, Relation::Eq, 0.0);
        }
    }
    Ok(())
}

fn storage_groups(network: &Network, mode: StorageMode) -> Result<Vec<StoreGroup<'_>>, FormulationError> {
    let mut groups: Vec<StoreGroup> = Vec::new();
    let mut by_entity: HashMap<String, usize> = HashMap::new();
    for tech in &network.storage_techs {
        let entity = store_entity(tech, mode);
        match by_entity.get(&entity) {
            Some(&i) => {
                let first = groups[i].members[0];
                if first.bus != tech.bus {
                    return Err(FormulationError::HubMembersAcrossBuses {
                        hub: tech.hub_id.clone().unwrap_or_default(),
                        buses: format!("{}, {}", first.bus, tech.bus),
                    });
                }
                groups[i].members.push(tech);
            }
            None => {
                by_entity.insert(entity.clone(), groups.len());
                groups.push(StoreGroup { entity, spec: &tech.store, members: vec![tech] });
            }
        }
    }
    Ok(groups)
}

fn annualized(entity: &str, spec: &StorageComponentSpec) -> Result<f64, FormulationError> {
    spec.annualized_cost_per_mw()
        .map_err(|source| FormulationError::Economics { entity: format!("{entity}/{}", spec.kind), source })
}

fn add_component_capacity(
    b: &mut LpBuilder,
    kind: VarKind,
    entity: &str,
    spec: &StorageComponentSpec,
) -> Result<usize, FormulationError> {
    let cost = annualized(entity, spec)?;
    add_capacity(b, kind, entity, spec.existing, spec.extendable, 0.0, spec.capacity_max, cost)
}

/// Operational variable limited by a capacity variable: a bound when the
/// capacity is fixed, a row otherwise.
fn add_limited(b: &mut LpBuilder, var: Key<VarKind>, cost: f64, cap: usize, row: RowKind) -> usize {
    let (entity, t) = (var.entity.clone(), var.snapshot);
    if is_fixed(b, cap) {
        let hi = b.upper(cap);
        b.add_var(var, cost, 0.0, hi)
    } else {
        let v = b.add_var(var, cost, 0.0, f64::INFINITY);
        b.add_row(Key::new(row, entity, t), [(v, 1.0), (cap, -1.0)], Relation::Le, 0.0);
        v
    }
}

fn add_storage_constraints(
    b: &mut LpBuilder,
    network: &Network,
    scenario: &ScenarioConfig,
    groups: &[StoreGroup],
) -> Result<(), FormulationError> {
    let w = &network.snapshots.weights;
    let n_t = w.len();
    let mode = scenario.storage_mode;
    for group in groups {
        let store_cap = add_component_capacity(b, VarKind::StoreCapacity, &group.entity, group.spec)?;
        let levels: Vec<usize> = (0..n_t)
            .map(|t| {
                add_limited(b, Key::new(VarKind::Level, &group.entity, Some(t)), 0.0, store_cap, RowKind::LevelLimit)
            })
            .collect();
        // Energy balance rows collect member terms before insertion.
        let standing = group.spec.efficiency;
        let mut rows: Vec<Vec<(usize, f64)>> = (0..n_t)
            .map(|t| {
                let prev = if t == 0 { n_t - 1 } else { t - 1 };
                vec![(levels[t], 1.0), (levels[prev], -standing.powf(w[t]))]
            })
            .collect();
        let mut rhs = vec![0.0; n_t];

        for tech in &group.members {
            let charger = add_component_capacity(b, VarKind::ChargerCapacity, &tech.id, &tech.charger)?;
            let discharger = add_component_capacity(b, VarKind::DischargerCapacity, &tech.id, &tech.discharger)?;
            let eps = tech.dispatch_epsilon_cost.unwrap_or(scenario.epsilon_cost);
            let (eta_in, eta_out) = (tech.charger.efficiency, tech.discharger.efficiency);
            for t in 0..n_t {
                let h_in = add_limited(
                    b,
                    Key::new(VarKind::Charge, &tech.id, Some(t)),
                    eps * w[t],
                    charger,
                    RowKind::ChargeLimit,
                );
                let h_out = add_limited(
                    b,
                    Key::new(VarKind::Discharge, &tech.id, Some(t)),
                    eps * w[t],
                    discharger,
                    RowKind::DischargeLimit,
                );
                rows[t].push((h_in, -eta_in * w[t]));
                rows[t].push((h_out, w[t] / eta_out));
                if let Some(inflow) = &tech.inflow {
                    rhs[t] += w[t] * inflow[t];
                    if tech.spillage_allowed {
                        let s = b.add_var(Key::new(VarKind::Spill, &tech.id, Some(t)), 0.0, 0.0, f64::INFINITY);
                        rows[t].push((s, w[t]));
                    }
                }
            }
            if converter_coupled(tech, mode) {
                b.add_row(
                    Key::new(RowKind::ConverterCoupling, &tech.id, None),
                    [(charger, 1.0), (discharger, -1.0)],
                    Relation::Eq,
                    0.0,
                );
            }
            if ep_coupled(tech, mode) {
                let ratio = tech.ep_ratio_hours.expect("checked by ep_coupled");
                b.add_row(
                    Key::new(RowKind::EpRatio, &tech.id, None),
                    [(store_cap, 1.0), (discharger, -ratio)],
                    Relation::Eq,
                    0.0,
                );
            }
        }
        for (t, entries) in rows.into_iter().enumerate() {
            b.add_row(Key::new(RowKind::EnergyBalance, &group.entity, Some(t)), entries, Relation::Eq, rhs[t]);
        }
    }
    Ok(())
}

pub fn add_balance_constraints(b: &mut LpBuilder, network: &Network) -> Result<(), FormulationError> {
    let lookup = network.bus_lookup();
    let n_t = network.snapshots.len();
    let mut terms: Vec<Vec<Vec<(usize, f64)>>> = vec![vec![Vec::new(); n_t]; network.buses.len()];
    let bus_of = |entity: &str, name: &str| {
        lookup.get(name).copied().ok_or_else(|| FormulationError::UnknownReference {
            entity: entity.to_string(),
            what: "bus",
            name: name.to_string(),
        })
    };
    let var = |b: &LpBuilder, kind, id: &str, t| b.var(kind, id, Some(t)).expect("operational variable registered");
    for g in &network.generators {
        let i = bus_of(&g.id, &g.bus)?;
        for t in 0..n_t {
            terms[i][t].push((var(b, VarKind::Dispatch, &g.id, t), 1.0));
        }
    }
    for s in &network.storage_techs {
        let i = bus_of(&s.id, &s.bus)?;
        for t in 0..n_t {
            terms[i][t].push((var(b, VarKind::Discharge, &s.id, t), 1.0));
            terms[i][t].push((var(b, VarKind::Charge, &s.id, t), -1.0));
        }
    }
    for l in &network.lines {
        let from = bus_of(&l.id, &l.bus_from)?;
        let to = bus_of(&l.id, &l.bus_to)?;
        for t in 0..n_t {
            let f = var(b, VarKind::Flow, &l.id, t);
            terms[from][t].push((f, -1.0));
            terms[to][t].push((f, 1.0));
        }
    }
    for (i, bus) in network.buses.iter().enumerate() {
        for (t, entries) in std::mem::take(&mut terms[i]).into_iter().enumerate() {
            b.add_row(Key::new(RowKind::Balance, &bus.id, Some(t)), entries, Relation::Eq, network.loads[i][t]);
        }
    }
    Ok(())
}

/// Total-emissions cap; omitted when no generator emits.
pub fn add_emission_constraint(b: &mut LpBuilder, network: &Network, cap: f64) {
    let mut entries = Vec::new();
    for g in &network.generators {
        let rho = network.carrier(&g.carrier).map_or(0.0, |c| c.emission_factor);
        if rho == 0.0 {
            continue;
        }
        for (t, &wt) in network.snapshots.weights.iter().enumerate() {
            let d = b.var(VarKind::Dispatch, &g.id, Some(t)).expect("dispatch registered");
            entries.push((d, rho * wt));
        }
    }
    if !entries.is_empty() {
        b.add_row(Key::new(RowKind::Emission, "total", None), entries, Relation::Le, cap);
    }
}

/// Per country: generator output ≥ fraction × demand. Storage discharge does
/// not count as production.
pub fn add_equity_constraints(b: &mut LpBuilder, network: &Network, fraction: f64) {
    if fraction <= 0.0 {
        return;
    }
    let w = &network.snapshots.weights;
    let country_of: HashMap<&str, &str> = network.buses.iter().map(|x| (x.id.as_str(), x.country.as_str())).collect();
    let mut demand: BTreeMap<&str, f64> = BTreeMap::new();
    for (bus, load) in network.buses.iter().zip(&network.loads) {
        *demand.entry(bus.country.as_str()).or_default() += load.iter().zip(w).map(|(d, wt)| d * wt).sum::<f64>();
    }
    let mut entries: BTreeMap<&str, Vec<(usize, f64)>> = BTreeMap::new();
    for g in &network.generators {
        let Some(&country) = country_of.get(g.bus.as_str()) else {
            continue;
        };
        for (t, &wt) in w.iter().enumerate() {
            let d = b.var(VarKind::Dispatch, &g.id, Some(t)).expect("dispatch registered");
            entries.entry(country).or_default().push((d, wt));
        }
    }
    for (country, dem) in demand {
        if dem <= 0.0 {
            continue;
        }
        let row = entries.remove(country).unwrap_or_default();
        b.add_row(Key::new(RowKind::Equity, country, None), row, Relation::Ge, fraction * dem);
    }
}

/// Σ (F − F⁰)·length ≤ frac · Σ F⁰·length, written over extendable lines.
pub fn add_line_volume_constraint(b: &mut LpBuilder, network: &Network, frac: f64) {
    let existing: f64 = network.lines.iter().map(|l| l.existing_capacity * l.length).sum();
    let mut entries = Vec::new();
    let mut rhs = frac * existing;
    for l in network.lines.iter().filter(|l| l.extendable) {
        let cap = b.var(VarKind::LineCapacity, &l.id, None).expect("line capacity registered");
        entries.push((cap, l.length));
        rhs += l.existing_capacity * l.length;
    }
    if !entries.is_empty() {
        b.add_row(Key::new(RowKind::LineVolume, "total", None), entries, Relation::Le, rhs);
    }
}

/// Component capacity column of a technology, resolving shared stores.
pub fn component_var(lp: &LinearProgram, tech: &StorageTech, kind: ComponentKind, mode: StorageMode) -> Option<usize> {
    match kind {
        ComponentKind::Charger => lp.var(VarKind::ChargerCapacity, &tech.id, None),
        ComponentKind::Discharger => lp.var(VarKind::DischargerCapacity, &tech.id, None),
        ComponentKind::Store => lp.var(VarKind::StoreCapacity, &store_entity(tech, mode), None),
    }
}
