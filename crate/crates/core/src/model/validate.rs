use std::collections::HashSet;
use std::fmt;

use super::{Coupling, Network, StorageComponentSpec};
use crate::graph::connected_components;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Id of the offending entity (or a pseudo-id like `snapshots`).
    pub entity: String,
    pub rule: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.entity, self.rule, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, entity: &str, rule: &str, detail: impl Into<String>) {
        self.violations.push(Violation { entity: entity.to_string(), rule: rule.to_string(), detail: detail.into() });
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.entity.contains(needle) || v.detail.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "network is valid");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

fn check_unique<'a>(report: &mut ValidationReport, what: &str, ids: impl Iterator<Item = &'a str>) {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            report.push(id, "duplicate id", format!("{what} id used twice"));
        }
    }
}

fn check_series(
    report: &mut ValidationReport,
    entity: &str,
    name: &str,
    series: &[f64],
    expected_len: usize,
    lower_open: bool,
) {
    if series.len() != expected_len {
        report.push(
            entity,
            "series length mismatch",
            format!("{name} has {} values, expected {expected_len}", series.len()),
        );
    }
    for (t, &v) in series.iter().enumerate() {
        let bad = !v.is_finite() || v > 1.0 || v < 0.0 || (lower_open && v == 0.0);
        if bad {
            let rule = if lower_open { "availability out of (0,1]" } else { "availability out of [0,1]" };
            report.push(entity, rule, format!("{name}[{t}] = {v}"));
        }
    }
}

fn check_component(report: &mut ValidationReport, entity: &str, c: &StorageComponentSpec) {
    let kind = c.kind.as_str();
    if !(c.investment >= 0.0 && c.investment.is_finite()) {
        report.push(entity, "negative investment", format!("{kind}: {}", c.investment));
    }
    if !(c.lifetime >= 1.0 && c.lifetime.is_finite()) {
        report.push(entity, "lifetime below 1 year", format!("{kind}: {}", c.lifetime));
    }
    if !(c.efficiency > 0.0 && c.efficiency <= 1.0) {
        report.push(entity, "efficiency out of (0,1]", format!("{kind}: {}", c.efficiency));
    }
    if !(c.fom_frac >= 0.0 && c.fom_frac < 1.0) {
        report.push(entity, "fom fraction out of [0,1)", format!("{kind}: {}", c.fom_frac));
    }
    if !(c.discount_rate >= 0.0 && c.discount_rate.is_finite()) {
        report.push(entity, "negative discount rate", format!("{kind}: {}", c.discount_rate));
    }
    if !(c.existing >= 0.0 && c.existing.is_finite()) {
        report.push(entity, "negative existing capacity", format!("{kind}: {}", c.existing));
    }
    if c.capacity_max < c.existing || c.capacity_max.is_nan() {
        report.push(
            entity,
            "capacity_max below existing",
            format!("{kind}: max {} < existing {}", c.capacity_max, c.existing),
        );
    }
}

/// Checks every structural invariant of `network` and reports all
/// violations found. Never fails; an empty report means the network is
/// usable by the formulation layer.
pub fn validate_network(network: &Network) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n_snap = network.snapshots.len();

    // snapshots
    if network.snapshots.timestamps.len() != n_snap {
        report.push("snapshots", "series length mismatch", "timestamp and weight counts differ");
    }
    for (t, &w) in network.snapshots.weights.iter().enumerate() {
        if !(w > 0.0 && w.is_finite()) {
            report.push("snapshots", "non-positive weight", format!("weight[{t}] = {w}"));
        }
    }

    check_unique(&mut report, "bus", network.buses.iter().map(|b| b.id.as_str()));
    check_unique(&mut report, "line", network.lines.iter().map(|l| l.id.as_str()));
    check_unique(&mut report, "generator", network.generators.iter().map(|g| g.id.as_str()));
    check_unique(&mut report, "storage", network.storage_techs.iter().map(|s| s.id.as_str()));
    check_unique(&mut report, "carrier", network.carriers.iter().map(|c| c.name.as_str()));

    let buses: HashSet<&str> = network.buses.iter().map(|b| b.id.as_str()).collect();
    let carriers: HashSet<&str> = network.carriers.iter().map(|c| c.name.as_str()).collect();

    for c in &network.carriers {
        if !(c.emission_factor >= 0.0 && c.emission_factor.is_finite()) {
            report.push(&c.name, "negative emission factor", format!("{}", c.emission_factor));
        }
    }

    for g in &network.generators {
        if !buses.contains(g.bus.as_str()) {
            report.push(&g.id, "unknown bus", format!("bus {} does not exist", g.bus));
        }
        if !carriers.contains(g.carrier.as_str()) {
            report.push(&g.id, "unknown carrier", format!("carrier {} does not exist", g.carrier));
        }
        if !(g.capacity_min >= 0.0 && g.capacity_min <= g.capacity_max) {
            report.push(
                &g.id,
                "capacity bounds inconsistent",
                format!("min {} max {}", g.capacity_min, g.capacity_max),
            );
        }
        if g.existing_capacity < g.capacity_min || g.existing_capacity > g.capacity_max {
            report.push(
                &g.id,
                "existing capacity outside bounds",
                format!("existing {} not in [{}, {}]", g.existing_capacity, g.capacity_min, g.capacity_max),
            );
        }
        if !(g.capital_cost >= 0.0 && g.capital_cost.is_finite()) {
            report.push(&g.id, "invalid capital cost", format!("{}", g.capital_cost));
        }
        if !g.marginal_cost.is_finite() {
            report.push(&g.id, "invalid marginal cost", format!("{}", g.marginal_cost));
        }
        check_series(&mut report, &g.id, "availability", &g.availability, n_snap, false);
    }

    for l in &network.lines {
        for end in [&l.bus_from, &l.bus_to] {
            if !buses.contains(end.as_str()) {
                report.push(&l.id, "unknown bus", format!("bus {end} does not exist"));
            }
        }
        if l.bus_from == l.bus_to {
            report.push(&l.id, "self loop", format!("both ends at {}", l.bus_from));
        }
        if !(l.reactance > 0.0 && l.reactance.is_finite()) {
            report.push(&l.id, "non-positive reactance", format!("{}", l.reactance));
        }
        if !(l.existing_capacity >= 0.0) {
            report.push(&l.id, "negative existing capacity", format!("{}", l.existing_capacity));
        }
        if !(l.capacity_max >= l.existing_capacity) {
            report.push(
                &l.id,
                "capacity_max below existing",
                format!("max {} < existing {}", l.capacity_max, l.existing_capacity),
            );
        }
        if !(l.length >= 0.0 && l.length.is_finite()) {
            report.push(&l.id, "invalid length", format!("{}", l.length));
        }
        if !(l.capital_cost >= 0.0 && l.capital_cost.is_finite()) {
            report.push(&l.id, "invalid capital cost", format!("{}", l.capital_cost));
        }
        check_series(&mut report, &l.id, "availability", &l.availability, n_snap, true);
    }

    for s in &network.storage_techs {
        if !buses.contains(s.bus.as_str()) {
            report.push(&s.id, "unknown bus", format!("bus {} does not exist", s.bus));
        }
        check_component(&mut report, &s.id, &s.charger);
        check_component(&mut report, &s.id, &s.store);
        check_component(&mut report, &s.id, &s.discharger);
        match s.ep_ratio_hours {
            Some(h) if !(h > 0.0 && h.is_finite()) => {
                report.push(&s.id, "non-positive ep ratio", format!("{h}"));
            }
            None if s.coupling == Coupling::FixedEp => {
                report.push(&s.id, "missing ep ratio", "fixed_ep coupling needs ep_ratio_hours");
            }
            _ => {}
        }
        let is_member = s.coupling == Coupling::HubMember;
        if is_member != s.hub_id.is_some() {
            report.push(&s.id, "hub id mismatch", "hub_id must be present exactly for hub_member coupling");
        }
        if let Some(inflow) = &s.inflow {
            if inflow.len() != n_snap {
                report.push(
                    &s.id,
                    "series length mismatch",
                    format!("inflow has {} values, expected {n_snap}", inflow.len()),
                );
            }
            if inflow.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                report.push(&s.id, "negative inflow", "inflow must be finite and >= 0");
            }
        }
        if let Some(eps) = s.dispatch_epsilon_cost {
            if !(eps >= 0.0 && eps.is_finite()) {
                report.push(&s.id, "negative epsilon cost", format!("{eps}"));
            }
        }
    }

    if network.loads.len() != network.buses.len() {
        report.push(
            "loads",
            "series length mismatch",
            format!("{} load series for {} buses", network.loads.len(), network.buses.len()),
        );
    }
    for (bus, series) in network.buses.iter().zip(&network.loads) {
        if series.len() != n_snap {
            report.push(
                &bus.id,
                "series length mismatch",
                format!("load has {} values, expected {n_snap}", series.len()),
            );
        }
        for (t, &d) in series.iter().enumerate() {
            if !(d >= 0.0 && d.is_finite()) {
                report.push(&bus.id, "negative load", format!("load[{t}] = {d}"));
            }
        }
    }

    // Component supply check only makes sense once references resolve.
    let refs_ok = !report.violations.iter().any(|v| v.rule == "unknown bus");
    if refs_ok && network.loads.len() == network.buses.len() {
        let comp = connected_components(network);
        let lookup = network.bus_lookup();
        let n_comp = comp.iter().copied().max().map_or(0, |m| m + 1);
        let mut has_gen = vec![false; n_comp];
        let mut has_load = vec![false; n_comp];
        for g in &network.generators {
            has_gen[comp[lookup[g.bus.as_str()]]] = true;
        }
        for (i, series) in network.loads.iter().enumerate() {
            if series.iter().any(|&d| d > 0.0) {
                has_load[comp[i]] = true;
            }
        }
        for c in 0..n_comp {
            if has_load[c] && !has_gen[c] {
                let bus = network
                    .buses
                    .iter()
                    .enumerate()
                    .find(|(i, _)| comp[*i] == c)
                    .map(|(_, b)| b.id.as_str())
                    .unwrap_or("?");
                report.push(bus, "island without generation", "connected component has load but no generator");
            }
        }
    }

    report
}
