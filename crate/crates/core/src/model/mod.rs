//! Electricity system description: buses, lines, generators, storage
//! technologies and the snapshot calendar they are operated over.
//!
//! Everything in here is plain data. Networks are built once (usually by
//! [`crate::ingest`]) and then shared read-only by the formulation and
//! analysis layers.

mod economics;
mod validate;

pub use economics::{annualized_capital, annuity_factor, EconomicsError};
pub use validate::{validate_network, ValidationReport, Violation};

use std::collections::HashMap;

/// Default length of the represented period, in hours.
pub const HOURS_PER_YEAR: f64 = 8760.0;

/// Default operational cost put on storage charging and discharging so that
/// simultaneous charge and discharge never pays off.
pub const DEFAULT_DISPATCH_EPSILON: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub timestamps: Vec<String>,
    /// Hours represented by each snapshot.
    pub weights: Vec<f64>,
}

impl SnapshotSet {
    pub fn new(timestamps: Vec<String>, weights: Vec<f64>) -> Self {
        Self { timestamps, weights }
    }

    /// `count` snapshots of equal weight covering `total_hours`.
    pub fn uniform(count: usize, total_hours: f64) -> Self {
        let w = total_hours / count as f64;
        Self { timestamps: (0..count).map(|t| format!("t{t}")).collect(), weights: vec![w; count] }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_hours(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: String,
    pub country: String,
    pub coordinates: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Carrier {
    pub name: String,
    /// tCO2-equivalent per MWh of electrical output.
    pub emission_factor: f64,
    /// Weather-dependent carriers (wind, solar) count towards curtailment.
    pub variable_renewable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: String,
    pub bus: String,
    pub carrier: String,
    /// MW
    pub existing_capacity: f64,
    pub extendable: bool,
    pub capacity_min: f64,
    pub capacity_max: f64,
    /// EUR per MW per year, already annualized.
    pub capital_cost: f64,
    /// EUR per MWh
    pub marginal_cost: f64,
    /// Per-snapshot fraction of capacity available, in `[0, 1]`.
    pub availability: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: String,
    pub bus_from: String,
    pub bus_to: String,
    /// Series reactance, per unit.
    pub reactance: f64,
    /// km
    pub length: f64,
    /// MW
    pub existing_capacity: f64,
    pub extendable: bool,
    pub capacity_max: f64,
    /// EUR per MW per year, already annualized.
    pub capital_cost: f64,
    /// Per-snapshot usable fraction of the thermal rating, in `(0, 1]`.
    pub availability: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Charger,
    Store,
    Discharger,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 3] = [ComponentKind::Charger, ComponentKind::Store, ComponentKind::Discharger];

    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Charger => "charger",
            ComponentKind::Store => "store",
            ComponentKind::Discharger => "discharger",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "charger" => Some(ComponentKind::Charger),
            "store" => Some(ComponentKind::Store),
            "discharger" => Some(ComponentKind::Discharger),
            _ => None,
        }
    }

    /// MWh for stores, MW otherwise.
    pub fn unit(self) -> &'static str {
        match self {
            ComponentKind::Store => "MWh",
            _ => "MW",
        }
    }
}

impl std::fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Techno-economic data of one storage component, in the units technology
/// datasheets use: EUR/kW for power components and EUR/kWh for stores.
#[derive(Debug, Clone, PartialEq)]
pub struct StorageComponentSpec {
    pub kind: ComponentKind,
    /// EUR/kW (charger, discharger) or EUR/kWh (store).
    pub investment: f64,
    /// Fixed O&M as a fraction of investment per year.
    pub fom_frac: f64,
    /// years
    pub lifetime: f64,
    /// Conversion efficiency for chargers and dischargers; standing
    /// efficiency per hour for stores.
    pub efficiency: f64,
    pub discount_rate: f64,
    /// MW or MWh already installed.
    pub existing: f64,
    pub extendable: bool,
    /// MW or MWh; `f64::INFINITY` when unlimited.
    pub capacity_max: f64,
}

impl StorageComponentSpec {
    /// A greenfield, extendable component without upper limit.
    pub fn new(
        kind: ComponentKind,
        investment: f64,
        fom_frac: f64,
        lifetime: f64,
        efficiency: f64,
        discount_rate: f64,
    ) -> Self {
        Self {
            kind,
            investment,
            fom_frac,
            lifetime,
            efficiency,
            discount_rate,
            existing: 0.0,
            extendable: true,
            capacity_max: f64::INFINITY,
        }
    }

    /// Annual cost of one kW (or kWh) of this component, EUR per year.
    pub fn annualized_cost(&self) -> Result<f64, EconomicsError> {
        annualized_capital(self.investment, self.discount_rate, self.lifetime, self.fom_frac)
    }

    /// Annual cost per MW (or MWh), which is what the optimization uses.
    pub fn annualized_cost_per_mw(&self) -> Result<f64, EconomicsError> {
        Ok(self.annualized_cost()? * 1000.0)
    }
}

/// How a storage technology's three components are tied together outside
/// of scenario-imposed coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coupling {
    /// Energy-to-power ratio fixed in every scenario.
    FixedEp,
    /// Components sized independently unless a scenario says otherwise.
    Free,
    /// Like `Free`, but joins a shared store in hub scenarios.
    HubMember,
}

impl Coupling {
    pub fn as_str(self) -> &'static str {
        match self {
            Coupling::FixedEp => "fixed_ep",
            Coupling::Free => "free",
            Coupling::HubMember => "hub_member",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fixed_ep" => Some(Coupling::FixedEp),
            "free" => Some(Coupling::Free),
            "hub_member" => Some(Coupling::HubMember),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageTech {
    pub id: String,
    /// Class name shared by installations of the same technology at
    /// different buses; market potential aggregates over it.
    pub technology: String,
    pub bus: String,
    pub charger: StorageComponentSpec,
    pub store: StorageComponentSpec,
    pub discharger: StorageComponentSpec,
    /// Store energy per unit of discharger power, hours.
    pub ep_ratio_hours: Option<f64>,
    pub coupling: Coupling,
    pub hub_id: Option<String>,
    /// Charger and discharger are one physical converter (a battery
    /// inverter), so their capacities are always equal.
    pub shared_converter: bool,
    /// Natural inflow in MW per snapshot, if any.
    pub inflow: Option<Vec<f64>>,
    pub spillage_allowed: bool,
    /// EUR/MWh on charging and discharging; `None` defers to the scenario.
    pub dispatch_epsilon_cost: Option<f64>,
}

impl StorageTech {
    pub fn component(&self, kind: ComponentKind) -> &StorageComponentSpec {
        match kind {
            ComponentKind::Charger => &self.charger,
            ComponentKind::Store => &self.store,
            ComponentKind::Discharger => &self.discharger,
        }
    }

    /// Charger efficiency times discharger efficiency.
    pub fn roundtrip_efficiency(&self) -> f64 {
        self.charger.efficiency * self.discharger.efficiency
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    pub storage_techs: Vec<StorageTech>,
    pub carriers: Vec<Carrier>,
    pub snapshots: SnapshotSet,
    /// Demand in MW, `loads[bus index][snapshot]`.
    pub loads: Vec<Vec<f64>>,
}

impl Network {
    pub fn bus_index(&self, id: &str) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn bus_lookup(&self) -> HashMap<&str, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect()
    }

    pub fn carrier(&self, name: &str) -> Option<&Carrier> {
        self.carriers.iter().find(|c| c.name == name)
    }

    pub fn generator(&self, id: &str) -> Option<&Generator> {
        self.generators.iter().find(|g| g.id == id)
    }

    pub fn storage(&self, id: &str) -> Option<&StorageTech> {
        self.storage_techs.iter().find(|s| s.id == id)
    }

    pub fn line(&self, id: &str) -> Option<&Line> {
        self.lines.iter().find(|l| l.id == id)
    }

    /// Σ_t w_t · d_{i,t} over all buses, MWh.
    pub fn total_demand_energy(&self) -> f64 {
        self.loads
            .iter()
            .map(|series| series.iter().zip(&self.snapshots.weights).map(|(d, w)| d * w).sum::<f64>())
            .sum()
    }

    /// Sorted list of distinct country codes.
    pub fn countries(&self) -> Vec<String> {
        let mut c: Vec<String> = self.buses.iter().map(|b| b.country.clone()).collect();
        c.sort();
        c.dedup();
        c
    }
}
