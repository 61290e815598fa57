use serde::Serialize;
use thiserror::Error;

use crate::model::{ComponentKind, EconomicsError, Network, StorageComponentSpec};
use crate::results::SystemResult;

#[derive(Debug, Error, PartialEq)]
pub enum LcosError {
    #[error("full load hours must be positive")]
    ZeroFlh,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error(transparent)]
    Economics(#[from] EconomicsError),
    #[error("{0} never discharges")]
    ZeroDischarge(String),
    #[error("unknown storage technology {0}")]
    UnknownTech(String),
}

/// Inputs of the static LCOS calculation for a 1 kW discharger.
#[derive(Debug, Clone, PartialEq)]
pub struct LcosAssumptions {
    /// Store energy per unit of discharger power, hours.
    pub discharge_ratio_hours: f64,
    /// EUR/MWh paid for charging electricity.
    pub electricity_price: f64,
    pub yearly_full_load_hours: f64,
    /// Charger kW per discharger kW; 1 matches equally sized converters.
    pub charger_ratio: f64,
    pub charger: StorageComponentSpec,
    pub store: StorageComponentSpec,
    pub discharger: StorageComponentSpec,
}

impl LcosAssumptions {
    pub fn roundtrip_efficiency(&self) -> f64 {
        self.charger.efficiency * self.discharger.efficiency
    }
}

/// Levelized cost per kWh discharged, EUR/kWh.
///
/// Annual cost of a 1 kW discharger with its charger and store, plus the
/// electricity bought to deliver `FLH` kWh, divided by `FLH`. Capital is
/// annualized per component with its own lifetime.
pub fn static_lcos(a: &LcosAssumptions) -> Result<f64, LcosError> {
    if !(a.yearly_full_load_hours > 0.0) {
        return Err(LcosError::ZeroFlh);
    }
    if !(a.discharge_ratio_hours > 0.0) {
        return Err(LcosError::NonPositive("discharge ratio"));
    }
    if !(a.roundtrip_efficiency() > 0.0) {
        return Err(LcosError::NonPositive("roundtrip efficiency"));
    }
    if !(a.electricity_price >= 0.0 && a.charger_ratio >= 0.0) {
        return Err(LcosError::NonPositive("price and charger ratio"));
    }
    let flh = a.yearly_full_load_hours;
    let capital = a.charger.annualized_cost()? * a.charger_ratio
        + a.store.annualized_cost()? * a.discharge_ratio_hours
        + a.discharger.annualized_cost()?;
    let energy = a.electricity_price * flh / a.roundtrip_efficiency() / 1000.0;
    Ok((capital + energy) / flh)
}

/// The storage designs used for the static comparison, with techno-economic
/// data for 2030 and the LCOS operating assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceStorage {
    HydrogenLow,
    HydrogenHigh,
    Battery,
}

impl ReferenceStorage {
    pub const ALL: [ReferenceStorage; 3] =
        [ReferenceStorage::HydrogenLow, ReferenceStorage::HydrogenHigh, ReferenceStorage::Battery];

    pub fn name(self) -> &'static str {
        match self {
            ReferenceStorage::HydrogenLow => "hydrogen-low",
            ReferenceStorage::HydrogenHigh => "hydrogen-high",
            ReferenceStorage::Battery => "battery",
        }
    }

    pub fn assumptions(self) -> LcosAssumptions {
        use ComponentKind::*;
        let c = StorageComponentSpec::new;
        let (charger, store, discharger, ratio, flh) = match self {
            ReferenceStorage::HydrogenLow => (
                c(Charger, 339.0, 0.02, 25.0, 0.68, 0.07),
                c(Store, 8.4, 0.0, 20.0, 1.0, 0.07),
                c(Discharger, 339.0, 0.02, 20.0, 0.47, 0.07),
                100.0,
                2500.0,
            ),
            ReferenceStorage::HydrogenHigh => (
                c(Charger, 677.0, 0.03, 15.0, 0.79, 0.07),
                c(Store, 8.4, 0.0, 20.0, 1.0, 0.07),
                c(Discharger, 423.0, 0.03, 20.0, 0.58, 0.07),
                100.0,
                2500.0,
            ),
            // The inverter is priced as charger and as discharger, like
            // the two converters of the hydrogen chains.
            ReferenceStorage::Battery => (
                c(Charger, 209.0, 0.03, 10.0, 0.9, 0.07),
                c(Store, 188.0, 0.0, 10.0, 1.0, 0.07),
                c(Discharger, 209.0, 0.03, 10.0, 0.9, 0.07),
                4.0,
                3400.0,
            ),
        };
        LcosAssumptions {
            discharge_ratio_hours: ratio,
            electricity_price: 50.0,
            yearly_full_load_hours: flh,
            charger_ratio: 1.0,
            charger,
            store,
            discharger,
        }
    }
}

/// LCOS of one installation computed from optimized capacities, dispatch
/// and nodal prices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelledLcos {
    pub tech: String,
    pub bus: String,
    /// EUR/kWh discharged.
    pub lcos: f64,
    /// Discharged energy over discharger capacity, hours per period.
    pub full_load_hours: f64,
    /// Attributed store capacity over discharger capacity, hours.
    pub ep_ratio: f64,
    /// MWh per period.
    pub discharged: f64,
    /// Annualized capital and FOM, EUR per period.
    pub capital_cost: f64,
    /// Charging electricity at nodal prices, EUR per period.
    pub energy_cost: f64,
    /// Discharger expansion, MW.
    pub discharger_mpi: f64,
}

/// Share of a shared store attributed to `tech`: its part of the total
/// discharge of all technologies drawing from the same store. Equal split
/// when nothing is discharged.
pub fn store_share(result: &SystemResult, network: &Network, tech: &str) -> f64 {
    let Some(me) = result.storage(tech) else {
        return 0.0;
    };
    let w = &network.snapshots.weights;
    let energy = |s: &crate::results::StorageResult| s.discharge.iter().zip(w).map(|(h, w)| h * w).sum::<f64>();
    let members: Vec<_> = result.storage.iter().filter(|s| s.store_entity == me.store_entity).collect();
    let total: f64 = members.iter().map(|s| energy(s)).sum();
    if total > 0.0 {
        energy(me) / total
    } else {
        1.0 / members.len() as f64
    }
}

pub fn modelled_lcos(result: &SystemResult, network: &Network, tech_id: &str) -> Result<ModelledLcos, LcosError> {
    let tech = network.storage(tech_id).ok_or_else(|| LcosError::UnknownTech(tech_id.to_string()))?;
    let r = result.storage(tech_id).ok_or_else(|| LcosError::UnknownTech(tech_id.to_string()))?;
    let w = &network.snapshots.weights;
    let discharged: f64 = r.discharge.iter().zip(w).map(|(h, w)| h * w).sum();
    if !(discharged > 0.0) || !(r.discharger > 0.0) {
        return Err(LcosError::ZeroDischarge(tech_id.to_string()));
    }
    let store = r.store * store_share(result, network, tech_id);
    let capital = tech.charger.annualized_cost_per_mw()? * r.charger
        + tech.store.annualized_cost_per_mw()? * store
        + tech.discharger.annualized_cost_per_mw()? * r.discharger;
    let prices = result.prices.bus(&tech.bus).unwrap_or(&[]);
    let energy: f64 = r.charge.iter().zip(prices).zip(w).map(|((h, p), w)| h * p * w).sum();
    Ok(ModelledLcos {
        tech: tech_id.to_string(),
        bus: tech.bus.clone(),
        lcos: (capital + energy) / discharged / 1000.0,
        full_load_hours: discharged / r.discharger,
        ep_ratio: store / r.discharger,
        discharged,
        capital_cost: capital,
        energy_cost: energy,
        discharger_mpi: (r.discharger - tech.discharger.existing).max(0.0),
    })
}

/// Modelled LCOS of every installation that passes the report filter:
/// at least `min_mpi_mw` of discharger expansion and `min_flh` full load
/// hours. Installations that never discharge are left out as well.
pub fn lcos_report(result: &SystemResult, network: &Network, min_mpi_mw: f64, min_flh: f64) -> Vec<ModelledLcos> {
    network
        .storage_techs
        .iter()
        .filter_map(|t| modelled_lcos(result, network, &t.id).ok())
        .filter(|m| m.discharger_mpi >= min_mpi_mw && m.full_load_hours >= min_flh)
        .collect()
}
