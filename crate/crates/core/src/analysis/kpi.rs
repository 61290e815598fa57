use serde::Serialize;

use crate::model::Network;
use crate::results::SystemResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StorageKpi {
    pub tech: String,
    pub bus: String,
    /// Store over discharger capacity, hours; `None` without a discharger.
    pub ep_ratio: Option<f64>,
    /// Discharged energy over discharger capacity, hours.
    pub full_load_hours: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KpiReport {
    pub scenario: String,
    /// EUR per period.
    pub total_system_cost: f64,
    /// MWh per period.
    pub annual_demand: f64,
    /// Total cost per unit of demand, ct/kWh; `None` without demand.
    pub relative_investment: Option<f64>,
    /// Available but unused variable renewable energy, % of demand.
    pub curtailment_percent: Option<f64>,
    pub curtailed_energy: f64,
    pub storage: Vec<StorageKpi>,
}

pub fn kpis(result: &SystemResult, network: &Network) -> KpiReport {
    let w = &network.snapshots.weights;
    let demand = network.total_demand_energy();
    let mut curtailed = 0.0;
    for (g, r) in network.generators.iter().zip(&result.generators) {
        if !network.carrier(&g.carrier).is_some_and(|c| c.variable_renewable) {
            continue;
        }
        for t in 0..w.len() {
            curtailed += w[t] * (g.availability[t] * r.capacity - r.dispatch[t]).max(0.0);
        }
    }
    let storage = network
        .storage_techs
        .iter()
        .zip(&result.storage)
        .map(|(s, r)| {
            let discharged: f64 = r.discharge.iter().zip(w).map(|(h, w)| h * w).sum();
            let per_discharger = |v: f64| (r.discharger > 0.0).then(|| v / r.discharger);
            let store = r.store * super::store_share(result, network, &s.id);
            StorageKpi {
                tech: s.id.clone(),
                bus: s.bus.clone(),
                ep_ratio: per_discharger(store),
                full_load_hours: per_discharger(discharged),
            }
        })
        .collect();
    let per_demand = |v: f64| (demand > 0.0).then(|| v / demand);
    KpiReport {
        scenario: result.mode.as_str().into(),
        total_system_cost: result.objective,
        annual_demand: demand,
        // EUR/MWh to ct/kWh is a factor of 0.1.
        relative_investment: per_demand(result.objective).map(|v| v * 0.1),
        curtailment_percent: per_demand(curtailed).map(|v| v * 100.0),
        curtailed_energy: curtailed,
        storage,
    }
}
