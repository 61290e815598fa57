use serde::Serialize;

use crate::formulation::{LinearProgram, RowKind};
use crate::model::Network;
use crate::solver::Solution;

/// Locational marginal prices in EUR/MWh, `price[bus][snapshot]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodalPrices {
    pub buses: Vec<String>,
    pub price: Vec<Vec<f64>>,
    /// Buses with neither load nor attached units. Their price is whatever
    /// the dual happens to be and carries no market meaning.
    pub degenerate: Vec<bool>,
}

impl NodalPrices {
    pub fn bus(&self, id: &str) -> Option<&[f64]> {
        self.buses.iter().position(|b| b == id).map(|i| self.price[i].as_slice())
    }

    /// Weight-averaged price of one bus.
    pub fn mean(&self, bus: usize, weights: &[f64]) -> f64 {
        let total: f64 = weights.iter().sum();
        self.price[bus].iter().zip(weights).map(|(p, w)| p * w).sum::<f64>() / total
    }
}

/// Balance-row duals divided by the snapshot weight. A balance row for
/// snapshot `t` prices one MW held over `w_t` hours, so the division turns
/// it into a per-MWh price that is comparable across resolutions.
pub fn extract_nodal_prices(lp: &LinearProgram, solution: &Solution, network: &Network) -> NodalPrices {
    let w = &network.snapshots.weights;
    let mut price = Vec::with_capacity(network.buses.len());
    let mut degenerate = Vec::with_capacity(network.buses.len());
    for (i, bus) in network.buses.iter().enumerate() {
        let series = (0..w.len())
            .map(|t| lp.row(RowKind::Balance, &bus.id, Some(t)).map_or(f64::NAN, |r| solution.dual[r] / w[t]))
            .collect();
        price.push(series);
        let has_units =
            network.generators.iter().any(|g| g.bus == bus.id) || network.storage_techs.iter().any(|s| s.bus == bus.id);
        let has_load = network.loads[i].iter().any(|&d| d > 0.0);
        degenerate.push(!has_units && !has_load);
    }
    NodalPrices { buses: network.buses.iter().map(|b| b.id.clone()).collect(), price, degenerate }
}
