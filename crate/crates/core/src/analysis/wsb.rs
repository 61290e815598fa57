use serde::Serialize;
use thiserror::Error;

use crate::model::{ComponentKind, EconomicsError, Network};
use crate::results::SystemResult;

#[derive(Debug, Error, PartialEq)]
pub enum WsbError {
    #[error("both runs must be optimal")]
    NotOptimal,
    #[error("runs cover different networks: {0}")]
    MismatchedNetworks(String),
    #[error(transparent)]
    Economics(#[from] EconomicsError),
}

/// Whole-system benefit of adding storage, EUR per period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WholeSystemBenefit {
    /// Cost without storage minus cost with it.
    pub net: f64,
    /// `net` plus the storage's own annualized capital.
    pub gross: f64,
    pub storage_capital: f64,
}

/// Annualized capital and FOM on storage expansion, counting shared
/// stores once, EUR per period.
pub fn storage_capital(result: &SystemResult, network: &Network) -> Result<f64, EconomicsError> {
    let mut total = 0.0;
    let mut stores = std::collections::HashSet::new();
    for r in &result.storage {
        let Some(tech) = network.storage(&r.id) else {
            continue;
        };
        for kind in ComponentKind::ALL {
            if kind == ComponentKind::Store && !stores.insert(r.store_entity.clone()) {
                continue;
            }
            let spec = tech.component(kind);
            if spec.extendable {
                total += spec.annualized_cost_per_mw()? * (r.capacity(kind) - spec.existing);
            }
        }
    }
    Ok(total)
}

/// Compares a run without storage against one with it. Both runs must
/// share buses, generators and lines; `network_with` is the network of the
/// second run.
pub fn whole_system_benefit(
    without: &SystemResult,
    with: &SystemResult,
    network_with: &Network,
) -> Result<WholeSystemBenefit, WsbError> {
    use crate::solver::SolveStatus::Optimal;
    if without.status != Optimal || with.status != Optimal {
        return Err(WsbError::NotOptimal);
    }
    let ids = |r: &SystemResult| {
        (
            r.generators.iter().map(|g| g.id.clone()).collect::<Vec<_>>(),
            r.lines.iter().map(|l| l.id.clone()).collect::<Vec<_>>(),
            r.prices.buses.clone(),
        )
    };
    if ids(without) != ids(with) {
        return Err(WsbError::MismatchedNetworks("generators, lines or buses differ".into()));
    }
    let net = without.objective - with.objective;
    let storage_capital = storage_capital(with, network_with)?;
    Ok(WholeSystemBenefit { net, gross: net + storage_capital, storage_capital })
}
