//! Valuation of storage from optimized systems: levelized cost, market
//! potential and its decision rules, whole-system benefit and system KPIs.

mod kpi;
mod lcos;
mod mpi;
mod prices;
mod wsb;

pub use kpi::{kpis, KpiReport, StorageKpi};
pub use lcos::{
    lcos_report, modelled_lcos, static_lcos, store_share, LcosAssumptions, LcosError, ModelledLcos, ReferenceStorage,
};
pub use mpi::{
    component_mpi, evaluate_criteria, market_potential, CriteriaError, CriteriaReport, CriteriaVerdict, MpiRow,
    MpiTable, Ranking, Verdict, MPI_ZERO_MW,
};
pub use prices::{extract_nodal_prices, NodalPrices};
pub use wsb::{storage_capital, whole_system_benefit, WholeSystemBenefit, WsbError};
