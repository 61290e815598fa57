//! Named, solver-independent view of an optimal solution.
//!
//! Everything the analysis layer needs lives here, so stored runs can be
//! analysed without the program or the solver.

mod io;

pub use io::{atomic_write, read_result_dir, write_result_tables, ResultIoError};

use crate::analysis::{extract_nodal_prices, NodalPrices};
use crate::formulation::{component_var, store_entity, LinearProgram, RowKind, VarKind};
use crate::ingest::StorageMode;
use crate::model::{ComponentKind, Network};
use crate::solver::{Solution, SolveStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorResult {
    pub id: String,
    pub existing: f64,
    pub capacity: f64,
    pub dispatch: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineResult {
    pub id: String,
    pub existing: f64,
    pub capacity: f64,
    /// Positive from `bus_from` to `bus_to`.
    pub flow: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageResult {
    pub id: String,
    /// The store this technology charges into; shared by hub members.
    pub store_entity: String,
    pub charger: f64,
    pub discharger: f64,
    pub store: f64,
    pub charge: Vec<f64>,
    pub discharge: Vec<f64>,
    /// Level of `store_entity`.
    pub level: Vec<f64>,
    pub spill: Vec<f64>,
}

impl StorageResult {
    pub fn capacity(&self, kind: ComponentKind) -> f64 {
        match kind {
            ComponentKind::Charger => self.charger,
            ComponentKind::Store => self.store,
            ComponentKind::Discharger => self.discharger,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemResult {
    pub mode: StorageMode,
    pub status: SolveStatus,
    /// EUR per represented period, including the constant offset.
    pub objective: f64,
    pub iterations: usize,
    pub solve_seconds: f64,
    pub generators: Vec<GeneratorResult>,
    pub lines: Vec<LineResult>,
    pub storage: Vec<StorageResult>,
    pub prices: NodalPrices,
    /// EUR/tCO2, positive when the cap binds; `None` without a cap row.
    pub co2_price: Option<f64>,
}

impl SystemResult {
    /// Reads every named quantity out of `solution`. Missing variables
    /// (which only happens on mismatched inputs) read as zero.
    pub fn from_solution(network: &Network, mode: StorageMode, lp: &LinearProgram, solution: &Solution) -> Self {
        let n_t = network.snapshots.len();
        let x = &solution.primal;
        let scalar = |kind, id: &str| lp.var(kind, id, None).map_or(0.0, |j| x[j]);
        let series = |kind, id: &str| -> Vec<f64> {
            (0..n_t).map(|t| lp.var(kind, id, Some(t)).map_or(0.0, |j| x[j])).collect()
        };
        let generators = network
            .generators
            .iter()
            .map(|g| GeneratorResult {
                id: g.id.clone(),
                existing: g.existing_capacity,
                capacity: scalar(VarKind::GenCapacity, &g.id),
                dispatch: series(VarKind::Dispatch, &g.id),
            })
            .collect();
        let lines = network
            .lines
            .iter()
            .map(|l| LineResult {
                id: l.id.clone(),
                existing: l.existing_capacity,
                capacity: scalar(VarKind::LineCapacity, &l.id),
                flow: series(VarKind::Flow, &l.id),
            })
            .collect();
        let storage = network
            .storage_techs
            .iter()
            .map(|s| {
                let entity = store_entity(s, mode);
                let cap = |kind| component_var(lp, s, kind, mode).map_or(0.0, |j| x[j]);
                StorageResult {
                    id: s.id.clone(),
                    charger: cap(ComponentKind::Charger),
                    discharger: cap(ComponentKind::Discharger),
                    store: cap(ComponentKind::Store),
                    charge: series(VarKind::Charge, &s.id),
                    discharge: series(VarKind::Discharge, &s.id),
                    level: series(VarKind::Level, &entity),
                    spill: series(VarKind::Spill, &s.id),
                    store_entity: entity,
                }
            })
            .collect();
        let co2_price = lp.row(RowKind::Emission, "total", None).map(|r| -solution.dual[r]);
        SystemResult {
            mode,
            status: solution.status,
            objective: solution.objective,
            iterations: solution.iterations,
            solve_seconds: solution.solve_seconds,
            generators,
            lines,
            storage,
            prices: extract_nodal_prices(lp, solution, network),
            co2_price,
        }
    }

    pub fn generator(&self, id: &str) -> Option<&GeneratorResult> {
        self.generators.iter().find(|g| g.id == id)
    }

    pub fn line(&self, id: &str) -> Option<&LineResult> {
        self.lines.iter().find(|l| l.id == id)
    }

    pub fn storage(&self, id: &str) -> Option<&StorageResult> {
        self.storage.iter().find(|s| s.id == id)
    }
}
