//! Translation of a network and scenario into a sparse linear program.

mod build;
mod export;
mod lp;

pub use build::{
    add_balance_constraints, add_emission_constraint, add_equity_constraints, add_flow_constraints, add_generators,
    add_line_volume_constraint, build_problem, component_var, converter_coupled, ep_coupled, store_entity,
    FormulationError,
};
pub use export::{read_mps, write_mps, MpsError};
pub use lp::{
    dense_lp, ConstraintRegistry, Key, LinearProgram, LpBuilder, Registry, Relation, RowKey, RowKind, VarKey, VarKind,
    VariableRegistry,
};
