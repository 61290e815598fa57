//! Storage valuation on a capacity-expansion model of an electricity
//! network.
//!
//! The pipeline reads a network bundle ([`ingest`]), builds a linear
//! program for one storage sizing scenario ([`formulation`]), solves it with
//! a revised simplex that also returns duals ([`solver`]), and derives
//! storage metrics from the named result ([`results`], [`analysis`]).
//! [`run`] chains these steps.

pub mod analysis;
pub mod formulation;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod results;
pub mod run;
pub mod solver;
