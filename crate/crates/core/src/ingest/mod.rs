//! Reading networks and scenarios from disk.
//!
//! A network bundle is a directory of comma-separated files with header
//! rows; see the crate README for the column layout.

mod bundle;
mod scenario;

pub use bundle::{
    parse_network_bundle, read_network_bundle, resample_snapshots, write_network_bundle, BundleError, ResampleError,
};
pub use scenario::{parse_scenario, parse_scenario_str, ScenarioConfig, ScenarioError, StorageMode};
