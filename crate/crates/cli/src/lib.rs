//! Scenario files, eigenpair caching and CSV export for the `qwell` binary.

// NaN-rejecting guards are written as !(x > y) on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod config;
pub mod error;
pub mod scenario;

pub use cache::EigenCache;
pub use config::{Artifact, InitialState, ScenarioConfig};
pub use error::{CliError, CliResult};
pub use scenario::{run_scenario, sweep, sweep_bundle, inverse_bundle, Bundle, OutputFile};
