//! Library side of the `cdp` command: release extraction, experiment runs,
//! case-study reports and re-aggregation of stored results.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod experiment;
pub mod explain;
pub mod extract;
pub mod report;

pub use error::{CliError, CliResult};
