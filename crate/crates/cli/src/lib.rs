//! Command implementations behind the `wpid` binary.
//!
//! Each `cmd_*` function takes a resolved [`RunConfig`] and writes its
//! results into the configured output directory.

mod commands;
pub mod config;
mod error;

pub use commands::{cmd_match, cmd_simulate, cmd_sweep, sweep_csv, MatchReport, MatchSummary, SimulateReport, Timing};
pub use config::{parse_ts_list, Overrides, RunConfig, StageSelection};
pub use error::{CliError, Result};
