//! Command-line front end for `despeckle-core`: run configurations, the
//! `add-noise`, `denoise`, `evaluate` and `benchmark` commands, and CSV output.
//!
//! Exit statuses: 0 success, 1 usage or configuration error, 2 numerical
//! divergence, 3 I/O error.

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;

pub use bench::{run_benchmark, BenchCase, BenchRow, BenchmarkPlan, CSV_HEADER};
pub use commands::{cmd_add_noise, cmd_denoise, cmd_evaluate, DenoiseSummary, Evaluation};
pub use config::{load_run_config, parse_config, ConfigFile, Entry, RunConfig};
pub use error::{CliError, CliResult};
