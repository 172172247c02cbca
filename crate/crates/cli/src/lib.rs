//! Batch front-end for α-patch runs: TOML configs, parameter sweeps and bound analysis.
//!
//! A run directory holds `resolved_config.toml`, `series.ndjson` (one diagnostics
//! record per line), `snapshots/curve_<patch>_<step>.csv` and `verdict.json`.

pub mod commands;
pub mod config;

pub use commands::{analyze_dir, run_config, sweep, CliError, RunOutcome, SweepReport};
pub use config::{load_config, parse_config, render_config, ConfigError, Orientation, PatchSpec, RunConfig, ShapeSpec};

/// Run reached `t_end`.
pub const EXIT_OK: u8 = 0;
/// Bad arguments or config, or an I/O failure.
pub const EXIT_USAGE: u8 = 1;
/// Run ended with a blow-up verdict.
pub const EXIT_BLOWUP: u8 = 2;
