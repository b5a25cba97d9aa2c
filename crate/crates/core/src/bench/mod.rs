//! Seeded experiments and sweeps with CSV and JSON output.

pub mod config;
pub mod row;
pub mod runner;

pub use config::{ExperimentConfig, GridSpec, RegularityOptions, SweepConfig, DEFAULT_EPSILONS};
pub use row::{read_rows, read_rows_file, write_rows, write_rows_file, ColumnKind, ResultRow, RowKey, COLUMN_KINDS, HEADER};
pub use runner::{
    field_regularity, load_previous, run_experiment, sweep, write_outputs, BoundRecord, Companion, RowFailure,
    SweepOptions, SweepOutcome, TraceRecord, BOUNDS_FILE, CONFIG_FILE, RESULTS_FILE, TRACES_FILE,
};
