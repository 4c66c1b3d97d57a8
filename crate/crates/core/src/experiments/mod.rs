//! Config-driven scenarios: load a TOML file, optimize, evaluate and write
//! the results.

mod config;
mod export;
mod runner;

pub use config::{
    load_config, parse_config, ConfigError, Mode, ReportConfig, ScenarioConfig, SweepConfig,
};
pub use export::{
    export, read_document, write_document, write_json, write_learning_curve_csv,
    write_sweep_summary, write_trajectory_csv, ExportFormat, ResultDocument, ScenarioInfo,
    TrajectoryTable,
};
pub use runner::{
    run_scenario, run_sweep, ExperimentError, LearnedParams, Metadata, Metrics, ScenarioResult,
    SweepCell, PASSAGE_LEVEL, SETTLE_TOL,
};
