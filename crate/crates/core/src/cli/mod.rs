//! Configuration loading, run orchestration and file output for the
//! `spindec` binary.

mod config;
mod output;
mod run;

use thiserror::Error;

pub use config::{
    parse_quantity, BathConfig, CentralConfig, ConvergeConfig, Dimension, EngineSection, Field, FieldConfig, Frequency,
    Length, NoiseConfig, OutputConfig, PulseConfig, RunConfig, Time, TimeConfig, SCHEMA,
};
pub use output::{curve_csv, num, read_curve, summary_json, write_atomic, Provenance, VERSION};
pub use run::{
    load_config, run_converge, run_fit, run_generate, run_noise, run_oracle_compare, run_simulate, AxisReport,
    ConvergenceReport, ConvergenceRow, EnsembleStats,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("unknown key `{key}`{}", suggestion.as_ref().map(|s| format!("; did you mean `{s}`?")).unwrap_or_default())]
    UnknownKey { key: String, suggestion: Option<String> },
    #[error("bad quantity `{value}`: {msg}")]
    Unit { value: String, msg: String },
    #[error("unknown isotope `{name}`; available: {available}")]
    UnknownIsotope { name: String, available: String },
    #[error("{key}: file `{path}` does not exist")]
    MissingFile { key: String, path: String },
    #[error("{0}")]
    Invalid(String),
}
