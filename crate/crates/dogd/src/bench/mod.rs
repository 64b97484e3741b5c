//! Experiment harness: configuration, seeded multi-arm runs, CSV and SVG
//! emission.
//!
//! An experiment is a set of arms (one per delay level, drift exponent, or
//! oracle variant) replayed over shared per-repetition loss realizations,
//! so that arm comparisons are paired. Repetitions run in parallel and are
//! merged in a fixed order; given the same configuration and seed the
//! records file is byte-identical across runs.

pub mod config;
pub mod csvio;
pub mod driver;
pub mod experiments;
pub mod plot;

pub use config::{parse_config_file, parse_config_str, ExperimentConfig, Overrides};
pub use csvio::{read_records, write_records, write_summary, RunRecord};
pub use driver::{
    run_experiment, summarize_records, ArmSpec, ArmSummary, ExperimentOutput, ExperimentPlan,
};
pub use experiments::{
    build_plan, quadfrac_certificates, Provider, ProviderSpec, ProviderStream,
};
pub use plot::render_plot;
