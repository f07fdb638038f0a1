//! Experiment harness for the prasym library: sweep configuration,
//! presets, the (n, seed) grid runner, CSV and SVG emission, and the
//! lemma verification suite. The `prasym` binary is a thin shell over
//! this crate.

pub mod config;
pub mod csv;
pub mod experiment;
pub mod plot;
pub mod verify_suite;

pub use config::{ExperimentConfig, ModelConfig, Preset, PreferenceSpec, DEFAULT_MASTER_SEED};
pub use experiment::{run_experiment, ExperimentOutput, ExperimentRecord, ExperimentSummary};
pub use plot::{emit_loglog_plot, PlotField};
pub use verify_suite::{run_verify, VerifyConstants, VerifyOutcome};
