//! Experiment runner: solver runs with a content-addressed cache, ensemble
//! error estimates, comparison against analytic truth, and CSV/JSON output.

pub mod cache;
pub mod compare;
pub mod config;
pub mod error;
pub mod experiment;
pub mod plot;
pub mod sweep;

pub use cache::{run_key, RunCache, CACHE_ENV, CACHE_REVISION};
pub use compare::{compare_estimate_to_truth, localization, Comparison, Localization};
pub use config::{standard_ensembles, EnsembleSpec, ExperimentConfig};
pub use error::{HarnessError, Result};
pub use experiment::{execute, recompute_tables, run_experiment, ExperimentOutcome, RunManifest, RunMode};
pub use plot::{emit_plot_data, PlotData};
pub use sweep::run_scalar_sweep;
