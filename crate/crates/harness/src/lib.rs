//! Experiment sweeps over landscapes, requirements, tuners and seeds, with
//! Scott-Knott ranking of the outcomes.

pub mod config;
pub mod experiment;
pub mod trajectories;

pub use config::{ExperimentConfig, LandscapeSource, RequirementSource, TunerKind, TunerSpec};
pub use experiment::{run_experiment, summarize, ExperimentOutcome, RunRecord, SummaryRow};
pub use trajectories::{aggregate, emit_trajectory_plots_data, CurvePoint, RunTrajectory};
