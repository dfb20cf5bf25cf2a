//! Experiment driver: configuration, seeded sweeps, CSV/SVG output, and the
//! elastic transition demonstration.

mod check;
mod config;
mod demo;
mod plot;
mod sweep;

pub use check::{run_check, CheckReport, CheckRow, Mode, FUNCTIONAL_DIMS, MAX_REAL_K, REAL_TOLERANCE};
pub use config::{parse_schemes, ExperimentConfig, RateSetting, CALIBRATION_DIMS};
pub use demo::{run_transition_demo, TransitionDemo, TransitionReport, TransitionRow};
pub use plot::{emit_plots, render_svg};
pub use sweep::{
    run_sweep, trial_seed, Metric, Stat, SummaryRow, SweepResult, TrialRecord, AGGREGATE_HEADER,
    TRIALS_HEADER,
};
