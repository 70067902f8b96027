//! Scenario files, experiment drivers and their CSV output.

pub mod calibrate;
pub mod csv;
pub mod engine;
pub mod scenario;

pub use calibrate::{fit_efficiencies, CalibrationFit, CalibrationTargets};
pub use csv::{emit_csv, write_csv, CSV_HEADER};
pub use engine::{
    run_analytic, run_montecarlo, run_point, sweep_analyzer, sweep_delay, sweep_overlap, AnalyticRates, Channel,
    CountsRecord, Engine, Setting,
};
pub use scenario::{parse_scenario, Policy, Scenario, ScenarioError, SweepKind};
