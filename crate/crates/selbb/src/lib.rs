//! Scenario files, metrics tables, slot traces and parameter sweeps for the
//! `selbb-core` simulator.

pub mod metrics;
pub mod scenario;
pub mod sweep;
pub mod trace;
pub mod verify;

pub use metrics::{run_prepared, run_scenario, write_csv, MetricsRecord, RunError, RunResult};
pub use scenario::{Algorithm, ConfigSpec, Scenario, ScenarioError, StrategyParams};
pub use sweep::{sweep, Grid, SweepResult};
pub use trace::{replay, write_trace, ReplayReport, TraceHeader, TraceLine};
