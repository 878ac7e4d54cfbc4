//! Fixed-step closed-loop simulation driven by scenario files.
//!
//! Each control period evaluates the reference plan, runs the controller,
//! allocates thrust and moments to the rotors and integrates the coupled
//! dynamics with RK4 under a zero-order hold.

mod engine;
mod integrator;
mod scenario;
mod summary;
mod telemetry;

pub use engine::{build_plan, run_scenario, PlannedRun, RunOutput, Simulation, DIVERGENCE_BOUND};
pub use integrator::rk4_step;
pub use scenario::{
    BranchChoice, ControllerMode, Disturbance, InitialState, NoiseSpec, PayloadAction, PayloadEvent, PoseSpec, Scenario,
    WaypointSpec, MAX_TILT,
};
pub use summary::{HoldSummary, PayloadRecovery, RunSummary, TelemetryStats, RECOVERY_BAND, STEADY_WINDOW};
pub use telemetry::{column_names, read_csv, write_csv, TelemetryError, TelemetryFrame, COLUMN_COUNT, HEADER_COMMENT};

use crate::control::ControlError;
use crate::kinematics::KinematicsError;
use crate::trajectory::TrajectoryError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("invalid scenario field `{field}`: {reason}")]
    InvalidScenario { field: String, reason: String },
    #[error("{0}")]
    Io(String),
    #[error("waypoint {waypoint}: {source}")]
    Ik { waypoint: usize, source: KinematicsError },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error("simulation diverged at t = {time} s: {reason}")]
    Diverged { time: f64, reason: String, partial: Option<Box<RunOutput>> },
}
