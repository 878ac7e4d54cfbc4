use super::SimError;
use crate::control::{ControlLimits, RicGains};
use crate::dynamics::{GenVec, SystemParams, SystemState};
use crate::kinematics::EndEffectorPose;
use crate::spatial::EulerAngles;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Attitude beyond which a run is declared diverged (rad).
pub const MAX_TILT: f64 = 85.0 * std::f64::consts::PI / 180.0;

fn default_dt() -> f64 {
    1e-3
}

fn default_decimation() -> usize {
    10
}

fn default_substeps() -> usize {
    1
}

fn default_transit() -> f64 {
    5.0
}

/// A closed-loop simulation run. All quantities are SI, angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Control period and integration step (s).
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Simulated time (s).
    pub duration: f64,
    #[serde(default)]
    pub seed: u64,
    /// Log every n-th step.
    #[serde(default = "default_decimation")]
    pub telemetry_decimation: usize,
    /// RK4 sub-steps per control period.
    #[serde(default = "default_substeps")]
    pub integrator_substeps: usize,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default)]
    pub waypoints: Vec<WaypointSpec>,
    #[serde(default)]
    pub payload_events: Vec<PayloadEvent>,
    #[serde(default)]
    pub disturbances: Vec<Disturbance>,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub params: SystemParams,
    #[serde(default)]
    pub gains: RicGains,
    #[serde(default)]
    pub limits: ControlLimits,
    #[serde(default)]
    pub controller: ControllerMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    /// `[X, Y, Z, φ, θ, ψ, θ₁, θ₂]`.
    pub q: [f64; 8],
    #[serde(default)]
    pub qdot: [f64; 8],
}

impl Default for InitialState {
    /// Level hover at 1 m with the arm hanging straight down.
    fn default() -> Self {
        Self { q: [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, std::f64::consts::FRAC_PI_2, 0.0], qdot: [0.0; 8] }
    }
}

impl InitialState {
    pub fn to_state(&self) -> SystemState {
        SystemState::new(GenVec::from_column_slice(&self.q), GenVec::from_column_slice(&self.qdot))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSpec {
    /// Gripper position (m).
    pub position: [f64; 3],
    /// Gripper orientation `[φ, θ, ψ]` (rad).
    pub orientation: [f64; 3],
}

impl PoseSpec {
    pub fn to_pose(&self) -> EndEffectorPose {
        let [phi, theta, psi] = self.orientation;
        EndEffectorPose::new(Vector3::from(self.position), EulerAngles::new(phi, theta, psi))
    }
}

/// Which inverse-kinematics branch a waypoint uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchChoice {
    /// First solution returned by the solver.
    #[default]
    Primary,
    /// The other elbow, where one exists.
    Alternate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointSpec {
    pub pose: PoseSpec,
    /// Time the move ends and the hold begins (s).
    pub arrive: f64,
    /// Duration of the move (s).
    #[serde(default = "default_transit")]
    pub transit: f64,
    #[serde(default)]
    pub branch: BranchChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadAction {
    Attach,
    Detach,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayloadEvent {
    pub time: f64,
    pub action: PayloadAction,
    /// Payload mass (kg); required to attach.
    #[serde(default)]
    pub mass: f64,
}

/// External wrench active on `[start, end)`: force in the inertial frame
/// (N), moment in the body frame (N·m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disturbance {
    pub start: f64,
    pub end: f64,
    #[serde(default)]
    pub force: [f64; 3],
    #[serde(default)]
    pub moment: [f64; 3],
}

/// Standard deviations of additive Gaussian noise on the controller's view
/// of the state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// m
    pub position: f64,
    /// rad
    pub attitude: f64,
    /// rad
    pub joints: f64,
    /// m/s
    pub velocity: f64,
    /// rad/s
    pub attitude_rate: f64,
    /// rad/s
    pub joint_rate: f64,
}

impl NoiseSpec {
    pub fn is_zero(&self) -> bool {
        self.std_devs().iter().all(|s| *s == 0.0)
    }

    /// Per-coordinate standard deviations for `q` then `q̇`.
    pub fn std_devs(&self) -> [f64; 16] {
        let mut s = [0.0; 16];
        s[0..3].fill(self.position);
        s[3..6].fill(self.attitude);
        s[6..8].fill(self.joints);
        s[8..11].fill(self.velocity);
        s[11..14].fill(self.attitude_rate);
        s[14..16].fill(self.joint_rate);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerMode {
    #[default]
    Ric,
    /// No rotor or joint effort at all.
    Off,
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> SimError {
    SimError::InvalidScenario { field: field.into(), reason: reason.into() }
}

impl Scenario {
    /// Parses and validates a scenario. Parse errors name the failing field.
    pub fn from_json_str(text: &str) -> Result<Self, SimError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| SimError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Number of control periods.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// Step index an event time snaps to.
    pub fn step_of(&self, time: f64) -> usize {
        (time / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(invalid("duration", format!("must be > 0, got {}", self.duration)));
        }
        if self.telemetry_decimation == 0 {
            return Err(invalid("telemetry_decimation", "must be at least 1"));
        }
        if self.integrator_substeps == 0 {
            return Err(invalid("integrator_substeps", "must be at least 1"));
        }
        self.params.validate().map_err(|e| invalid("params", e.to_string()))?;
        self.gains.validate().map_err(|e| invalid("gains", e.to_string()))?;
        self.limits.validate().map_err(|e| invalid("limits", e.to_string()))?;

        let init = self.initial_state;
        if init.q.iter().chain(init.qdot.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("initial_state", "must be finite"));
        }
        if init.q[4].abs() >= MAX_TILT {
            return Err(invalid("initial_state.q", "pitch must be within ±85°"));
        }

        let mut last_arrival = f64::NEG_INFINITY;
        for (i, w) in self.waypoints.iter().enumerate() {
            let field = format!("waypoints[{i}]");
            let times = [w.arrive, w.transit];
            if w.pose.position.iter().chain(&w.pose.orientation).chain(&times).any(|v| !v.is_finite()) {
                return Err(invalid(field, "must be finite"));
            }
            if !(w.transit > 0.0) {
                return Err(invalid(format!("{field}.transit"), "must be > 0"));
            }
            if w.arrive - w.transit < last_arrival.max(0.0) {
                return Err(invalid(format!("{field}.arrive"), "move starts before the previous waypoint is reached"));
            }
            last_arrival = w.arrive;
        }

        let mut last_event = f64::NEG_INFINITY;
        for (i, e) in self.payload_events.iter().enumerate() {
            let field = format!("payload_events[{i}]");
            if !(e.time.is_finite() && e.time >= 0.0) {
                return Err(invalid(format!("{field}.time"), "must be finite and >= 0"));
            }
            if e.time < last_event {
                return Err(invalid(format!("{field}.time"), "events must be time-ordered"));
            }
            if e.time > self.duration {
                return Err(invalid(format!("{field}.time"), "after the end of the run"));
            }
            if !(e.mass.is_finite() && e.mass >= 0.0) {
                return Err(invalid(format!("{field}.mass"), "must be finite and >= 0"));
            }
            if e.action == PayloadAction::Attach && e.mass == 0.0 {
                return Err(invalid(format!("{field}.mass"), "attach needs a mass"));
            }
            last_event = e.time;
        }

        for (i, d) in self.disturbances.iter().enumerate() {
            let values = [d.start, d.end].into_iter().chain(d.force).chain(d.moment);
            if values.into_iter().any(|v| !v.is_finite()) || d.end <= d.start {
                return Err(invalid(format!("disturbances[{i}]"), "needs finite values and start < end"));
            }
        }
        if self.noise.std_devs().iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(invalid("noise", "standard deviations must be finite and >= 0"));
        }
        Ok(())
    }
}
