//! Robust internal-loop compensator (RIC) control of the vehicle and arm,
//! and allocation of thrust and moments to the rotors.
//!
//! Eight axes run the same two-loop structure. The `X` and `Y` axes
//! produce pitch and roll setpoints for the attitude axes; `Z` produces the
//! thrust, the attitude axes the body moments and the joint axes the joint
//! torques.

mod mixer;
mod ric;

pub use mixer::{mixer_matrix, mixer_solve, Mixer, SaturatedSpeeds, FEASIBILITY_TOL};
pub use ric::{ric_axis_step, AxisEffort, AxisInput, RicAxisGains, RicAxisState};

use crate::dynamics::{ControlCommand, SystemParams, SystemState};
use crate::trajectory::TrajectorySample;
use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("command needs rotor {rotor} at omega^2 = {omega_squared:e}, outside the feasible set")]
    InfeasibleCommand { rotor: usize, omega_squared: f64 },
    #[error("mixer matrix is singular")]
    SingularMixer,
    #[error("invalid gains for axis `{axis}`")]
    InvalidGains { axis: &'static str },
    #[error("invalid limit `{field}`: {value}")]
    InvalidLimit { field: &'static str, value: f64 },
}

/// Per-axis gains; defaults are the tuned values of the reference system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RicGains {
    pub x: RicAxisGains,
    pub y: RicAxisGains,
    pub z: RicAxisGains,
    pub phi: RicAxisGains,
    pub theta: RicAxisGains,
    pub psi: RicAxisGains,
    pub theta1: RicAxisGains,
    pub theta2: RicAxisGains,
}

impl Default for RicGains {
    fn default() -> Self {
        let xy = RicAxisGains::new(0.3, 0.7, 0.001, 0.001, 0.0, 1.0);
        let tilt = RicAxisGains::new(30.0, 5.0, 30.0, 5.0, 10.0, 0.01);
        let joint = RicAxisGains::new(5.0, 3.0, 5.0, 3.0, 1.0, 0.1);
        Self {
            x: xy,
            y: xy,
            z: RicAxisGains::new(5.0, 3.0, 5.0, 3.0, 1.0, 1.0),
            phi: tilt,
            theta: tilt,
            psi: RicAxisGains::new(5.0, 3.0, 5.0, 3.0, 1.0, 0.02),
            theta1: joint,
            theta2: joint,
        }
    }
}

impl RicGains {
    pub fn axes(&self) -> [(&'static str, &RicAxisGains); 8] {
        [
            ("x", &self.x),
            ("y", &self.y),
            ("z", &self.z),
            ("phi", &self.phi),
            ("theta", &self.theta),
            ("psi", &self.psi),
            ("theta1", &self.theta1),
            ("theta2", &self.theta2),
        ]
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        match self.axes().into_iter().find(|(_, g)| !g.is_valid()) {
            Some((axis, _)) => Err(ControlError::InvalidGains { axis }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlLimits {
    /// Bound on the roll and pitch setpoints (rad).
    pub max_tilt: f64,
    /// Bound on each internal-loop integral.
    pub integral_limit: f64,
}

impl Default for ControlLimits {
    fn default() -> Self {
        Self { max_tilt: 20f64.to_radians(), integral_limit: 10.0 }
    }
}

impl ControlLimits {
    pub fn validate(&self) -> Result<(), ControlError> {
        for (field, value) in [("max_tilt", self.max_tilt), ("integral_limit", self.integral_limit)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ControlError::InvalidLimit { field, value });
            }
        }
        Ok(())
    }
}

/// Inertial `X`/`Y` errors expressed along the vehicle's heading:
/// `x̃ = X̃ cos ψ + Ỹ sin ψ`, `ỹ = X̃ sin ψ − Ỹ cos ψ`.
///
/// The map is its own inverse, so it also takes heading-frame quantities
/// back to the inertial frame.
pub fn xy_error_to_body(ex: f64, ey: f64, psi: f64) -> (f64, f64) {
    let (s, c) = psi.sin_cos();
    (ex * c + ey * s, ex * s - ey * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControllerOutputs {
    pub cmd: ControlCommand,
    pub phi_des: f64,
    pub theta_des: f64,
}

/// Controller states of all eight axes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RicStates {
    pub x: RicAxisState,
    pub y: RicAxisState,
    pub z: RicAxisState,
    pub phi: RicAxisState,
    pub theta: RicAxisState,
    pub psi: RicAxisState,
    pub theta1: RicAxisState,
    pub theta2: RicAxisState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RicController {
    gains: RicGains,
    limits: ControlLimits,
    /// Weight compensated by the altitude feedforward (N).
    weight: f64,
    states: RicStates,
}

impl RicController {
    /// The altitude feedforward is the nominal weight of vehicle and arm,
    /// without any payload.
    pub fn new(gains: RicGains, limits: ControlLimits, params: &SystemParams) -> Result<Self, ControlError> {
        gains.validate()?;
        limits.validate()?;
        Ok(Self { gains, limits, weight: params.total_mass() * params.g, states: RicStates::default() })
    }

    pub fn gains(&self) -> &RicGains {
        &self.gains
    }

    pub fn states(&self) -> &RicStates {
        &self.states
    }

    pub fn reset(&mut self) {
        self.states = RicStates::default();
    }

    /// One control period. `setpoint` holds `[X, Y, Z, ψ, θ₁, θ₂]` and rates.
    pub fn step(&mut self, setpoint: &TrajectorySample, measured: &SystemState, dt: f64) -> ControllerOutputs {
        let g = &self.gains;
        let lim = self.limits.integral_limit;
        let s = &mut self.states;
        let (q, qd) = (&measured.q, &measured.qdot);
        let r = &setpoint.position;
        let rd = &setpoint.velocity;

        let (tilt_x, tilt_y) = xy_step(g, s, setpoint, measured, dt, lim);
        let theta_des = tilt_x.clamp(-self.limits.max_tilt, self.limits.max_tilt);
        let phi_des = tilt_y.clamp(-self.limits.max_tilt, self.limits.max_tilt);

        let axis = |gains: &RicAxisGains, st: &mut RicAxisState, y_ref, y_ref_rate, y, y_rate, u_ex| {
            ric_axis_step(gains, st, &AxisInput { y_ref, y_ref_rate, y, y_rate, u_ex }, dt, lim).u
        };
        let thrust = axis(&g.z, &mut s.z, r[2], rd[2], q[2], qd[2], self.weight);
        let tau_a = Vector3::new(
            axis(&g.phi, &mut s.phi, phi_des, 0.0, q[3], qd[3], 0.0),
            axis(&g.theta, &mut s.theta, theta_des, 0.0, q[4], qd[4], 0.0),
            axis(&g.psi, &mut s.psi, r[3], rd[3], q[5], qd[5], 0.0),
        );
        let tau_m = Vector2::new(
            axis(&g.theta1, &mut s.theta1, r[4], rd[4], q[6], qd[6], 0.0),
            axis(&g.theta2, &mut s.theta2, r[5], rd[5], q[7], qd[7], 0.0),
        );
        ControllerOutputs { cmd: ControlCommand { thrust, tau_a, tau_m }, phi_des, theta_des }
    }
}

/// Horizontal loops. Reference models run in the inertial frame; errors
/// are taken along the heading before the gains are applied, and the
/// heading-frame external effort is mapped back to drive the models.
/// Returns the unsaturated pitch and roll setpoints.
fn xy_step(g: &RicGains, s: &mut RicStates, sp: &TrajectorySample, m: &SystemState, dt: f64, lim: f64) -> (f64, f64) {
    let (q, qd) = (&m.q, &m.qdot);
    let psi = q[5];
    if !s.x.initialized || !s.y.initialized {
        s.x.align(q[0], qd[0]);
        s.y.align(q[1], qd[1]);
    }
    let (ex, ey) = xy_error_to_body(sp.position[0] - q[0], sp.position[1] - q[1], psi);
    let (dex, dey) = xy_error_to_body(sp.velocity[0] - qd[0], sp.velocity[1] - qd[1], psi);
    let u_cx = g.x.kp_ext * ex + g.x.kd_ext * dex;
    let u_cy = g.y.kp_ext * ey + g.y.kd_ext * dey;

    let (ax, ay) = xy_error_to_body(u_cx / g.x.tau_c, u_cy / g.y.tau_c, psi);
    s.x.advance_model(ax, dt);
    s.y.advance_model(ay, dt);

    let (erx, ery) = xy_error_to_body(s.x.ym - q[0], s.y.ym - q[1], psi);
    let (derx, dery) = xy_error_to_body(s.x.ym_dot - qd[0], s.y.ym_dot - qd[1], psi);
    s.x.accumulate(erx, dt, lim);
    s.y.accumulate(ery, dt, lim);
    let u_kx = g.x.kp_int * erx + g.x.kd_int * derx + g.x.ki_int * s.x.integ;
    let u_ky = g.y.kp_int * ery + g.y.kd_int * dery + g.y.ki_int * s.y.integ;
    (u_cx + u_kx, u_cy + u_ky)
}
