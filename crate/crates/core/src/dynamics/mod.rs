//! Rotor aerodynamics and the coupled vehicle–arm equations of motion.
//!
//! Generalized coordinates are `q = [X, Y, Z, φ, θ, ψ, θ₁, θ₂]` with `Z` up.
//! Attitude rates are Euler-angle rates; body rates follow from `J_v`.

mod multibody;
mod payload;
mod reduced;
mod rotor;

pub use multibody::{Energy, InverseDynamics, Multibody};
pub use payload::{effective_link2, Link2Properties};
pub use reduced::{reduced_quadrotor_eom, ReducedAccelerations};
pub use rotor::{rotor_forces, RotorOutput};

use crate::kinematics::{JointAngles, LinkLengths, VehicleConfig};
use crate::spatial::EulerAngles;
use nalgebra::{SMatrix, SVector, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type GenVec = SVector<f64, 8>;
pub type GenMat = SMatrix<f64, 8, 8>;

/// Mass matrices with an estimated condition number above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("mass matrix is singular (estimated condition number {condition:.3e})")]
    SingularMassMatrix { condition: f64 },
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },
}

/// Physical parameters of the vehicle, arm and rotors. Defaults are the
/// identified values of the reference airframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Vehicle mass (kg).
    pub m: f64,
    /// Centre of mass to rotor axis (m).
    pub d: f64,
    pub ix: f64,
    pub iy: f64,
    pub iz: f64,
    /// Rotor inertia (kg·m²).
    pub ir: f64,
    /// Base link, link 1 and link 2 masses (kg).
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    /// Base link, link 1 and link 2 lengths (m).
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
    /// Thrust coefficients (N·s²/rad²).
    pub kf: [f64; 4],
    /// Drag-moment coefficients (N·m·s²/rad²).
    pub km: [f64; 4],
    pub g: f64,
    /// Servo rotor inertia reflected through the gearbox onto each joint (kg·m²).
    pub joint_armature: [f64; 2],
    /// Rotor speed limit (rad/s).
    pub omega_max: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            m: 1.0,
            d: 223.5e-3,
            ix: 13.215e-3,
            iy: 12.522e-3,
            iz: 23.527e-3,
            ir: 33.216e-6,
            m0: 30e-3,
            m1: 55e-3,
            m2: 112e-3,
            l0: 30e-3,
            l1: 70e-3,
            l2: 85e-3,
            kf: [1.667e-5, 1.285e-5, 1.711e-5, 1.556e-5],
            km: [3.965e-7, 2.847e-7, 4.404e-7, 3.170e-7],
            g: 9.81,
            joint_armature: [0.01, 0.01],
            omega_max: 1200.0,
        }
    }
}

impl SystemParams {
    pub fn link_lengths(&self) -> LinkLengths {
        LinkLengths::new(self.l0, self.l1, self.l2)
    }

    /// Vehicle plus arm, without payload.
    pub fn total_mass(&self) -> f64 {
        self.m + self.m0 + self.m1 + self.m2
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let positive: [(&'static str, f64); 15] = [
            ("m", self.m),
            ("d", self.d),
            ("ix", self.ix),
            ("iy", self.iy),
            ("iz", self.iz),
            ("ir", self.ir),
            ("m0", self.m0),
            ("m1", self.m1),
            ("m2", self.m2),
            ("l0", self.l0),
            ("l1", self.l1),
            ("l2", self.l2),
            ("omega_max", self.omega_max),
            ("kf", self.kf.iter().copied().fold(f64::INFINITY, f64::min)),
            ("km", self.km.iter().copied().fold(f64::INFINITY, f64::min)),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(DynamicsError::InvalidParams { field, reason: format!("must be finite and > 0, got {v}") });
            }
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(DynamicsError::InvalidParams { field: "g", reason: format!("must be finite and >= 0, got {}", self.g) });
        }
        if self.joint_armature.iter().any(|j| !(j.is_finite() && *j >= 0.0)) {
            return Err(DynamicsError::InvalidParams { field: "joint_armature", reason: "must be finite and >= 0".into() });
        }
        Ok(())
    }
}

/// Positions and rates of the eight generalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SystemState {
    pub q: GenVec,
    pub qdot: GenVec,
}

impl SystemState {
    pub fn new(q: GenVec, qdot: GenVec) -> Self {
        Self { q, qdot }
    }

    pub fn at_rest(q: GenVec) -> Self {
        Self { q, qdot: GenVec::zeros() }
    }

    pub fn position(&self) -> Vector3<f64> {
        self.q.fixed_rows::<3>(0).into_owned()
    }

    pub fn attitude(&self) -> EulerAngles {
        EulerAngles::new(self.q[3], self.q[4], self.q[5])
    }

    pub fn euler_rates(&self) -> Vector3<f64> {
        self.qdot.fixed_rows::<3>(3).into_owned()
    }

    pub fn joints(&self) -> JointAngles {
        JointAngles::new(self.q[6], self.q[7])
    }

    pub fn vehicle(&self) -> VehicleConfig {
        VehicleConfig::new(self.q[0], self.q[1], self.q[2], self.q[5])
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.qdot.iter()).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotorSpeeds {
    pub omega: [f64; 4],
}

impl RotorSpeeds {
    pub fn new(omega: [f64; 4]) -> Self {
        Self { omega }
    }

    /// `Ω₁ − Ω₂ + Ω₃ − Ω₄`, the net rotor speed driving gyroscopic moments.
    pub fn omega_bar(&self) -> f64 {
        let w = &self.omega;
        w[0] - w[1] + w[2] - w[3]
    }

    pub fn is_valid(&self, omega_max: f64) -> bool {
        self.omega.iter().all(|w| w.is_finite() && *w >= 0.0 && *w <= omega_max)
    }
}

/// Total thrust (N), body moments (N·m) and joint torques (N·m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlCommand {
    pub thrust: f64,
    pub tau_a: Vector3<f64>,
    pub tau_m: Vector2<f64>,
}

impl ControlCommand {
    pub fn is_finite(&self) -> bool {
        self.thrust.is_finite() && self.tau_a.iter().chain(self.tau_m.iter()).all(|v| v.is_finite())
    }
}

/// Force in the inertial frame and moment in the body frame, both acting at
/// the vehicle's centre of mass.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InteractionWrench {
    pub force: Vector3<f64>,
    pub moment: Vector3<f64>,
}

impl InteractionWrench {
    pub fn new(force: Vector3<f64>, moment: Vector3<f64>) -> Self {
        Self { force, moment }
    }

    pub fn zero() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PayloadSpec {
    pub mass: f64,
    pub attached: bool,
}

impl PayloadSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn attached(mass: f64) -> Self {
        Self { mass, attached: true }
    }

    /// Mass actually carried by the gripper.
    pub fn carried_mass(&self) -> f64 {
        if self.attached {
            self.mass
        } else {
            0.0
        }
    }
}

/// Inverse dynamics for one state; see [`Multibody::inverse_dynamics`].
pub fn inverse_dynamics(
    state: &SystemState,
    qddot: &GenVec,
    params: &SystemParams,
    payload: &PayloadSpec,
    speeds: Option<&RotorSpeeds>,
) -> InverseDynamics {
    Multibody::new(params, payload).inverse_dynamics(state, qddot, speeds.map(RotorSpeeds::omega_bar).unwrap_or(0.0))
}

/// Generalized accelerations under a command; see [`Multibody::forward_dynamics`].
pub fn forward_dynamics(
    state: &SystemState,
    cmd: &ControlCommand,
    speeds: &RotorSpeeds,
    params: &SystemParams,
    payload: &PayloadSpec,
    disturbance: &InteractionWrench,
) -> Result<GenVec, DynamicsError> {
    Multibody::new(params, payload).forward_dynamics(state, cmd, speeds.omega_bar(), disturbance)
}
