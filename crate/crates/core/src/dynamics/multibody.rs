//! Recursive Newton–Euler over the floating vehicle and the two arm links.
//!
//! Bodies and their frames:
//!
//! * base: vehicle plus the base link, origin at the vehicle's centre of
//!   mass, axes along the body axes;
//! * link 1: origin on joint 1 at `(0, 0, −L0)`, `z` along the joint axis,
//!   `x` along the link;
//! * link 2: origin on joint 2 at the tip of link 1, `z` along the joint
//!   axis, `x` along the link towards the gripper.
//!
//! Velocities and accelerations are propagated outward in each body's own
//! frame, then forces are accumulated inward. Gravity enters as an upward
//! acceleration of the base.

use super::{
    effective_link2, ControlCommand, DynamicsError, GenMat, GenVec, InteractionWrench, PayloadSpec, SystemParams,
    SystemState, MAX_CONDITION,
};
use crate::spatial::{euler_rate_jacobian, euler_rate_jacobian_dot, euler_to_rotation, EulerAngles};
use nalgebra::{Matrix3, Vector3};
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq)]
struct RigidBody {
    mass: f64,
    /// Centre of mass in the body frame.
    com: Vector3<f64>,
    /// Inertia about the centre of mass, body axes.
    inertia: Matrix3<f64>,
}

impl RigidBody {
    /// Newton–Euler wrench about the frame origin for a body whose origin
    /// has proper acceleration `a` and which rotates at `w`, `dw`.
    fn wrench(&self, a: &Vector3<f64>, w: &Vector3<f64>, dw: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
        let c = &self.com;
        let a_com = a + dw.cross(c) + w.cross(&w.cross(c));
        let f = a_com * self.mass;
        let n = self.inertia * dw + w.cross(&(self.inertia * w)) + c.cross(&f);
        (f, n)
    }
}

/// Generalized forces and the wrench the arm exerts on the vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseDynamics {
    pub generalized: GenVec,
    pub wrench: InteractionWrench,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub kinetic: f64,
    pub potential: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential
    }
}

/// Mass properties of the vehicle–arm system for one payload state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multibody {
    base: RigidBody,
    link1: RigidBody,
    link2: RigidBody,
    joint1: Vector3<f64>,
    joint2: Vector3<f64>,
    /// Link-1 axes in the base frame at `θ₁ = 0`.
    mount: Matrix3<f64>,
    armature: [f64; 2],
    rotor_inertia: f64,
    g: f64,
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

/// Slender rod along local x with centre of mass at `com`.
fn rod(mass: f64, com: f64, inertia_com: f64) -> RigidBody {
    RigidBody {
        mass,
        com: Vector3::new(com, 0.0, 0.0),
        inertia: Matrix3::from_diagonal(&Vector3::new(0.0, inertia_com, inertia_com)),
    }
}

impl Multibody {
    pub fn new(params: &SystemParams, payload: &PayloadSpec) -> Self {
        let p = params;
        // Vehicle plus the base link hanging from its centre of mass.
        let base_mass = p.m + p.m0;
        let base_com = Vector3::new(0.0, 0.0, -p.m0 * p.l0 / 2.0 / base_mass);
        let rod_about_origin = p.m0 * p.l0 * p.l0 / 3.0;
        let about_origin = Matrix3::from_diagonal(&Vector3::new(p.ix + rod_about_origin, p.iy + rod_about_origin, p.iz));
        let shift = base_mass * (Matrix3::identity() * base_com.norm_squared() - base_com * base_com.transpose());
        let base = RigidBody { mass: base_mass, com: base_com, inertia: about_origin - shift };

        let link2 = effective_link2(p, payload);
        Self {
            base,
            link1: rod(p.m1, p.l1 / 2.0, p.m1 * p.l1 * p.l1 / 12.0),
            link2: rod(link2.mass, link2.com_offset, link2.inertia_com),
            joint1: Vector3::new(0.0, 0.0, -p.l0),
            joint2: Vector3::new(p.l1, 0.0, 0.0),
            mount: Matrix3::new(0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0),
            armature: p.joint_armature,
            rotor_inertia: p.ir,
            g: p.g,
        }
    }

    /// Generalized forces producing `qddot`, by recursive Newton–Euler.
    ///
    /// Position rows are inertial forces at the vehicle's centre of mass,
    /// attitude rows are `J_vᵀ` times the body moment, joint rows are joint
    /// torques. `omega_bar` drives the rotor gyroscopic moment; pass zero to
    /// leave it out.
    pub fn inverse_dynamics(&self, state: &SystemState, qddot: &GenVec, omega_bar: f64) -> InverseDynamics {
        self.newton_euler(&state.q, &state.qdot, qddot, self.g, omega_bar)
    }

    fn newton_euler(&self, q: &GenVec, qd: &GenVec, qdd: &GenVec, g: f64, omega_bar: f64) -> InverseDynamics {
        let att = EulerAngles::new(q[3], q[4], q[5]);
        let eta_d = Vector3::new(qd[3], qd[4], qd[5]);
        let eta_dd = Vector3::new(qdd[3], qdd[4], qdd[5]);
        let r_ib = *euler_to_rotation(&att).matrix();
        let jv = euler_rate_jacobian(&att);
        let z = Vector3::z();

        // Base.
        let w0 = jv * eta_d;
        let dw0 = jv * eta_dd + euler_rate_jacobian_dot(&att, &eta_d) * eta_d;
        let a0 = r_ib * Vector3::new(qdd[0], qdd[1], qdd[2] + g);

        // Link 1.
        let r01 = self.mount * rot_z(q[6]);
        let w0_in1 = r01.transpose() * w0;
        let w1 = w0_in1 + z * qd[6];
        let dw1 = r01.transpose() * dw0 + z * qdd[6] + w0_in1.cross(&(z * qd[6]));
        let p1 = &self.joint1;
        let a1 = r01.transpose() * (a0 + dw0.cross(p1) + w0.cross(&w0.cross(p1)));

        // Link 2.
        let r12 = rot_x(FRAC_PI_2) * rot_z(q[7]);
        let w1_in2 = r12.transpose() * w1;
        let w2 = w1_in2 + z * qd[7];
        let dw2 = r12.transpose() * dw1 + z * qdd[7] + w1_in2.cross(&(z * qd[7]));
        let p2 = &self.joint2;
        let a2 = r12.transpose() * (a1 + dw1.cross(p2) + w1.cross(&w1.cross(p2)));

        // Inward force recursion.
        let (f2, n2) = self.link2.wrench(&a2, &w2, &dw2);
        let (f1_own, n1_own) = self.link1.wrench(&a1, &w1, &dw1);
        let f2_in1 = r12 * f2;
        let f1 = f1_own + f2_in1;
        let n1 = n1_own + r12 * n2 + p2.cross(&f2_in1);
        let f_arm = r01 * f1;
        let n_arm = r01 * n1 + p1.cross(&f_arm);
        let (f0_own, n0_own) = self.base.wrench(&a0, &w0, &dw0);
        let f0 = f0_own + f_arm;
        let gyro = Vector3::new(-self.rotor_inertia * w0.y * omega_bar, self.rotor_inertia * w0.x * omega_bar, 0.0);
        let n0 = n0_own + n_arm - gyro;

        let force_inertial = r_ib.transpose() * f0;
        let moment_gen = jv.transpose() * n0;
        let generalized = GenVec::from_column_slice(&[
            force_inertial.x,
            force_inertial.y,
            force_inertial.z,
            moment_gen.x,
            moment_gen.y,
            moment_gen.z,
            n1.z + self.armature[0] * qdd[6],
            n2.z + self.armature[1] * qdd[7],
        ]);
        InverseDynamics {
            generalized,
            wrench: InteractionWrench::new(-(r_ib.transpose() * f_arm), -n_arm),
        }
    }

    /// Mass matrix assembled from unit-acceleration probes.
    ///
    /// Inverse dynamics is affine in `q̈`, so the column
    /// `ID(q, q̇, e_j) − ID(q, q̇, 0)` equals inverse dynamics at `e_j` with
    /// rates, gravity and rotor speed removed; that form is evaluated here.
    pub fn mass_matrix(&self, q: &GenVec) -> GenMat {
        let zero = GenVec::zeros();
        let mut m = GenMat::zeros();
        for j in 0..8 {
            let mut e = GenVec::zeros();
            e[j] = 1.0;
            m.set_column(j, &self.newton_euler(q, &zero, &e, 0.0, 0.0).generalized);
        }
        m
    }

    /// Coriolis, centrifugal, gravity and gyroscopic terms: `ID(q, q̇, 0)`.
    pub fn bias(&self, state: &SystemState, omega_bar: f64) -> GenVec {
        self.inverse_dynamics(state, &GenVec::zeros(), omega_bar).generalized
    }

    /// Generalized forces of the actuators and an external wrench.
    ///
    /// Thrust acts along body `z`; body moments map through `J_vᵀ`.
    pub fn input_forces(&self, q: &GenVec, cmd: &ControlCommand, disturbance: &InteractionWrench) -> GenVec {
        let att = EulerAngles::new(q[3], q[4], q[5]);
        let (sf, cf) = att.phi.sin_cos();
        let (st, ct) = att.theta.sin_cos();
        let (sp, cp) = att.psi.sin_cos();
        let thrust_dir = Vector3::new(cp * st * cf + sp * sf, sp * st * cf - cp * sf, ct * cf);
        let force = thrust_dir * cmd.thrust + disturbance.force;
        let moment = euler_rate_jacobian(&att).transpose() * (cmd.tau_a + disturbance.moment);
        GenVec::from_column_slice(&[
            force.x, force.y, force.z, moment.x, moment.y, moment.z, cmd.tau_m.x, cmd.tau_m.y,
        ])
    }

    /// Solves `M·q̈ = Q_u + Q_d − bias` for the generalized accelerations.
    pub fn forward_dynamics(
        &self,
        state: &SystemState,
        cmd: &ControlCommand,
        omega_bar: f64,
        disturbance: &InteractionWrench,
    ) -> Result<GenVec, DynamicsError> {
        let m = self.mass_matrix(&state.q);
        let rhs = self.input_forces(&state.q, cmd, disturbance) - self.bias(state, omega_bar);
        solve_spd(m, &rhs)
    }

    /// Kinetic energy `½ q̇ᵀ M q̇` and gravitational potential energy.
    pub fn energy(&self, state: &SystemState) -> Energy {
        let m = self.mass_matrix(&state.q);
        let kinetic = 0.5 * state.qdot.dot(&(m * state.qdot));
        Energy { kinetic, potential: self.g * self.mass_moment_height(&state.q) }
    }

    /// `Σ mᵢ zᵢ` over all body centres of mass.
    fn mass_moment_height(&self, q: &GenVec) -> f64 {
        let att = EulerAngles::new(q[3], q[4], q[5]);
        let r_bi = euler_to_rotation(&att).matrix().transpose();
        let r01 = self.mount * rot_z(q[6]);
        let r02 = r01 * rot_x(FRAC_PI_2) * rot_z(q[7]);
        let c0 = self.base.com;
        let c1 = self.joint1 + r01 * self.link1.com;
        let c2 = self.joint1 + r01 * self.joint2 + r02 * self.link2.com;
        let height = |c: Vector3<f64>| q[2] + (r_bi * c).z;
        self.base.mass * height(c0) + self.link1.mass * height(c1) + self.link2.mass * height(c2)
    }
}

/// Cholesky solve with a cheap condition estimate `(max Lᵢᵢ / min Lᵢᵢ)²`,
/// a lower bound on the true condition number.
fn solve_spd(m: GenMat, rhs: &GenVec) -> Result<GenVec, DynamicsError> {
    let chol = m.cholesky().ok_or(DynamicsError::SingularMassMatrix { condition: f64::INFINITY })?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(*d), hi.max(*d)));
    let condition = (hi / lo).powi(2);
    if !(condition <= MAX_CONDITION) {
        return Err(DynamicsError::SingularMassMatrix { condition });
    }
    Ok(chol.solve(rhs))
}
