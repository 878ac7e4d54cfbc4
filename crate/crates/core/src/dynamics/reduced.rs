//! The vehicle-only equations of motion in their textbook small-angle form.
//!
//! Used to cross-check the multibody model. Attitude accelerations are
//! Euler's rigid-body equations with the supplied rates, so feeding body
//! rates `[p, q, r]` gives exact body angular accelerations, while feeding
//! Euler rates gives the usual small-angle approximation of `[φ̈, θ̈, ψ̈]`.

use super::{InteractionWrench, SystemParams};
use crate::spatial::EulerAngles;
use nalgebra::Vector3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedAccelerations {
    /// `[Ẍ, Ÿ, Z̈]` (m/s²).
    pub linear: Vector3<f64>,
    /// Angular accelerations about the three axes (rad/s²).
    pub angular: Vector3<f64>,
}

/// Vehicle accelerations under thrust, body moments, rotor gyroscopic
/// effects and the arm's interaction wrench. Uses `params.m` as the mass.
pub fn reduced_quadrotor_eom(
    params: &SystemParams,
    attitude: &EulerAngles,
    rates: &Vector3<f64>,
    thrust: f64,
    tau_a: &Vector3<f64>,
    omega_bar: f64,
    wrench: &InteractionWrench,
) -> ReducedAccelerations {
    let p = params;
    let (sf, cf) = attitude.phi.sin_cos();
    let (st, ct) = attitude.theta.sin_cos();
    let (sp, cp) = attitude.psi.sin_cos();
    let (dphi, dtheta, dpsi) = (rates.x, rates.y, rates.z);
    let f = &wrench.force;
    let mm = &wrench.moment;
    let linear = Vector3::new(
        (thrust * (cp * st * cf + sp * sf) + f.x) / p.m,
        (thrust * (sp * st * cf - cp * sf) + f.y) / p.m,
        (-p.m * p.g + thrust * ct * cf + f.z) / p.m,
    );
    let angular = Vector3::new(
        (dtheta * dpsi * (p.iy - p.iz) - p.ir * dtheta * omega_bar + tau_a.x + mm.x) / p.ix,
        (dpsi * dphi * (p.iz - p.ix) + p.ir * dphi * omega_bar + tau_a.y + mm.y) / p.iy,
        (dtheta * dphi * (p.ix - p.iy) + tau_a.z + mm.z) / p.iz,
    );
    ReducedAccelerations { linear, angular }
}
