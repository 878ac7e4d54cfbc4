//! Euler-angle rotation algebra and rigid transforms.
//!
//! Attitude is parameterised by roll/pitch/yaw about the fixed X, Y, Z axes.
//! [`euler_to_rotation`] returns the inertial-to-body rotation `R_I^B`; its
//! transpose maps body vectors into the inertial frame.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Below this `|cos θ|` the Euler-rate Jacobian is treated as singular.
pub const GIMBAL_LOCK_COS: f64 = 1e-6;

/// Drift from orthonormality above which [`compose`] re-orthonormalises.
const ORTHO_DRIFT: f64 = 1e-9;

/// Roll, pitch and yaw in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerAngles {
    pub fn new(phi: f64, theta: f64, psi: f64) -> Self {
        Self { phi, theta, psi }
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.phi, self.theta, self.psi)
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.theta.is_finite() && self.psi.is_finite()
    }
}

/// A proper orthonormal 3×3 rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3(Matrix3<f64>);

impl Rotation3 {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Wraps a matrix without checking it.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    pub fn about_x(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Self(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    pub fn about_y(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Self(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
    }

    pub fn about_z(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Self(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn mul(&self, other: &Rotation3) -> Self {
        Self(self.0 * other.0)
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Largest entry of `R·Rᵀ − I`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.0 * self.0.transpose() - Matrix3::identity()).abs().max()
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Nearest rotation in the Frobenius sense (polar factor via SVD).
    pub fn orthonormalized(&self) -> Self {
        let svd = self.0.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut r = u * vt;
        if r.determinant() < 0.0 {
            let mut u = u;
            u.column_mut(2).neg_mut();
            r = u * vt;
        }
        Self(r)
    }

    /// Roll/pitch/yaw of a body-to-inertial rotation `R = Rz(ψ)·Ry(θ)·Rx(φ)`.
    ///
    /// At `θ = ±π/2` only `φ ∓ ψ` is observable; `ψ` is set to zero.
    pub fn to_euler(&self) -> EulerAngles {
        let r = &self.0;
        let cos_theta = r[(0, 0)].hypot(r[(1, 0)]);
        let theta = (-r[(2, 0)]).atan2(cos_theta);
        if cos_theta > 1e-9 {
            EulerAngles::new(r[(2, 1)].atan2(r[(2, 2)]), theta, r[(1, 0)].atan2(r[(0, 0)]))
        } else if r[(2, 0)] < 0.0 {
            EulerAngles::new(r[(0, 1)].atan2(r[(1, 1)]), theta, 0.0)
        } else {
            EulerAngles::new((-r[(0, 1)]).atan2(r[(1, 1)]), theta, 0.0)
        }
    }

    /// Body-to-inertial rotation for the given angles (inverse of [`euler_to_rotation`]).
    pub fn from_euler_body_to_inertial(angles: &EulerAngles) -> Self {
        euler_to_rotation(angles).transpose()
    }
}

/// Rigid transform: rotation followed by translation (4×4 homogeneous form
/// with bottom row `[0 0 0 1]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousTransform {
    pub rotation: Rotation3,
    pub translation: Vector3<f64>,
}

impl HomogeneousTransform {
    pub fn new(rotation: Rotation3, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(Rotation3::identity(), Vector3::zeros())
    }

    pub fn translate(x: f64, y: f64, z: f64) -> Self {
        Self::new(Rotation3::identity(), Vector3::new(x, y, z))
    }

    pub fn rotate(rotation: Rotation3) -> Self {
        Self::new(rotation, Vector3::zeros())
    }

    /// Standard Denavit–Hartenberg link transform `Rz(θ)·Tz(d)·Tx(a)·Rx(α)`.
    pub fn dh(theta: f64, d: f64, a: f64, alpha: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let rotation = Rotation3::about_z(theta).mul(&Rotation3::about_x(alpha));
        Self::new(rotation, Vector3::new(a * ct, a * st, d))
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new(rt, -rt.apply(&self.translation))
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.apply(p) + self.translation
    }

    pub fn to_matrix(&self) -> nalgebra::Matrix4<f64> {
        let mut m = nalgebra::Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rotation.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }
}

/// Body-frame linear and angular velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twist {
    pub v1: Vector3<f64>,
    pub v2: Vector3<f64>,
}

impl Twist {
    pub fn is_finite(&self) -> bool {
        self.v1.iter().chain(self.v2.iter()).all(|x| x.is_finite())
    }
}

/// Inertial-to-body rotation `R_I^B` for roll-pitch-yaw angles.
pub fn euler_to_rotation(angles: &EulerAngles) -> Rotation3 {
    let (sf, cf) = angles.phi.sin_cos();
    let (st, ct) = angles.theta.sin_cos();
    let (sp, cp) = angles.psi.sin_cos();
    Rotation3(Matrix3::new(
        cp * ct,
        sp * ct,
        -st,
        -sp * cf + cp * st * sf,
        cp * cf + sp * st * sf,
        ct * sf,
        sp * sf + cp * st * cf,
        -cp * sf + sp * st * cf,
        ct * cf,
    ))
}

/// `J_v` with `[p, q, r]ᵀ = J_v · [φ̇, θ̇, ψ̇]ᵀ`. Its determinant is `cos θ`.
pub fn euler_rate_jacobian(angles: &EulerAngles) -> Matrix3<f64> {
    let (sf, cf) = angles.phi.sin_cos();
    let (st, ct) = angles.theta.sin_cos();
    Matrix3::new(1.0, 0.0, -st, 0.0, cf, ct * sf, 0.0, -sf, ct * cf)
}

/// Time derivative of [`euler_rate_jacobian`] along the Euler rates.
pub fn euler_rate_jacobian_dot(angles: &EulerAngles, rates: &Vector3<f64>) -> Matrix3<f64> {
    let (sf, cf) = angles.phi.sin_cos();
    let (st, ct) = angles.theta.sin_cos();
    let (dphi, dtheta) = (rates.x, rates.y);
    Matrix3::new(
        0.0,
        0.0,
        -ct * dtheta,
        0.0,
        -sf * dphi,
        -st * sf * dtheta + ct * cf * dphi,
        0.0,
        -cf * dphi,
        -st * cf * dtheta - ct * sf * dphi,
    )
}

/// `true` when `J_v` may not be inverted at these angles.
pub fn near_gimbal_lock(angles: &EulerAngles) -> bool {
    angles.theta.cos().abs() < GIMBAL_LOCK_COS
}

/// Homogeneous product `a · b`.
pub fn compose(a: &HomogeneousTransform, b: &HomogeneousTransform) -> HomogeneousTransform {
    let mut rotation = a.rotation.mul(&b.rotation);
    if rotation.orthonormality_error() > ORTHO_DRIFT {
        rotation = rotation.orthonormalized();
    }
    HomogeneousTransform::new(rotation, a.rotation.apply(&b.translation) + a.translation)
}

/// Wraps an angle into `(−π, π]`. Display and comparison only.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}
