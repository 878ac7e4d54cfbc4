//! End-effector forward kinematics and closed-form inverse kinematics.
//!
//! The arm hangs from a base link of length `L0` below the vehicle's centre
//! of mass. Joint 1 rotates about the body x axis; joint 2 is perpendicular
//! to link 1. In the zero configuration both links point along body −y.
//!
//! Frame chain (standard DH, `Rz(θ)·Tz(d)·Tx(a)·Rx(α)`):
//!
//! | transform | θ    | d | a  | α   |
//! |-----------|------|---|----|-----|
//! | `A_1^0`   | θ₁   | 0 | L1 | π/2 |
//! | `A_2^1`   | θ₂   | 0 | L2 | 0   |
//!
//! with the fixed mount `A_0^B` translating by `(0, 0, −L0)` and aligning
//! `x0 = −y_B`, `y0 = −z_B`, `z0 = x_B`.

use crate::spatial::{compose, wrap_angle, EulerAngles, HomogeneousTransform, Rotation3};
use nalgebra::{Matrix3, Vector3};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

/// `max(|r13|, |r23|)` below which the orientation is treated as degenerate.
pub const CASE_BOUNDARY_TOL: f64 = 1e-9;
/// Allowed orthonormality defect of a target rotation.
pub const ORTHONORMAL_TOL: f64 = 1e-6;
/// Allowed residual between the target and the reconstructed rotation.
pub const RECONSTRUCTION_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("target rotation is not orthonormal (defect {defect:.3e} > {ORTHONORMAL_TOL:e})")]
    NonUnitRotation { defect: f64 },
    #[error("{case:?}: reconstructed orientation misses the target by {residual:.3e} (> {RECONSTRUCTION_TOL:e})")]
    UnreachableOrientation { case: IkCase, residual: f64 },
    #[error("target pose has non-finite entries")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkLengths {
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
}

impl LinkLengths {
    pub fn new(l0: f64, l1: f64, l2: f64) -> Self {
        Self { l0, l1, l2 }
    }

    pub fn is_valid(&self) -> bool {
        [self.l0, self.l1, self.l2].iter().all(|l| l.is_finite() && *l > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointAngles {
    pub theta1: f64,
    pub theta2: f64,
}

impl JointAngles {
    pub fn new(theta1: f64, theta2: f64) -> Self {
        Self { theta1, theta2 }
    }
}

/// The four vehicle coordinates the inverse kinematics solves for.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleConfig {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub psi: f64,
}

impl VehicleConfig {
    pub fn new(x: f64, y: f64, z: f64, psi: f64) -> Self {
        Self { x, y, z, psi }
    }
}

/// Gripper position and roll/pitch/yaw in the inertial frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndEffectorPose {
    pub position: Vector3<f64>,
    pub orientation: EulerAngles,
}

impl EndEffectorPose {
    pub fn new(position: Vector3<f64>, orientation: EulerAngles) -> Self {
        Self { position, orientation }
    }

    /// Body-to-inertial rotation of the gripper frame.
    pub fn rotation(&self) -> Rotation3 {
        Rotation3::from_euler_body_to_inertial(&self.orientation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IkCase {
    /// `r13`, `r23` not both zero.
    General,
    /// `r33 = 1`: joint 1 at zero, only `θ₂ + ψ` determined.
    Straight,
    /// `r33 = −1`: joint 1 at π, only `θ₂ − ψ` determined.
    Flipped,
}

impl IkCase {
    pub fn number(self) -> u8 {
        match self {
            IkCase::General => 1,
            IkCase::Straight => 2,
            IkCase::Flipped => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `sin θ₁ > 0`.
    ElbowA,
    /// `sin θ₁ < 0`.
    ElbowB,
    /// Cases 2 and 3 with the `ψ = 0` representative.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Multiplicity {
    Two,
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkSolution {
    pub vehicle: VehicleConfig,
    pub joints: JointAngles,
    pub case: IkCase,
    pub branch: Branch,
    pub multiplicity: Multiplicity,
}

/// Fixed mount of joint 1 under the vehicle.
fn mount_transform(lengths: &LinkLengths) -> HomogeneousTransform {
    let align = Rotation3::from_matrix_unchecked(Matrix3::new(
        0.0, 0.0, 1.0, //
        -1.0, 0.0, 0.0, //
        0.0, -1.0, 0.0,
    ));
    HomogeneousTransform::new(align, Vector3::new(0.0, 0.0, -lengths.l0))
}

/// Gripper frame relative to the vehicle body frame.
pub fn arm_transform(joints: &JointAngles, lengths: &LinkLengths) -> HomogeneousTransform {
    let a0 = mount_transform(lengths);
    let a1 = HomogeneousTransform::dh(joints.theta1, 0.0, lengths.l1, FRAC_PI_2);
    let a2 = HomogeneousTransform::dh(joints.theta2, 0.0, lengths.l2, 0.0);
    compose(&compose(&a0, &a1), &a2)
}

/// Full chain `T_2^I = A_B^I · A_0^B · A_1^0 · A_2^1`.
pub fn forward_transform(
    vehicle: &VehicleConfig,
    attitude: &EulerAngles,
    joints: &JointAngles,
    lengths: &LinkLengths,
) -> HomogeneousTransform {
    let attitude = EulerAngles::new(attitude.phi, attitude.theta, vehicle.psi);
    let body = HomogeneousTransform::new(
        Rotation3::from_euler_body_to_inertial(&attitude),
        Vector3::new(vehicle.x, vehicle.y, vehicle.z),
    );
    compose(&body, &arm_transform(joints, lengths))
}

/// Gripper pose for a vehicle pose and joint angles.
///
/// `attitude.psi` is ignored in favour of `vehicle.psi`.
pub fn forward_kinematics(
    vehicle: &VehicleConfig,
    attitude: &EulerAngles,
    joints: &JointAngles,
    lengths: &LinkLengths,
) -> EndEffectorPose {
    let t = forward_transform(vehicle, attitude, joints, lengths);
    EndEffectorPose::new(t.translation, t.rotation.to_euler())
}

/// All closed-form solutions for a gripper pose, assuming zero vehicle roll and pitch.
pub fn inverse_kinematics(
    target: &EndEffectorPose,
    lengths: &LinkLengths,
) -> Result<Vec<IkSolution>, KinematicsError> {
    if !target.orientation.is_finite() {
        return Err(KinematicsError::NonFinite);
    }
    inverse_kinematics_matrix(&target.rotation(), &target.position, lengths)
}

/// As [`inverse_kinematics`], with the target orientation given as a rotation matrix.
pub fn inverse_kinematics_matrix(
    rotation: &Rotation3,
    position: &Vector3<f64>,
    lengths: &LinkLengths,
) -> Result<Vec<IkSolution>, KinematicsError> {
    let r = rotation.matrix();
    if r.iter().chain(position.iter()).any(|v| !v.is_finite()) {
        return Err(KinematicsError::NonFinite);
    }
    let defect = rotation
        .orthonormality_error()
        .max((rotation.determinant() - 1.0).abs());
    if defect > ORTHONORMAL_TOL {
        return Err(KinematicsError::NonUnitRotation { defect });
    }
    let (r11, r12, r13) = (r[(0, 0)], r[(0, 1)], r[(0, 2)]);
    let r23 = r[(1, 2)];
    let (r31, r32, r33) = (r[(2, 0)], r[(2, 1)], r[(2, 2)]);

    let mut solutions = Vec::with_capacity(2);
    let case;
    if r13.abs().max(r23.abs()) >= CASE_BOUNDARY_TOL {
        case = IkCase::General;
        let s1 = (1.0 - r33 * r33).max(0.0).sqrt();
        let theta1_a = s1.atan2(r33);
        let psi_a = r13.atan2(-r23);
        let theta2_a = r32.atan2(-r31);
        let theta1_b = (-s1).atan2(r33);
        let psi_b = (-r13).atan2(r23);
        let theta2_b = (-r32).atan2(r31);
        for (psi, t1, t2, branch) in [
            (psi_a, theta1_a, theta2_a, Branch::ElbowA),
            (psi_b, theta1_b, theta2_b, Branch::ElbowB),
        ] {
            solutions.push(solution(position, psi, t1, t2, case, branch, Multiplicity::Two, lengths));
        }
    } else {
        // ψ is free; take the ψ = 0 representative.
        let sum = r11.atan2(r12);
        let (theta1, c) = if r33 > 0.0 { (0.0, IkCase::Straight) } else { (PI, IkCase::Flipped) };
        case = c;
        solutions.push(solution(position, 0.0, theta1, sum, case, Branch::Degenerate, Multiplicity::Infinite, lengths));
    }

    for s in &solutions {
        let rebuilt = arm_transform(&s.joints, lengths);
        let rebuilt = Rotation3::about_z(s.vehicle.psi).mul(&rebuilt.rotation);
        let residual = (rebuilt.matrix() - r).abs().max();
        if residual > RECONSTRUCTION_TOL {
            return Err(KinematicsError::UnreachableOrientation { case, residual });
        }
    }
    Ok(solutions)
}

/// Vehicle position from the gripper position and the solved angles.
#[allow(clippy::too_many_arguments)]
fn solution(
    ee: &Vector3<f64>,
    psi: f64,
    theta1: f64,
    theta2: f64,
    case: IkCase,
    branch: Branch,
    multiplicity: Multiplicity,
    lengths: &LinkLengths,
) -> IkSolution {
    let LinkLengths { l0, l1, l2 } = *lengths;
    let (sp, cp) = psi.sin_cos();
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    let x = ee.x - (l1 * c1 * sp + l2 * cp * s2 + l2 * c1 * c2 * sp);
    let y = ee.y - (-l1 * cp * c1 + l2 * sp * s2 - l2 * cp * c1 * c2);
    let z = ee.z - (-l0 - l1 * s1 - l2 * c2 * s1);
    IkSolution {
        vehicle: VehicleConfig::new(x, y, z, psi),
        joints: JointAngles::new(theta1, theta2),
        case,
        branch,
        multiplicity,
    }
}

impl IkSolution {
    /// Largest coordinate difference to another configuration, angles wrapped.
    pub fn distance_to(&self, vehicle: &VehicleConfig, joints: &JointAngles) -> f64 {
        [
            (self.vehicle.x - vehicle.x).abs(),
            (self.vehicle.y - vehicle.y).abs(),
            (self.vehicle.z - vehicle.z).abs(),
            wrap_angle(self.vehicle.psi - vehicle.psi).abs(),
            wrap_angle(self.joints.theta1 - joints.theta1).abs(),
            wrap_angle(self.joints.theta2 - joints.theta2).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn table1() -> LinkLengths {
        LinkLengths::new(0.030, 0.070, 0.085)
    }

    /// The printed closed form of the chain at zero roll and pitch: the
    /// rotation block as printed and the position terms of the inverse
    /// position equations.
    fn closed_form(v: &VehicleConfig, j: &JointAngles, l: &LinkLengths) -> (Matrix3<f64>, Vector3<f64>) {
        let (sp, cp) = v.psi.sin_cos();
        let (s1, c1) = j.theta1.sin_cos();
        let (s2, c2) = j.theta2.sin_cos();
        let r = Matrix3::new(
            cp * s2 + c1 * c2 * sp,
            cp * c2 - c1 * sp * s2,
            sp * s1,
            sp * s2 - cp * c1 * c2,
            c2 * sp + cp * c1 * s2,
            -cp * s1,
            -c2 * s1,
            s1 * s2,
            c1,
        );
        let p = Vector3::new(
            v.x + l.l1 * c1 * sp + l.l2 * cp * s2 + l.l2 * c1 * c2 * sp,
            v.y - l.l1 * cp * c1 + l.l2 * sp * s2 - l.l2 * cp * c1 * c2,
            v.z - l.l0 - l.l1 * s1 - l.l2 * c2 * s1,
        );
        (r, p)
    }

    #[test]
    fn home_configuration_position() {
        let pose = forward_kinematics(
            &VehicleConfig::default(),
            &EulerAngles::default(),
            &JointAngles::default(),
            &table1(),
        );
        assert_abs_diff_eq!(pose.position, Vector3::new(0.0, -0.155, -0.030), epsilon = 1e-15);
    }

    #[test]
    fn translation_equivariance() {
        let j = JointAngles::new(0.4, -0.9);
        let a = forward_kinematics(&VehicleConfig::new(0.2, 0.3, 1.0, 0.5), &EulerAngles::default(), &j, &table1());
        let b = forward_kinematics(&VehicleConfig::new(1.2, 0.3, 1.0, 0.5), &EulerAngles::default(), &j, &table1());
        assert_abs_diff_eq!(b.position.x - a.position.x, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.position.y, a.position.y, epsilon = 1e-15);
        assert_abs_diff_eq!(b.position.z, a.position.z, epsilon = 1e-15);
    }

    #[test]
    fn homogeneous_bottom_row() {
        let t = forward_transform(&VehicleConfig::default(), &EulerAngles::default(), &JointAngles::new(0.3, 0.2), &table1());
        let m = t.to_matrix();
        assert_eq!([m[(3, 0)], m[(3, 1)], m[(3, 2)], m[(3, 3)]], [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn home_target_is_straight_case() {
        let (r, p) = closed_form(&VehicleConfig::default(), &JointAngles::default(), &table1());
        let sols = inverse_kinematics_matrix(&Rotation3::from_matrix_unchecked(r), &p, &table1()).unwrap();
        assert_eq!(sols.len(), 1);
        let s = sols[0];
        assert_eq!(s.case, IkCase::Straight);
        assert_eq!(s.multiplicity, Multiplicity::Infinite);
        assert_eq!(s.joints.theta1, 0.0);
        assert_eq!(s.vehicle.psi, 0.0);
        assert_abs_diff_eq!(s.joints.theta2, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.vehicle.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.vehicle.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.vehicle.z, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn r33_half_gives_pi_over_three_branches() {
        let v = VehicleConfig::new(0.0, 0.0, 0.0, 0.7);
        let (r, p) = closed_form(&v, &JointAngles::new(PI / 3.0, 0.25), &table1());
        assert_abs_diff_eq!(r[(2, 2)], 0.5, epsilon = 1e-15);
        let sols = inverse_kinematics_matrix(&Rotation3::from_matrix_unchecked(r), &p, &table1()).unwrap();
        assert_eq!(sols.len(), 2);
        assert_abs_diff_eq!(sols[0].joints.theta1, PI / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sols[1].joints.theta1, -PI / 3.0, epsilon = 1e-12);
        assert_eq!((sols[0].branch, sols[1].branch), (Branch::ElbowA, Branch::ElbowB));
    }

    #[test]
    fn branch_sign_pairing() {
        let (r, p) = closed_form(&VehicleConfig::new(0.1, 0.2, 0.3, -2.0), &JointAngles::new(-1.1, 2.2), &table1());
        let sols = inverse_kinematics_matrix(&Rotation3::from_matrix_unchecked(r), &p, &table1()).unwrap();
        let (a, b) = (sols[0], sols[1]);
        assert!(a.joints.theta1.sin() > 0.0 && b.joints.theta1.sin() < 0.0);
        // The second branch is the first with θ₁ → −θ₁, ψ → ψ+π, θ₂ → θ₂+π.
        assert_abs_diff_eq!(b.joints.theta1, -a.joints.theta1, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(b.vehicle.psi - a.vehicle.psi - PI), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(b.joints.theta2 - a.joints.theta2 - PI), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn flipped_case() {
        let v = VehicleConfig::new(1.0, 2.0, 3.0, 0.0);
        let (r, p) = closed_form(&v, &JointAngles::new(PI, 0.6), &table1());
        let sols = inverse_kinematics_matrix(&Rotation3::from_matrix_unchecked(r), &p, &table1()).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].case, IkCase::Flipped);
        assert_eq!(sols[0].joints.theta1, PI);
        assert_abs_diff_eq!(sols[0].joints.theta2, 0.6, epsilon = 1e-12);
        assert!(sols[0].distance_to(&v, &JointAngles::new(PI, 0.6)) < 1e-12);
    }

    #[test]
    fn rejects_non_rotation() {
        let bad = Rotation3::from_matrix_unchecked(Matrix3::identity() * 1.01);
        let err = inverse_kinematics_matrix(&bad, &Vector3::zeros(), &table1()).unwrap_err();
        assert!(matches!(err, KinematicsError::NonUnitRotation { .. }));
        let nan = EndEffectorPose::new(Vector3::zeros(), EulerAngles::new(f64::NAN, 0.0, 0.0));
        assert_eq!(inverse_kinematics(&nan, &table1()), Err(KinematicsError::NonFinite));
    }

    proptest! {
        #[test]
        fn chain_matches_closed_form(
            x in -5.0..5.0f64, y in -5.0..5.0f64, z in -5.0..5.0f64, psi in -PI..PI,
            t1 in -PI..PI, t2 in -PI..PI,
        ) {
            let v = VehicleConfig::new(x, y, z, psi);
            let j = JointAngles::new(t1, t2);
            let (r, p) = closed_form(&v, &j, &table1());
            let t = forward_transform(&v, &EulerAngles::default(), &j, &table1());
            prop_assert!((t.translation - p).abs().max() < 1e-12);
            prop_assert!((t.rotation.matrix() - r).abs().max() < 1e-12);
        }

        #[test]
        fn every_branch_reproduces_target(
            x in -5.0..5.0f64, y in -5.0..5.0f64, z in -5.0..5.0f64, psi in -PI..PI,
            t1 in -PI..PI, t2 in -PI..PI,
        ) {
            let v = VehicleConfig::new(x, y, z, psi);
            let j = JointAngles::new(t1, t2);
            let target = forward_transform(&v, &EulerAngles::default(), &j, &table1());
            let sols = inverse_kinematics_matrix(&target.rotation, &target.translation, &table1()).unwrap();
            for s in sols {
                let back = forward_transform(&s.vehicle, &EulerAngles::default(), &s.joints, &table1());
                prop_assert!((back.translation - target.translation).abs().max() < 1e-9);
                prop_assert!((back.rotation.matrix() - target.rotation.matrix()).abs().max() < 1e-9);
            }
        }
    }
}
