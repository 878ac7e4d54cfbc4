use crate::{Failure, EXIT_KINEMATICS};
use aeromanip::dynamics::SystemParams;
use aeromanip::kinematics::{
    forward_kinematics, inverse_kinematics, inverse_kinematics_matrix, Branch, EndEffectorPose, IkSolution, JointAngles, LinkLengths,
    Multiplicity, VehicleConfig,
};
use aeromanip::spatial::{EulerAngles, Rotation3};
use clap::Args;
use nalgebra::{Matrix3, Vector3};

#[derive(Debug, Clone, Args)]
pub struct Lengths {
    /// Base link length L0 (m) [default: 0.03]
    #[arg(long)]
    l0: Option<f64>,
    /// Link 1 length L1 (m) [default: 0.07]
    #[arg(long)]
    l1: Option<f64>,
    /// Link 2 length L2 to the gripper (m) [default: 0.085]
    #[arg(long)]
    l2: Option<f64>,
}

impl Lengths {
    fn resolve(&self) -> Result<LinkLengths, Failure> {
        let d = SystemParams::default().link_lengths();
        let l = LinkLengths::new(self.l0.unwrap_or(d.l0), self.l1.unwrap_or(d.l1), self.l2.unwrap_or(d.l2));
        if !l.is_valid() {
            return Err(Failure::usage("link lengths must be positive and finite"));
        }
        Ok(l)
    }
}

/// Gripper pose from the vehicle and joint configuration.
#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct FkArgs {
    /// Vehicle position X (m)
    #[arg(long)]
    x: f64,
    /// Vehicle position Y (m)
    #[arg(long)]
    y: f64,
    /// Vehicle position Z, up (m)
    #[arg(long)]
    z: f64,
    /// Vehicle roll (rad, or degrees with --degrees)
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// Vehicle pitch (rad, or degrees with --degrees)
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Vehicle yaw (rad, or degrees with --degrees)
    #[arg(long)]
    psi: f64,
    /// Joint 1 angle (rad, or degrees with --degrees)
    #[arg(long)]
    theta1: f64,
    /// Joint 2 angle (rad, or degrees with --degrees)
    #[arg(long)]
    theta2: f64,
    /// Read and print angles in degrees instead of radians
    #[arg(long)]
    degrees: bool,
    #[command(flatten)]
    lengths: Lengths,
}

/// All vehicle/joint configurations that place the gripper at a pose,
/// with the vehicle level.
#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct IkArgs {
    /// Gripper position x (m)
    #[arg(long)]
    x: f64,
    /// Gripper position y (m)
    #[arg(long)]
    y: f64,
    /// Gripper position z, up (m)
    #[arg(long)]
    z: f64,
    /// Gripper roll (rad, or degrees with --degrees)
    #[arg(long, required_unless_present = "rotation")]
    phi: Option<f64>,
    /// Gripper pitch (rad, or degrees with --degrees)
    #[arg(long, required_unless_present = "rotation")]
    theta: Option<f64>,
    /// Gripper yaw (rad, or degrees with --degrees)
    #[arg(long, required_unless_present = "rotation")]
    psi: Option<f64>,
    /// Gripper orientation as a rotation matrix, nine row-major entries
    /// (dimensionless), instead of --phi/--theta/--psi
    #[arg(long, value_delimiter = ',', value_name = "R11,...,R33", conflicts_with_all = ["phi", "theta", "psi"])]
    rotation: Option<Vec<f64>>,
    /// Read and print angles in degrees instead of radians
    #[arg(long)]
    degrees: bool,
    #[command(flatten)]
    lengths: Lengths,
}

fn angle_in(v: f64, degrees: bool) -> f64 {
    if degrees {
        v.to_radians()
    } else {
        v
    }
}

fn angle_out(v: f64, degrees: bool) -> f64 {
    if degrees {
        v.to_degrees()
    } else {
        v
    }
}

/// Twelve decimals at most, trailing zeros and negative zero dropped.
pub fn fmt_num(v: f64) -> String {
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    match s {
        "-0" | "" => "0".into(),
        _ => s.into(),
    }
}

fn check_finite(values: &[f64]) -> Result<(), Failure> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Failure::usage("arguments must be finite numbers"))
    }
}

pub fn fk(a: &FkArgs) -> Result<(), Failure> {
    check_finite(&[a.x, a.y, a.z, a.phi, a.theta, a.psi, a.theta1, a.theta2])?;
    let lengths = a.lengths.resolve()?;
    let d = a.degrees;
    let pose = forward_kinematics(
        &VehicleConfig::new(a.x, a.y, a.z, angle_in(a.psi, d)),
        &EulerAngles::new(angle_in(a.phi, d), angle_in(a.theta, d), 0.0),
        &JointAngles::new(angle_in(a.theta1, d), angle_in(a.theta2, d)),
        &lengths,
    );
    let unit = if d { "deg" } else { "rad" };
    println!("ee_x = {}", fmt_num(pose.position.x));
    println!("ee_y = {}", fmt_num(pose.position.y));
    println!("ee_z = {}", fmt_num(pose.position.z));
    println!("ee_phi = {}", fmt_num(angle_out(pose.orientation.phi, d)));
    println!("ee_theta = {}", fmt_num(angle_out(pose.orientation.theta, d)));
    println!("ee_psi = {}", fmt_num(angle_out(pose.orientation.psi, d)));
    println!("# positions in m, angles in {unit}");
    Ok(())
}

fn branch_label(s: &IkSolution) -> &'static str {
    match s.branch {
        Branch::ElbowA => "elbow A",
        Branch::ElbowB => "elbow B",
        Branch::Degenerate => "degenerate",
    }
}

pub fn ik(a: &IkArgs) -> Result<(), Failure> {
    let lengths = a.lengths.resolve()?;
    let d = a.degrees;
    let position = Vector3::new(a.x, a.y, a.z);
    let solutions = match &a.rotation {
        Some(r) => {
            check_finite(&[a.x, a.y, a.z])?;
            check_finite(r)?;
            if r.len() != 9 {
                return Err(Failure::usage(format!("--rotation needs 9 entries, got {}", r.len())));
            }
            let m = Rotation3::from_matrix_unchecked(Matrix3::from_row_slice(r));
            inverse_kinematics_matrix(&m, &position, &lengths)
        }
        None => {
            let (phi, theta, psi) = (a.phi.unwrap_or(0.0), a.theta.unwrap_or(0.0), a.psi.unwrap_or(0.0));
            check_finite(&[a.x, a.y, a.z, phi, theta, psi])?;
            let angles = EulerAngles::new(angle_in(phi, d), angle_in(theta, d), angle_in(psi, d));
            inverse_kinematics(&EndEffectorPose::new(position, angles), &lengths)
        }
    }
    .map_err(|e| Failure::new(EXIT_KINEMATICS, format!("inverse kinematics failed: {e}")))?;
    for s in &solutions {
        println!(
            "case {} {}: x = {} y = {} z = {} psi = {} theta1 = {} theta2 = {}",
            s.case.number(),
            branch_label(s),
            fmt_num(s.vehicle.x),
            fmt_num(s.vehicle.y),
            fmt_num(s.vehicle.z),
            fmt_num(angle_out(s.vehicle.psi, d)),
            fmt_num(angle_out(s.joints.theta1, d)),
            fmt_num(angle_out(s.joints.theta2, d)),
        );
    }
    if solutions.iter().any(|s| s.multiplicity == Multiplicity::Infinite) {
        println!("infinite family (psi free); shown with psi = 0");
    }
    Ok(())
}
