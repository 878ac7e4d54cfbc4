use super::{RotorSpeeds, SystemParams};
use nalgebra::Vector3;

/// Thrust and moments produced by the four rotors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorOutput {
    pub thrust: f64,
    pub tau_a: Vector3<f64>,
    pub omega_bar: f64,
}

/// `F_j = kF_j·Ω_j²`, `M_j = kM_j·Ω_j²`, summed into total thrust and body
/// moments for the plus-configuration airframe.
pub fn rotor_forces(speeds: &RotorSpeeds, params: &SystemParams) -> RotorOutput {
    let w2 = speeds.omega.map(|w| w * w);
    let f: [f64; 4] = std::array::from_fn(|j| params.kf[j] * w2[j]);
    let m: [f64; 4] = std::array::from_fn(|j| params.km[j] * w2[j]);
    RotorOutput {
        thrust: f.iter().sum(),
        tau_a: Vector3::new(
            params.d * (f[3] - f[1]),
            params.d * (f[2] - f[0]),
            -m[0] + m[1] - m[2] + m[3],
        ),
        omega_bar: speeds.omega_bar(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_speed() {
        let out = rotor_forces(&RotorSpeeds::default(), &SystemParams::default());
        assert_eq!(out.thrust, 0.0);
        assert_eq!(out.tau_a, Vector3::zeros());
        assert_eq!(out.omega_bar, 0.0);
    }

    #[test]
    fn equal_speeds_thrust() {
        let out = rotor_forces(&RotorSpeeds::new([500.0; 4]), &SystemParams::default());
        // (1.667 + 1.285 + 1.711 + 1.556)e-5 · 500²
        assert!((out.thrust - 15.5475).abs() < 1e-12);
        assert_eq!(out.omega_bar, 0.0);
    }

    #[test]
    fn roll_moment_sign() {
        let p = SystemParams::default();
        let out = rotor_forces(&RotorSpeeds::new([500.0, 400.0, 500.0, 600.0]), &p);
        let expected = p.d * (p.kf[3] * 600.0 * 600.0 - p.kf[1] * 400.0 * 400.0);
        assert!(out.tau_a.x > 0.0);
        assert!((out.tau_a.x - expected).abs() < 1e-15);
        assert!((out.tau_a.y - p.d * (p.kf[2] - p.kf[0]) * 500.0 * 500.0).abs() < 1e-15);
    }
}
