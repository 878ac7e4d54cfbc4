use super::ControlError;
use crate::dynamics::{RotorSpeeds, SystemParams};
use nalgebra::{Matrix4, Vector3, Vector4, LU, U4};

/// Squared speeds below this (rad²/s²) are treated as outside the rotor cone.
pub const FEASIBILITY_TOL: f64 = 1e-9;
const SINGULAR_PIVOT: f64 = 1e-14;

/// Allocation between squared rotor speeds and `(T, τ_a1, τ_a2, τ_a3)`.
#[derive(Debug, Clone)]
pub struct Mixer {
    g: Matrix4<f64>,
    lu: LU<f64, U4, U4>,
    omega_max: f64,
}

/// Rotor speeds after clamping to `[0, Ω_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturatedSpeeds {
    pub speeds: RotorSpeeds,
    pub saturated: bool,
}

/// `[T, τ_a1, τ_a2, τ_a3]ᵀ = G·[Ω₁², Ω₂², Ω₃², Ω₄²]ᵀ`.
pub fn mixer_matrix(params: &SystemParams) -> Matrix4<f64> {
    let (kf, km, d) = (&params.kf, &params.km, params.d);
    #[rustfmt::skip]
    let g = Matrix4::new(
        kf[0], kf[1], kf[2], kf[3],
        0.0, -d * kf[1], 0.0, d * kf[3],
        -d * kf[0], 0.0, d * kf[2], 0.0,
        -km[0], km[1], -km[2], km[3],
    );
    g
}

impl Mixer {
    pub fn new(params: &SystemParams) -> Result<Self, ControlError> {
        let g = mixer_matrix(params);
        let lu = g.lu();
        let u = lu.u();
        let scale = g.amax();
        let min_pivot = (0..4).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
        if !(scale > 0.0 && min_pivot > SINGULAR_PIVOT * scale) {
            return Err(ControlError::SingularMixer);
        }
        Ok(Self { g, lu, omega_max: params.omega_max })
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.g
    }

    /// Squared rotor speeds producing the wrench, unconstrained.
    pub fn squared_speeds(&self, thrust: f64, tau_a: &Vector3<f64>) -> Vector4<f64> {
        let rhs = Vector4::new(thrust, tau_a.x, tau_a.y, tau_a.z);
        self.lu.solve(&rhs).expect("mixer checked nonsingular")
    }

    /// Rotor speeds for a thrust and body moments. Speeds above `Ω_max` are
    /// clamped with a warning.
    pub fn solve(&self, thrust: f64, tau_a: &Vector3<f64>) -> Result<RotorSpeeds, ControlError> {
        let w2 = self.squared_speeds(thrust, tau_a);
        if let Some(j) = w2.iter().position(|v| !(*v >= -FEASIBILITY_TOL)) {
            return Err(ControlError::InfeasibleCommand { rotor: j + 1, omega_squared: w2[j] });
        }
        let out = self.clamp(&w2);
        if out.saturated {
            log::warn!("rotor speed command saturated at {} rad/s", self.omega_max);
        }
        Ok(out.speeds)
    }

    /// Like [`Mixer::solve`] but clamps infeasible squared speeds to zero
    /// instead of failing.
    pub fn solve_saturating(&self, thrust: f64, tau_a: &Vector3<f64>) -> SaturatedSpeeds {
        let w2 = self.squared_speeds(thrust, tau_a);
        let mut out = self.clamp(&w2);
        out.saturated |= w2.iter().any(|v| *v < -FEASIBILITY_TOL);
        out
    }

    fn clamp(&self, w2: &Vector4<f64>) -> SaturatedSpeeds {
        let mut saturated = false;
        let omega = std::array::from_fn(|j| {
            let w = w2[j].max(0.0).sqrt();
            if w > self.omega_max || w.is_nan() {
                saturated = true;
                self.omega_max
            } else {
                w
            }
        });
        SaturatedSpeeds { speeds: RotorSpeeds::new(omega), saturated }
    }
}

/// Rotor speeds for `(T, τ_a)`; see [`Mixer::solve`].
pub fn mixer_solve(thrust: f64, tau_a: &Vector3<f64>, params: &SystemParams) -> Result<RotorSpeeds, ControlError> {
    Mixer::new(params)?.solve(thrust, tau_a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::rotor_forces;

    #[test]
    fn equal_thrust_split_is_not_equal_speeds() {
        let p = SystemParams::default();
        let speeds = mixer_solve(15.5475, &Vector3::zeros(), &p).unwrap();
        let w = speeds.omega;
        assert!(w.iter().any(|v| (v - w[0]).abs() > 1.0), "{w:?}");
        let out = rotor_forces(&speeds, &p);
        assert!((out.thrust - 15.5475).abs() < 1e-12);
        assert!(out.tau_a.amax() < 1e-12);
    }

    #[test]
    fn pure_yaw_without_thrust_is_infeasible() {
        let err = mixer_solve(0.0, &Vector3::new(0.0, 0.0, 0.1), &SystemParams::default()).unwrap_err();
        assert!(matches!(err, ControlError::InfeasibleCommand { .. }));
    }

    #[test]
    fn degenerate_coefficients_are_singular() {
        let p = SystemParams { d: 0.0, ..SystemParams::default() };
        assert!(matches!(Mixer::new(&p), Err(ControlError::SingularMixer)));
    }

    #[test]
    fn clamps_above_limit() {
        let p = SystemParams::default();
        let mixer = Mixer::new(&p).unwrap();
        let out = mixer.solve_saturating(200.0, &Vector3::zeros());
        assert!(out.saturated);
        assert!(out.speeds.omega.iter().all(|w| *w == p.omega_max));
        let clamped = mixer.solve(200.0, &Vector3::zeros()).unwrap();
        assert_eq!(clamped, out.speeds);
        let neg = mixer.solve_saturating(0.0, &Vector3::new(0.0, 0.0, 0.1));
        assert!(neg.saturated);
        assert!(neg.speeds.is_valid(p.omega_max));
    }
}
