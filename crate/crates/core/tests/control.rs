use aeromanip::control::{mixer_solve, xy_error_to_body, ControlError, ControlLimits, Mixer, RicController, RicGains};
use aeromanip::dynamics::{rotor_forces, GenVec, RotorSpeeds, SystemParams, SystemState};
use aeromanip::trajectory::TrajectorySample;
use nalgebra::Vector3;
use proptest::prelude::*;

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale
}

#[test]
fn table_coefficients_are_distinct() {
    let p = SystemParams::default();
    for i in 0..4 {
        for j in i + 1..4 {
            assert_ne!(p.kf[i], p.kf[j]);
            assert_ne!(p.km[i], p.km[j]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn speeds_to_wrench_and_back(w in proptest::array::uniform4(50.0f64..1000.0)) {
        let p = SystemParams::default();
        let speeds = RotorSpeeds::new(w);
        let f = rotor_forces(&speeds, &p);
        let back = mixer_solve(f.thrust, &f.tau_a, &p).unwrap();
        for i in 0..4 {
            prop_assert!(rel(back.omega[i], w[i], w[i]) < 1e-12, "rotor {}: {} vs {}", i, back.omega[i], w[i]);
        }
    }

    #[test]
    fn wrench_to_speeds_and_back(
        thrust in 5.0f64..20.0,
        tau in proptest::array::uniform3(-0.05f64..0.05),
    ) {
        let p = SystemParams::default();
        let tau_a = Vector3::from(tau);
        let speeds = mixer_solve(thrust, &tau_a, &p).unwrap();
        let f = rotor_forces(&speeds, &p);
        prop_assert!(rel(f.thrust, thrust, thrust) < 1e-12);
        // Moments are small next to the thrust that sets the speed scale.
        let scale = thrust * p.d;
        for i in 0..3 {
            prop_assert!(rel(f.tau_a[i], tau_a[i], scale) < 1e-12, "axis {}: {} vs {}", i, f.tau_a[i], tau_a[i]);
        }
    }

    #[test]
    fn heading_transform_preserves_norm(ex in -10.0f64..10.0, ey in -10.0f64..10.0, psi in -7.0f64..7.0) {
        let (bx, by) = xy_error_to_body(ex, ey, psi);
        prop_assert!((bx.hypot(by) - ex.hypot(ey)).abs() < 1e-12 * (1.0 + ex.hypot(ey)));
        let (rx, ry) = xy_error_to_body(bx, by, psi);
        prop_assert!((rx - ex).abs() < 1e-12 && (ry - ey).abs() < 1e-12);
    }
}

#[test]
fn heading_transform_literals() {
    assert_eq!(xy_error_to_body(1.0, 0.0, 0.0), (1.0, 0.0));
    assert_eq!(xy_error_to_body(0.0, 1.0, 0.0), (0.0, -1.0));
    let (a, b) = xy_error_to_body(1.0, 0.0, std::f64::consts::FRAC_PI_2);
    assert!(a.abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
}

#[test]
fn infeasible_command_is_reported() {
    let p = SystemParams::default();
    let err = mixer_solve(1.0, &Vector3::new(1.0, 0.0, 0.0), &p).unwrap_err();
    assert!(matches!(err, ControlError::InfeasibleCommand { .. }), "{err}");
    let sat = Mixer::new(&p).unwrap().solve_saturating(1.0, &Vector3::new(1.0, 0.0, 0.0));
    assert!(sat.saturated);
    assert!(sat.speeds.omega.iter().all(|w| *w >= 0.0 && *w <= p.omega_max));
}

#[test]
fn singular_mixer_is_rejected() {
    let p = SystemParams { d: 0.0, ..SystemParams::default() };
    assert!(matches!(Mixer::new(&p), Err(ControlError::SingularMixer)));
}

/// Vertical axis in isolation: a point mass driven by the controller's thrust.
#[test]
fn altitude_step_settles() {
    let p = SystemParams::default();
    let mass = p.total_mass();
    let mut c = RicController::new(RicGains::default(), ControlLimits::default(), &p).unwrap();
    let mut q = GenVec::zeros();
    q[2] = 1.0;
    q[6] = std::f64::consts::FRAC_PI_2;
    let mut qdot = GenVec::zeros();
    let dt = 1e-3;
    let setpoint = TrajectorySample { position: [0.0, 0.0, 1.5, 0.0, q[6], 0.0], ..Default::default() };
    let mut peak: f64 = 1.0;
    for _ in 0..15_000 {
        let out = c.step(&setpoint, &SystemState::new(q, qdot), dt);
        let acc = out.cmd.thrust / mass - p.g;
        q[2] += qdot[2] * dt + 0.5 * acc * dt * dt;
        qdot[2] += acc * dt;
        peak = peak.max(q[2]);
    }
    assert!((q[2] - 1.5).abs() < 1e-3, "z = {}", q[2]);
    assert!(peak < 1.5 + 0.25, "overshoot to {peak}");
}
