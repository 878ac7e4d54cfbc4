//! Test-only oracles, independent of the library's dynamics code paths.
#![allow(dead_code)]

use aeromanip::dynamics::{GenMat, GenVec, PayloadSpec, SystemParams};
use nalgebra::{Matrix3, Vector3};
use rand::Rng;

fn rx(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn ry(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

fn rz(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Energy-method model of the vehicle and arm: vehicle body, base rod,
/// two link rods, a point payload at the gripper and joint armatures.
pub struct LagrangianOracle {
    p: SystemParams,
    payload: f64,
}

struct Geometry {
    /// Body-to-inertial rotation.
    r: Matrix3<f64>,
    /// Body angular velocity.
    w: Vector3<f64>,
    /// Body-frame velocity of the vehicle origin.
    v0: Vector3<f64>,
}

impl LagrangianOracle {
    pub fn new(p: &SystemParams, payload: &PayloadSpec) -> Self {
        Self { p: *p, payload: payload.carried_mass() }
    }

    fn geometry(&self, q: &GenVec, qd: &GenVec) -> Geometry {
        let (phi, theta, psi) = (q[3], q[4], q[5]);
        let r = rz(psi) * ry(theta) * rx(phi);
        // Body rates: roll rate about body x, pitch rate about the once-rolled
        // y axis, yaw rate about inertial z, all expressed in the body.
        let w = Vector3::x() * qd[3] + rx(phi).transpose() * Vector3::y() * qd[4]
            + (ry(theta) * rx(phi)).transpose() * Vector3::z() * qd[5];
        let v0 = r.transpose() * Vector3::new(qd[0], qd[1], qd[2]);
        Geometry { r, w, v0 }
    }

    /// Points of the arm in the body frame and their joint-angle partials.
    fn arm(&self, q: &GenVec) -> ArmPoints {
        let p = &self.p;
        let (s1, c1) = q[6].sin_cos();
        let (s2, c2) = q[7].sin_cos();
        let j1 = Vector3::new(0.0, 0.0, -p.l0);
        let u1 = Vector3::new(0.0, -c1, -s1);
        let du1 = Vector3::new(0.0, s1, -c1);
        let u2 = Vector3::new(s2, -c1 * c2, -s1 * c2);
        let du2_1 = Vector3::new(0.0, s1 * c2, -c1 * c2);
        let du2_2 = Vector3::new(c2, c1 * s2, s1 * s2);
        let a2 = Vector3::new(0.0, -s1, c1);
        ArmPoints { j1, u1, du1, u2, du2_1, du2_2, a2 }
    }

    pub fn kinetic(&self, q: &GenVec, qd: &GenVec) -> f64 {
        let p = &self.p;
        let g = self.geometry(q, qd);
        let a = self.arm(q);
        let (d1, d2) = (qd[6], qd[7]);
        let point_speed2 = |r: Vector3<f64>, rdot: Vector3<f64>| (g.v0 + g.w.cross(&r) + rdot).norm_squared();
        let rod_spin = |inertia: f64, omega: Vector3<f64>, u: Vector3<f64>| {
            0.5 * inertia * (omega.norm_squared() - omega.dot(&u).powi(2))
        };

        let vehicle = 0.5 * p.m * g.v0.norm_squared()
            + 0.5 * (p.ix * g.w.x * g.w.x + p.iy * g.w.y * g.w.y + p.iz * g.w.z * g.w.z);

        let c0 = Vector3::new(0.0, 0.0, -p.l0 / 2.0);
        let base_rod = 0.5 * p.m0 * point_speed2(c0, Vector3::zeros())
            + rod_spin(p.m0 * p.l0 * p.l0 / 12.0, g.w, -Vector3::z());

        let w1 = g.w + Vector3::x() * d1;
        let c1 = a.j1 + a.u1 * (p.l1 / 2.0);
        let c1dot = a.du1 * (p.l1 / 2.0 * d1);
        let link1 = 0.5 * p.m1 * point_speed2(c1, c1dot) + rod_spin(p.m1 * p.l1 * p.l1 / 12.0, w1, a.u1);

        let w2 = w1 + a.a2 * d2;
        let j2 = a.j1 + a.u1 * p.l1;
        let j2dot = a.du1 * (p.l1 * d1);
        let u2dot = a.du2_1 * d1 + a.du2_2 * d2;
        let c2 = j2 + a.u2 * (p.l2 / 2.0);
        let c2dot = j2dot + u2dot * (p.l2 / 2.0);
        let link2 = 0.5 * p.m2 * point_speed2(c2, c2dot) + rod_spin(p.m2 * p.l2 * p.l2 / 12.0, w2, a.u2);

        let tip = j2 + a.u2 * p.l2;
        let tipdot = j2dot + u2dot * p.l2;
        let payload = 0.5 * self.payload * point_speed2(tip, tipdot);

        let armature = 0.5 * (p.joint_armature[0] * d1 * d1 + p.joint_armature[1] * d2 * d2);
        vehicle + base_rod + link1 + link2 + payload + armature
    }

    pub fn potential(&self, q: &GenVec) -> f64 {
        let p = &self.p;
        let g = self.geometry(q, &GenVec::zeros());
        let a = self.arm(q);
        let h = |r: Vector3<f64>| q[2] + (g.r * r).z;
        let j2 = a.j1 + a.u1 * p.l1;
        p.g * (p.m * q[2]
            + p.m0 * h(Vector3::new(0.0, 0.0, -p.l0 / 2.0))
            + p.m1 * h(a.j1 + a.u1 * (p.l1 / 2.0))
            + p.m2 * h(j2 + a.u2 * (p.l2 / 2.0))
            + self.payload * h(j2 + a.u2 * p.l2))
    }

    /// Exact mass matrix by polarisation of the quadratic kinetic energy.
    pub fn mass_matrix(&self, q: &GenVec) -> GenMat {
        let e = |i: usize| {
            let mut v = GenVec::zeros();
            v[i] = 1.0;
            v
        };
        let mut m = GenMat::zeros();
        for i in 0..8 {
            m[(i, i)] = 2.0 * self.kinetic(q, &e(i));
            for j in 0..i {
                let v = self.kinetic(q, &(e(i) + e(j))) - self.kinetic(q, &e(i)) - self.kinetic(q, &e(j));
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// `d/dt ∂L/∂q̇ − ∂L/∂q` with central differences in `q`.
    pub fn generalized_forces(&self, q: &GenVec, qd: &GenVec, qdd: &GenVec) -> GenVec {
        let h = 1e-5;
        let m_dot = (self.mass_matrix(&(q + qd * h)) - self.mass_matrix(&(q - qd * h))) / (2.0 * h);
        let mut dl = GenVec::zeros();
        for k in 0..8 {
            let mut dq = GenVec::zeros();
            dq[k] = h;
            let dt = (self.kinetic(&(q + dq), qd) - self.kinetic(&(q - dq), qd)) / (2.0 * h);
            let dv = (self.potential(&(q + dq)) - self.potential(&(q - dq))) / (2.0 * h);
            dl[k] = dt - dv;
        }
        self.mass_matrix(q) * qdd + m_dot * qd - dl
    }
}

struct ArmPoints {
    j1: Vector3<f64>,
    u1: Vector3<f64>,
    du1: Vector3<f64>,
    u2: Vector3<f64>,
    du2_1: Vector3<f64>,
    du2_2: Vector3<f64>,
    a2: Vector3<f64>,
}

/// Random configuration with roll and pitch well inside ±60°.
pub fn random_q(rng: &mut impl Rng) -> GenVec {
    GenVec::from_fn(|i, _| match i {
        0..=2 => rng.gen_range(-3.0..3.0),
        3 | 4 => rng.gen_range(-1.0..1.0),
        _ => rng.gen_range(-3.1..3.1),
    })
}

pub fn random_vec(rng: &mut impl Rng, scale: f64) -> GenVec {
    GenVec::from_fn(|_, _| rng.gen_range(-scale..scale))
}

pub fn relative_error(actual: &GenVec, expected: &GenVec) -> f64 {
    (actual - expected).norm() / expected.norm().max(1.0)
}

pub fn scenario_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

pub fn paper_s6() -> aeromanip::sim::Scenario {
    aeromanip::sim::Scenario::load(&scenario_path("paper_s6.json")).unwrap()
}

/// A single brisk move with all loop gains scaled by 0.2, which stays
/// stable at a 10 ms control period so integration error is measurable.
pub fn smooth_move(dt: f64) -> aeromanip::sim::Scenario {
    use aeromanip::control::RicAxisGains;
    let mut s = paper_s6();
    s.name = "smooth_move".into();
    s.waypoints.truncate(1);
    s.waypoints[0].arrive = 1.0;
    s.waypoints[0].transit = 1.0;
    s.payload_events.clear();
    s.duration = 2.0;
    s.dt = dt;
    let soften = |a: &mut RicAxisGains| {
        for k in [&mut a.kp_ext, &mut a.kd_ext, &mut a.kp_int, &mut a.kd_int, &mut a.ki_int] {
            *k *= 0.2;
        }
    };
    let g = &mut s.gains;
    for a in [&mut g.x, &mut g.y, &mut g.z, &mut g.phi, &mut g.theta, &mut g.psi, &mut g.theta1, &mut g.theta2] {
        soften(a);
    }
    s
}

/// Final `[q; q̇]` after running `s` with `n` integrator substeps.
pub fn final_state(s: &aeromanip::sim::Scenario, n: usize) -> GenVec16 {
    let mut s = s.clone();
    s.integrator_substeps = n;
    let mut sim = aeromanip::sim::Simulation::new(&s).unwrap();
    for _ in 0..s.steps() {
        sim.step().unwrap();
    }
    let st = sim.state();
    GenVec16::from_iterator(st.q.iter().chain(st.qdot.iter()).copied())
}

pub type GenVec16 = nalgebra::SVector<f64, 16>;

/// Observed convergence orders from errors against a fine reference.
pub fn rk4_orders(s: &aeromanip::sim::Scenario) -> Vec<f64> {
    let reference = final_state(s, 128);
    let errors: Vec<f64> = [1, 2, 4].iter().map(|&n| (final_state(s, n) - reference).amax()).collect();
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// The bundled scenario cut short, keeping only what happens before `duration`.
pub fn paper_s6_until(duration: f64) -> aeromanip::sim::Scenario {
    let mut s = paper_s6();
    s.duration = duration;
    s.payload_events.retain(|e| e.time <= duration);
    s.waypoints.retain(|w| w.arrive <= duration);
    s
}

/// Worst relative energy change of a free, uncontrolled flight.
pub fn energy_drift(gravity: bool, duration: f64) -> f64 {
    let mut params = aeromanip::dynamics::SystemParams::default();
    if !gravity {
        params.g = 0.0;
    }
    let mut q = GenVec::from_column_slice(&[0.1, -0.2, 1.0, 0.03, -0.02, 0.4, 1.2, 0.3]);
    let qdot = GenVec::from_column_slice(&[0.3, -0.2, 0.1, 0.02, -0.03, 0.05, 0.8, -1.1]);
    if gravity {
        q[2] = 100.0;
    }
    let mut s = aeromanip::sim::Scenario::from_json_str(&format!(r#"{{"name": "coast", "duration": {duration}}}"#)).unwrap();
    s.controller = aeromanip::sim::ControllerMode::Off;
    s.params = params;
    s.initial_state = aeromanip::sim::InitialState { q: q.into(), qdot: qdot.into() };
    let oracle = LagrangianOracle::new(&params, &PayloadSpec::none());
    let energy = |q: &GenVec, qd: &GenVec| oracle.kinetic(q, qd) + oracle.potential(q);
    let mut sim = aeromanip::sim::Simulation::new(&s).unwrap();
    let e0 = energy(&q, &qdot);
    let mut worst = 0.0f64;
    for _ in 0..s.steps() {
        sim.step().unwrap();
        let st = sim.state();
        worst = worst.max((energy(&st.q, &st.qdot) - e0).abs() / e0.abs());
    }
    worst
}
