use super::integrator::rk4_step;
use super::scenario::{BranchChoice, ControllerMode, PayloadAction, PayloadEvent, Scenario, MAX_TILT};
use super::summary::{RunSummary, TelemetryStats};
use super::telemetry::TelemetryFrame;
use super::SimError;
use crate::control::{Mixer, RicController};
use crate::dynamics::{
    rotor_forces, ControlCommand, GenVec, InteractionWrench, Multibody, PayloadSpec, RotorSpeeds, SystemState,
};
use crate::kinematics::{forward_kinematics, inverse_kinematics, IkSolution, JointAngles, Multiplicity, VehicleConfig};
use crate::spatial::{wrap_angle, EulerAngles};
use crate::trajectory::{TrajectoryPlan, TrajectorySample, Waypoint};
use nalgebra::{SVector, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::time::Instant;

/// States larger than this in any component count as diverged.
pub const DIVERGENCE_BOUND: f64 = 1e6;

type State16 = SVector<f64, 16>;

/// Reference plan together with the configuration chosen for each waypoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedRun {
    pub plan: TrajectoryPlan,
    pub solutions: Vec<IkSolution>,
}

/// Converts the waypoints to configurations by inverse kinematics and joins
/// them with synchronised rest-to-rest quintics. Angle targets are taken
/// modulo 2π nearest the previous value so no move winds the long way.
pub fn build_plan(scenario: &Scenario) -> Result<PlannedRun, SimError> {
    let q = scenario.initial_state.q;
    let initial = [q[0], q[1], q[2], q[5], q[6], q[7]];
    let lengths = scenario.params.link_lengths();
    let mut previous = initial;
    let mut waypoints = Vec::with_capacity(scenario.waypoints.len());
    let mut solutions = Vec::with_capacity(scenario.waypoints.len());
    for (index, w) in scenario.waypoints.iter().enumerate() {
        let all = inverse_kinematics(&w.pose.to_pose(), &lengths).map_err(|source| SimError::Ik { waypoint: index, source })?;
        let sol = match (w.branch, all.len()) {
            (BranchChoice::Alternate, n) if n > 1 => all[1],
            (BranchChoice::Alternate, _) => {
                log::warn!("waypoint {index}: no alternate branch, using the only solution");
                all[0]
            }
            (BranchChoice::Primary, _) => all[0],
        };
        if sol.multiplicity == Multiplicity::Infinite {
            log::warn!("waypoint {index}: case {} target has an infinite family of solutions (psi free); using psi = 0", sol.case.number());
        }
        log::info!("waypoint {index}: case {}, {:?}, {:?}", sol.case.number(), sol.branch, sol.multiplicity);
        let raw = [sol.vehicle.x, sol.vehicle.y, sol.vehicle.z, sol.vehicle.psi, sol.joints.theta1, sol.joints.theta2];
        let mut target = raw;
        for i in 3..6 {
            target[i] = previous[i] + wrap_angle(raw[i] - previous[i]);
        }
        waypoints.push(Waypoint { target, arrive: w.arrive, transit: w.transit });
        solutions.push(sol);
        previous = target;
    }
    let plan = TrajectoryPlan::from_waypoints(initial, &waypoints)?;
    Ok(PlannedRun { plan, solutions })
}

/// What the plant receives during one control period.
#[derive(Debug, Clone, Copy)]
struct Actuation {
    cmd: ControlCommand,
    omega_bar: f64,
    disturbance: InteractionWrench,
}

/// A closed-loop run advanced one control period at a time.
pub struct Simulation {
    scenario: Scenario,
    plan: TrajectoryPlan,
    solutions: Vec<IkSolution>,
    mixer: Mixer,
    controller: Option<RicController>,
    multibody: Multibody,
    payload: PayloadSpec,
    state: SystemState,
    step: usize,
    events: Vec<(usize, PayloadEvent)>,
    next_event: usize,
    rng: ChaCha8Rng,
    noise: [f64; 16],
    saturated_steps: usize,
}

impl Simulation {
    pub fn new(scenario: &Scenario) -> Result<Self, SimError> {
        scenario.validate()?;
        let PlannedRun { plan, solutions } = build_plan(scenario)?;
        let params = &scenario.params;
        let controller = match scenario.controller {
            ControllerMode::Ric => Some(RicController::new(scenario.gains, scenario.limits, params)?),
            ControllerMode::Off => None,
        };
        let payload = PayloadSpec::none();
        Ok(Self {
            scenario: scenario.clone(),
            plan,
            solutions,
            mixer: Mixer::new(params)?,
            controller,
            multibody: Multibody::new(params, &payload),
            payload,
            state: scenario.initial_state.to_state(),
            step: 0,
            events: scenario.payload_events.iter().map(|e| (scenario.step_of(e.time), *e)).collect(),
            next_event: 0,
            rng: ChaCha8Rng::seed_from_u64(scenario.seed),
            noise: scenario.noise.std_devs(),
            saturated_steps: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.scenario.dt
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn payload(&self) -> &PayloadSpec {
        &self.payload
    }

    pub fn plan(&self) -> &TrajectoryPlan {
        &self.plan
    }

    pub fn solutions(&self) -> &[IkSolution] {
        &self.solutions
    }

    pub fn multibody(&self) -> &Multibody {
        &self.multibody
    }

    pub fn saturated_steps(&self) -> usize {
        self.saturated_steps
    }

    /// Computes the control at the current time and integrates one period.
    /// Returns the frame describing the state at the start of the period.
    pub fn step(&mut self) -> Result<TelemetryFrame, SimError> {
        let (frame, act) = self.control();
        let dt = self.scenario.dt;
        let n = self.scenario.integrator_substeps;
        let h = dt / n as f64;
        let mb = &self.multibody;
        let mut x = State16::from_iterator(self.state.q.iter().chain(self.state.qdot.iter()).copied());
        for _ in 0..n {
            x = rk4_step(&x, h, |x| derivative(mb, x, &act)).map_err(|reason| self.diverged(reason))?;
        }
        self.step += 1;
        self.state = SystemState::new(x.fixed_rows::<8>(0).into_owned(), x.fixed_rows::<8>(8).into_owned());
        if let Some(reason) = divergence(&self.state) {
            return Err(self.diverged(reason));
        }
        Ok(frame)
    }

    /// The frame at the current time, without advancing the plant.
    pub fn observe(&mut self) -> TelemetryFrame {
        self.control().0
    }

    fn diverged(&self, reason: String) -> SimError {
        SimError::Diverged { time: self.time(), reason, partial: None }
    }

    fn apply_events(&mut self) {
        while let Some(&(at, event)) = self.events.get(self.next_event) {
            if at > self.step {
                break;
            }
            self.payload = match event.action {
                PayloadAction::Attach => PayloadSpec::attached(event.mass),
                PayloadAction::Detach => PayloadSpec { attached: false, ..self.payload },
            };
            self.multibody = Multibody::new(&self.scenario.params, &self.payload);
            log::info!("t = {:.3} s: payload {:?} ({} kg)", self.time(), event.action, event.mass);
            self.next_event += 1;
        }
    }

    fn measured(&mut self) -> SystemState {
        if self.noise.iter().all(|s| *s == 0.0) {
            return self.state;
        }
        let mut m = self.state;
        for (i, sigma) in self.noise.iter().enumerate() {
            if *sigma > 0.0 {
                let n: f64 = StandardNormal.sample(&mut self.rng);
                if i < 8 {
                    m.q[i] += sigma * n;
                } else {
                    m.qdot[i - 8] += sigma * n;
                }
            }
        }
        m
    }

    fn disturbance_at(&self, t: f64) -> InteractionWrench {
        let mut w = InteractionWrench::zero();
        for d in self.scenario.disturbances.iter().filter(|d| d.start <= t && t < d.end) {
            w.force += Vector3::from(d.force);
            w.moment += Vector3::from(d.moment);
        }
        w
    }

    fn control(&mut self) -> (TelemetryFrame, Actuation) {
        self.apply_events();
        let t = self.time();
        let setpoint = self.plan.evaluate(t);
        let measured = self.measured();
        let params = self.scenario.params;
        let (outputs, speeds) = match self.controller.as_mut() {
            Some(c) => {
                let out = c.step(&setpoint, &measured, self.scenario.dt);
                let mixed = self.mixer.solve_saturating(out.cmd.thrust, &out.cmd.tau_a);
                if mixed.saturated {
                    self.saturated_steps += 1;
                }
                (out, mixed.speeds)
            }
            None => (Default::default(), RotorSpeeds::default()),
        };
        let rotors = rotor_forces(&speeds, &params);
        let cmd = ControlCommand { thrust: rotors.thrust, tau_a: rotors.tau_a, tau_m: outputs.cmd.tau_m };
        let act = Actuation { cmd, omega_bar: rotors.omega_bar, disturbance: self.disturbance_at(t) };
        let frame = self.frame(t, &setpoint, outputs.phi_des, outputs.theta_des, &cmd, &speeds);
        (frame, act)
    }

    fn frame(
        &self,
        t: f64,
        sp: &TrajectorySample,
        phi_des: f64,
        theta_des: f64,
        cmd: &ControlCommand,
        speeds: &RotorSpeeds,
    ) -> TelemetryFrame {
        let lengths = self.scenario.params.link_lengths();
        let s = &self.state;
        let actual = forward_kinematics(&s.vehicle(), &s.attitude(), &s.joints(), &lengths);
        let r = &sp.position;
        let desired = forward_kinematics(
            &VehicleConfig::new(r[0], r[1], r[2], r[3]),
            &EulerAngles::default(),
            &JointAngles::new(r[4], r[5]),
            &lengths,
        );
        let pose = |p: &crate::kinematics::EndEffectorPose| {
            [p.position.x, p.position.y, p.position.z, p.orientation.phi, p.orientation.theta, p.orientation.psi]
        };
        TelemetryFrame {
            t,
            q: s.q.into(),
            qdot: s.qdot.into(),
            reference: sp.position,
            phi_des,
            theta_des,
            command: [cmd.thrust, cmd.tau_a.x, cmd.tau_a.y, cmd.tau_a.z, cmd.tau_m.x, cmd.tau_m.y],
            rotor_speeds: speeds.omega,
            ee_actual: pose(&actual),
            ee_desired: pose(&desired),
            payload_attached: self.payload.attached,
        }
    }
}

fn derivative(mb: &Multibody, x: &State16, act: &Actuation) -> Result<State16, String> {
    let state = SystemState::new(x.fixed_rows::<8>(0).into_owned(), x.fixed_rows::<8>(8).into_owned());
    let qdd: GenVec = mb.forward_dynamics(&state, &act.cmd, act.omega_bar, &act.disturbance).map_err(|e| e.to_string())?;
    Ok(State16::from_iterator(state.qdot.iter().chain(qdd.iter()).copied()))
}

fn divergence(state: &SystemState) -> Option<String> {
    if !state.is_finite() {
        return Some("non-finite state".into());
    }
    let largest = state.q.iter().chain(state.qdot.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    if largest > DIVERGENCE_BOUND {
        return Some(format!("state magnitude {largest:e} exceeds {DIVERGENCE_BOUND:e}"));
    }
    if state.q[4].abs() >= MAX_TILT {
        return Some(format!("pitch {:.1}° reached the ±85° guard", state.q[4].to_degrees()));
    }
    None
}

/// Telemetry and summary of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub telemetry: Vec<TelemetryFrame>,
    pub summary: RunSummary,
}

/// Runs a scenario to completion. On divergence the error carries the
/// telemetry logged so far.
pub fn run_scenario(scenario: &Scenario) -> Result<RunOutput, SimError> {
    let started = Instant::now();
    let mut sim = Simulation::new(scenario)?;
    let steps = scenario.steps();
    let every = scenario.telemetry_decimation;
    let mut telemetry = Vec::with_capacity(steps / every + 2);
    let mut failure = None;
    for k in 0..steps {
        match sim.step() {
            Ok(frame) => {
                if k % every == 0 {
                    telemetry.push(frame);
                }
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    if failure.is_none() && steps % every == 0 {
        telemetry.push(sim.observe());
    }
    if sim.saturated_steps() > 0 {
        log::warn!("{}: rotor speeds saturated on {} steps", scenario.name, sim.saturated_steps());
    }
    let diverged_at = match &failure {
        Some(SimError::Diverged { time, .. }) => Some(*time),
        _ => None,
    };
    let summary = RunSummary {
        scenario: scenario.name.clone(),
        seed: scenario.seed,
        dt: scenario.dt,
        duration: scenario.duration,
        integrator_substeps: scenario.integrator_substeps,
        steps: sim.step_index(),
        completed: failure.is_none(),
        diverged_at,
        saturated_steps: sim.saturated_steps(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        stats: TelemetryStats::from_frames(&telemetry),
    };
    let output = RunOutput { telemetry, summary };
    match failure {
        None => Ok(output),
        Some(SimError::Diverged { time, reason, .. }) => {
            Err(SimError::Diverged { time, reason, partial: Some(Box::new(output)) })
        }
        Some(e) => Err(e),
    }
}
