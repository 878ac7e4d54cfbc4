use serde::{Deserialize, Serialize};

/// Gains of one robust internal-loop compensator axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RicAxisGains {
    pub kp_ext: f64,
    pub kd_ext: f64,
    pub kp_int: f64,
    pub kd_int: f64,
    pub ki_int: f64,
    /// Reference-model inertia: `ÿ_m = u_c / tau_c`.
    pub tau_c: f64,
}

impl RicAxisGains {
    pub const fn new(kp_ext: f64, kd_ext: f64, kp_int: f64, kd_int: f64, ki_int: f64, tau_c: f64) -> Self {
        Self { kp_ext, kd_ext, kp_int, kd_int, ki_int, tau_c }
    }

    pub fn is_valid(&self) -> bool {
        let gains = [self.kp_ext, self.kd_ext, self.kp_int, self.kd_int, self.ki_int];
        gains.iter().all(|g| g.is_finite() && *g >= 0.0) && self.tau_c.is_finite() && self.tau_c > 0.0
    }

    /// Same external loop with the internal loop switched off.
    pub fn without_internal_loop(&self) -> Self {
        Self { kp_int: 0.0, kd_int: 0.0, ki_int: 0.0, ..*self }
    }
}

/// Reference-model output and rate plus the internal-loop integral.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RicAxisState {
    pub ym: f64,
    pub ym_dot: f64,
    pub integ: f64,
    /// Set once the model has been aligned with the first measurement.
    pub initialized: bool,
}

impl RicAxisState {
    pub fn reset(&mut self) {
        *self = Self::default();
    }

    /// Starts the reference model at the measured output.
    pub fn align(&mut self, y: f64, y_rate: f64) {
        self.ym = y;
        self.ym_dot = y_rate;
        self.initialized = true;
    }

    /// Exact double-integrator update for an input held over `dt`.
    pub fn advance_model(&mut self, accel: f64, dt: f64) {
        self.ym += self.ym_dot * dt + 0.5 * accel * dt * dt;
        self.ym_dot += accel * dt;
    }

    pub fn accumulate(&mut self, e_r: f64, dt: f64, limit: f64) {
        self.integ = (self.integ + e_r * dt).clamp(-limit, limit);
    }

    pub fn is_finite(&self) -> bool {
        self.ym.is_finite() && self.ym_dot.is_finite() && self.integ.is_finite()
    }
}

/// Inputs to one axis for one control period.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxisInput {
    pub y_ref: f64,
    pub y_ref_rate: f64,
    pub y: f64,
    pub y_rate: f64,
    /// Feedforward effort.
    pub u_ex: f64,
}

/// The three additive parts of an axis effort and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxisEffort {
    pub u: f64,
    pub u_c: f64,
    pub u_k: f64,
    pub u_ex: f64,
}

/// One control period of a single axis.
///
/// The external PD output `u_c` drives the reference model `1/(τ_c s²)`;
/// the internal PID acts on the model-following error `e_r = y_m − y`.
/// The model is aligned with the measurement on the first call.
pub fn ric_axis_step(
    gains: &RicAxisGains,
    state: &mut RicAxisState,
    input: &AxisInput,
    dt: f64,
    integral_limit: f64,
) -> AxisEffort {
    if !state.initialized {
        state.align(input.y, input.y_rate);
    }
    let u_c = gains.kp_ext * (input.y_ref - input.y) + gains.kd_ext * (input.y_ref_rate - input.y_rate);
    state.advance_model(u_c / gains.tau_c, dt);
    let e_r = state.ym - input.y;
    let e_r_rate = state.ym_dot - input.y_rate;
    state.accumulate(e_r, dt, integral_limit);
    let u_k = gains.kp_int * e_r + gains.kd_int * e_r_rate + gains.ki_int * state.integ;
    AxisEffort { u: u_c + u_k + input.u_ex, u_c, u_k, u_ex: input.u_ex }
}
