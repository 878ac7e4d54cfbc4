//! Tracking statistics derived from telemetry alone.

use super::telemetry::TelemetryFrame;
use crate::trajectory::Coordinate;
use serde::Serialize;
use std::fmt::Write as _;

/// Position error band used for payload recovery (m).
pub const RECOVERY_BAND: f64 = 0.01;
/// Length of the window at the end of each hold used for steady-state error (s).
pub const STEADY_WINDOW: f64 = 2.0;

/// A stretch of constant setpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoldSummary {
    pub start: f64,
    pub end: f64,
    /// Largest absolute error of each coordinate over the last
    /// [`STEADY_WINDOW`] seconds of the hold.
    pub steady_state_error: [f64; 6],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PayloadRecovery {
    /// Time of the first frame with the new payload state (s).
    pub time: f64,
    pub attached: bool,
    /// Largest position error between the event and the next setpoint change (m).
    pub peak_position_error: f64,
    /// Time from the event until the position error is back inside
    /// [`RECOVERY_BAND`] for good; `None` if it never settles before the
    /// setpoints move again.
    pub recovery_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TelemetryStats {
    pub frames: usize,
    pub end_time: f64,
    /// Largest absolute error of `[X, Y, Z, ψ, θ₁, θ₂]` over the run.
    pub max_abs_error: [f64; 6],
    /// Holds of at least [`STEADY_WINDOW`] seconds.
    pub holds: Vec<HoldSummary>,
    pub payload_events: Vec<PayloadRecovery>,
}

impl TelemetryStats {
    pub fn from_frames(frames: &[TelemetryFrame]) -> Self {
        let mut max_abs_error = [0.0f64; 6];
        for f in frames {
            for (m, e) in max_abs_error.iter_mut().zip(f.tracking_error()) {
                *m = m.max(e.abs());
            }
        }
        Self {
            frames: frames.len(),
            end_time: frames.last().map(|f| f.t).unwrap_or(0.0),
            max_abs_error,
            holds: holds(frames),
            payload_events: payload_events(frames),
        }
    }

    /// The last hold, whose steady-state error is the run's final error.
    pub fn final_hold(&self) -> Option<&HoldSummary> {
        self.holds.last()
    }
}

/// Index ranges `[a, b]` of frames sharing identical setpoints.
fn constant_runs(frames: &[TelemetryFrame]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=frames.len() {
        if i == frames.len() || frames[i].reference != frames[i - 1].reference {
            if i > start {
                runs.push((start, i - 1));
            }
            start = i;
        }
    }
    runs
}

fn holds(frames: &[TelemetryFrame]) -> Vec<HoldSummary> {
    constant_runs(frames)
        .into_iter()
        .filter(|&(a, b)| frames[b].t - frames[a].t >= STEADY_WINDOW)
        .map(|(a, b)| {
            let end = frames[b].t;
            let mut steady_state_error = [0.0f64; 6];
            for f in frames[a..=b].iter().filter(|f| f.t >= end - STEADY_WINDOW) {
                for (m, e) in steady_state_error.iter_mut().zip(f.tracking_error()) {
                    *m = m.max(e.abs());
                }
            }
            HoldSummary { start: frames[a].t, end, steady_state_error }
        })
        .collect()
}

fn payload_events(frames: &[TelemetryFrame]) -> Vec<PayloadRecovery> {
    let runs = constant_runs(frames);
    let mut out = Vec::new();
    for i in 1..frames.len() {
        if frames[i].payload_attached == frames[i - 1].payload_attached {
            continue;
        }
        // The event window runs until the setpoints next change.
        let end = runs.iter().find(|&&(a, b)| a <= i && i <= b).map(|&(_, b)| b).unwrap_or(frames.len() - 1);
        let window = &frames[i..=end];
        let peak = window.iter().map(TelemetryFrame::position_error).fold(0.0, f64::max);
        let last_out = window.iter().rposition(|f| f.position_error() > RECOVERY_BAND);
        let recovery_time = match last_out {
            None => Some(0.0),
            Some(k) if k + 1 < window.len() => Some(window[k + 1].t - frames[i].t),
            Some(_) => None,
        };
        out.push(PayloadRecovery {
            time: frames[i].t,
            attached: frames[i].payload_attached,
            peak_position_error: peak,
            recovery_time,
        });
    }
    out
}

/// Run configuration, telemetry statistics and wall-clock time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub seed: u64,
    pub dt: f64,
    pub duration: f64,
    pub integrator_substeps: usize,
    pub steps: usize,
    pub completed: bool,
    pub diverged_at: Option<f64>,
    pub saturated_steps: usize,
    pub wall_clock_seconds: f64,
    pub stats: TelemetryStats,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v}")).unwrap_or_else(|| "none".into())
}

impl RunSummary {
    /// `key = value` lines for machines.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let s_ = &mut s;
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s_, "{k} = {v}");
        };
        kv("scenario", self.scenario.clone());
        kv("seed", self.seed.to_string());
        kv("dt", format!("{}", self.dt));
        kv("duration", format!("{}", self.duration));
        kv("integrator_substeps", self.integrator_substeps.to_string());
        kv("steps", self.steps.to_string());
        kv("completed", self.completed.to_string());
        kv("diverged_at", fmt_opt(self.diverged_at));
        kv("saturated_steps", self.saturated_steps.to_string());
        kv("wall_clock_seconds", format!("{}", self.wall_clock_seconds));
        kv("frames", self.stats.frames.to_string());
        for c in Coordinate::ALL {
            kv(&format!("max_abs_error.{c}"), format!("{}", self.stats.max_abs_error[c.index()]));
        }
        for (i, h) in self.stats.holds.iter().enumerate() {
            kv(&format!("hold.{i}.start"), format!("{}", h.start));
            kv(&format!("hold.{i}.end"), format!("{}", h.end));
            for c in Coordinate::ALL {
                kv(&format!("hold.{i}.steady_state_error.{c}"), format!("{}", h.steady_state_error[c.index()]));
            }
        }
        for (i, e) in self.stats.payload_events.iter().enumerate() {
            kv(&format!("payload_event.{i}.time"), format!("{}", e.time));
            kv(&format!("payload_event.{i}.action"), if e.attached { "attach" } else { "detach" }.into());
            kv(&format!("payload_event.{i}.peak_position_error"), format!("{}", e.peak_position_error));
            kv(&format!("payload_event.{i}.recovery_time"), fmt_opt(e.recovery_time));
        }
        s
    }

    /// Aligned table for people.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let status = match self.diverged_at {
            Some(t) => format!("DIVERGED at t = {t:.3} s"),
            None => "completed".into(),
        };
        let _ = writeln!(s, "scenario {} (seed {}), dt {} s x {} substep(s), {} s: {}", self.scenario, self.seed, self.dt, self.integrator_substeps, self.duration, status);
        let _ = writeln!(s, "wall clock {:.2} s, {} frames, {} saturated steps", self.wall_clock_seconds, self.stats.frames, self.saturated_steps);
        let _ = writeln!(s);
        let _ = write!(s, "{:<24}", "");
        for c in Coordinate::ALL {
            let _ = write!(s, "{:>12}", c.name());
        }
        let _ = writeln!(s);
        let mut row = |label: String, values: &[f64; 6]| {
            let _ = write!(s, "{label:<24}");
            for v in values {
                let _ = write!(s, "{v:>12.3e}");
            }
            let _ = writeln!(s);
        };
        row("max |error|".into(), &self.stats.max_abs_error);
        for h in &self.stats.holds {
            row(format!("hold {:.1}-{:.1} s", h.start, h.end), &h.steady_state_error);
        }
        if !self.stats.payload_events.is_empty() {
            let _ = writeln!(s);
            for e in &self.stats.payload_events {
                let action = if e.attached { "attach" } else { "detach" };
                let recovery = match e.recovery_time {
                    Some(r) => format!("{r:.3} s"),
                    None => "not recovered".into(),
                };
                let _ = writeln!(
                    s,
                    "{action} at {:.3} s: peak position error {:.4} m, back within {} m after {recovery}",
                    e.time, e.peak_position_error, RECOVERY_BAND
                );
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames(errors: &[(f64, f64, bool, f64)]) -> Vec<TelemetryFrame> {
        // (t, z error, payload, z reference)
        errors
            .iter()
            .map(|&(t, e, p, r)| {
                let mut f = TelemetryFrame { t, payload_attached: p, ..Default::default() };
                f.reference[2] = r;
                f.q[2] = r - e;
                f
            })
            .collect()
    }

    #[test]
    fn holds_and_recovery() {
        let mut data = Vec::new();
        for i in 0..=100 {
            let t = i as f64 * 0.1;
            // Payload attaches at 3 s; error spikes and decays by 5 s.
            let e = if (3.0..5.0).contains(&t) { 0.04 * (5.0 - t) } else { 0.001 };
            data.push((t, e, t >= 3.0, 1.0));
        }
        for i in 101..=150 {
            let t = i as f64 * 0.1;
            data.push((t, 0.002, true, 2.0));
        }
        let f = frames(&data);
        let stats = TelemetryStats::from_frames(&f);
        assert_eq!(stats.holds.len(), 2);
        assert_eq!(stats.holds[0].start, 0.0);
        assert_eq!(stats.holds[0].end, 10.0);
        assert!((stats.holds[0].steady_state_error[2] - 0.001).abs() < 1e-15);
        assert_eq!(stats.payload_events.len(), 1);
        let ev = &stats.payload_events[0];
        assert!(ev.attached);
        assert!((ev.time - 3.0).abs() < 1e-12);
        assert!((ev.peak_position_error - 0.08).abs() < 1e-12);
        // Error is 0.04·(5 − t): last sample above 1 cm is t = 4.7 (0.012).
        assert!((ev.recovery_time.unwrap() - 1.8).abs() < 1e-9, "{:?}", ev.recovery_time);
        assert!((stats.max_abs_error[2] - 0.08).abs() < 1e-12);
    }

    #[test]
    fn unrecovered_event() {
        let data: Vec<_> = (0..50).map(|i| (i as f64 * 0.1, if i >= 10 { 0.05 } else { 0.0 }, i >= 10, 0.0)).collect();
        let stats = TelemetryStats::from_frames(&frames(&data));
        assert_eq!(stats.payload_events[0].recovery_time, None);
        assert!((stats.payload_events[0].time - 1.0).abs() < 1e-12);
    }
}
