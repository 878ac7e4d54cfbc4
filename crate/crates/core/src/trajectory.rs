//! Quintic point-to-point reference trajectories for the six controlled
//! coordinates `[X, Y, Z, ψ, θ₁, θ₂]`.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Shortest segment window accepted by [`plan_quintic`] (s).
pub const MIN_WINDOW: f64 = 1e-6;
const CONTINUITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("segment window [{t0}, {tf}] is shorter than {MIN_WINDOW} s")]
    DegenerateWindow { t0: f64, tf: f64 },
    #[error("segment for {coordinate} starting at {t_start} s overlaps the previous one ending at {previous_end} s")]
    Overlap { coordinate: Coordinate, t_start: f64, previous_end: f64 },
    #[error("segment for {coordinate} starting at {t_start} s does not continue from the held value {held} (starts at {start})")]
    Discontinuous { coordinate: Coordinate, t_start: f64, held: f64, start: f64 },
    #[error("non-finite trajectory input")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    X,
    Y,
    Z,
    Psi,
    Theta1,
    Theta2,
}

impl Coordinate {
    pub const ALL: [Coordinate; 6] =
        [Coordinate::X, Coordinate::Y, Coordinate::Z, Coordinate::Psi, Coordinate::Theta1, Coordinate::Theta2];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Coordinate::X => "x",
            Coordinate::Y => "y",
            Coordinate::Z => "z",
            Coordinate::Psi => "psi",
            Coordinate::Theta1 => "theta1",
            Coordinate::Theta2 => "theta2",
        }
    }
}

impl std::fmt::Display for Coordinate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Position, velocity and acceleration of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryState {
    pub position: f64,
    pub velocity: f64,
    pub acceleration: f64,
}

impl BoundaryState {
    pub fn new(position: f64, velocity: f64, acceleration: f64) -> Self {
        Self { position, velocity, acceleration }
    }

    pub fn at_rest(position: f64) -> Self {
        Self { position, ..Default::default() }
    }
}

/// `q(t) = Σ cₖ uᵏ` with normalised time `u = (t − t_start)/(t_end − t_start)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticSegment {
    pub coeffs: [f64; 6],
    pub t_start: f64,
    pub t_end: f64,
    /// Boundary conditions the segment was planned for.
    pub start: BoundaryState,
    pub end: BoundaryState,
}

impl QuinticSegment {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// Evaluates the polynomial and its first two derivatives. Not clamped
    /// to the window.
    pub fn eval(&self, t: f64) -> BoundaryState {
        let c = &self.coeffs;
        let h = self.duration();
        let u = (t - self.t_start) / h;
        let position = c[0] + u * (c[1] + u * (c[2] + u * (c[3] + u * (c[4] + u * c[5]))));
        let velocity = c[1] + u * (2.0 * c[2] + u * (3.0 * c[3] + u * (4.0 * c[4] + u * 5.0 * c[5])));
        let acceleration = 2.0 * c[2] + u * (6.0 * c[3] + u * (12.0 * c[4] + u * 20.0 * c[5]));
        BoundaryState { position, velocity: velocity / h, acceleration: acceleration / (h * h) }
    }
}

/// The unique quintic meeting the given boundary states at `t0` and `tf`,
/// from the 6×6 boundary system in normalised time.
pub fn plan_quintic(start: BoundaryState, end: BoundaryState, t0: f64, tf: f64) -> Result<QuinticSegment, TrajectoryError> {
    let inputs = [start.position, start.velocity, start.acceleration, end.position, end.velocity, end.acceleration, t0, tf];
    if inputs.iter().any(|v| !v.is_finite()) {
        return Err(TrajectoryError::NonFinite);
    }
    if !(tf - t0 >= MIN_WINDOW) {
        return Err(TrajectoryError::DegenerateWindow { t0, tf });
    }
    let h = tf - t0;
    #[rustfmt::skip]
    let a = SMatrix::<f64, 6, 6>::from_row_slice(&[
        1.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 2.0, 0.0, 0.0, 0.0,
        1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
        0.0, 1.0, 2.0, 3.0, 4.0, 5.0,
        0.0, 0.0, 2.0, 6.0, 12.0, 20.0,
    ]);
    let b = SVector::<f64, 6>::from_column_slice(&[
        start.position,
        start.velocity * h,
        start.acceleration * h * h,
        end.position,
        end.velocity * h,
        end.acceleration * h * h,
    ]);
    let c = a.lu().solve(&b).expect("boundary matrix is nonsingular");
    Ok(QuinticSegment { coeffs: c.into(), t_start: t0, t_end: tf, start, end })
}

/// Position, velocity and acceleration of all six coordinates at one time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrajectorySample {
    pub position: [f64; 6],
    pub velocity: [f64; 6],
    pub acceleration: [f64; 6],
}

/// A goal for all six coordinates, reached at rest at `arrive` after a
/// synchronised move lasting `transit` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub target: [f64; 6],
    pub arrive: f64,
    pub transit: f64,
}

/// Time-ordered segments per coordinate with holds in between.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPlan {
    initial: [f64; 6],
    segments: [Vec<QuinticSegment>; 6],
}

impl TrajectoryPlan {
    /// A plan that holds `initial` forever.
    pub fn hold(initial: [f64; 6]) -> Self {
        Self { initial, segments: Default::default() }
    }

    /// Rest-to-rest moves through the waypoints in order.
    pub fn from_waypoints(initial: [f64; 6], waypoints: &[Waypoint]) -> Result<Self, TrajectoryError> {
        let mut plan = Self::hold(initial);
        for w in waypoints {
            plan.add_move(w.target, w.arrive - w.transit, w.arrive)?;
        }
        Ok(plan)
    }

    pub fn initial(&self) -> [f64; 6] {
        self.initial
    }

    pub fn segments(&self, coordinate: Coordinate) -> &[QuinticSegment] {
        &self.segments[coordinate.index()]
    }

    /// Value held after the last segment of a coordinate.
    pub fn final_value(&self, coordinate: Coordinate) -> f64 {
        self.segments[coordinate.index()]
            .last()
            .map(|s| s.end.position)
            .unwrap_or(self.initial[coordinate.index()])
    }

    pub fn final_values(&self) -> [f64; 6] {
        Coordinate::ALL.map(|c| self.final_value(c))
    }

    /// End of the last segment over all coordinates, zero for a pure hold.
    pub fn end_time(&self) -> f64 {
        self.segments.iter().filter_map(|s| s.last()).map(|s| s.t_end).fold(0.0, f64::max)
    }

    /// Appends a segment. It must start after the previous one ends and
    /// continue its held position and velocity.
    pub fn push_segment(&mut self, coordinate: Coordinate, segment: QuinticSegment) -> Result<(), TrajectoryError> {
        let list = &self.segments[coordinate.index()];
        let (held, previous_end, end_velocity) = match list.last() {
            Some(last) => (last.end.position, last.t_end, last.end.velocity),
            None => (self.initial[coordinate.index()], f64::NEG_INFINITY, 0.0),
        };
        if segment.t_start < previous_end {
            return Err(TrajectoryError::Overlap { coordinate, t_start: segment.t_start, previous_end });
        }
        let start = segment.eval(segment.t_start);
        // Across a hold the velocity is zero.
        let expected_velocity = if segment.t_start == previous_end { end_velocity } else { 0.0 };
        let tol = CONTINUITY_TOL * held.abs().max(1.0);
        if (start.position - held).abs() > tol || (start.velocity - expected_velocity).abs() > tol {
            return Err(TrajectoryError::Discontinuous { coordinate, t_start: segment.t_start, held, start: start.position });
        }
        self.segments[coordinate.index()].push(segment);
        Ok(())
    }

    /// Synchronised rest-to-rest move of all six coordinates from their
    /// currently held values to `target` over `[t0, tf]`.
    pub fn add_move(&mut self, target: [f64; 6], t0: f64, tf: f64) -> Result<(), TrajectoryError> {
        let mut planned = Vec::with_capacity(6);
        for c in Coordinate::ALL {
            let seg = plan_quintic(BoundaryState::at_rest(self.final_value(c)), BoundaryState::at_rest(target[c.index()]), t0, tf)?;
            planned.push((c, seg));
        }
        let backup = self.segments.clone();
        for (c, seg) in planned {
            if let Err(e) = self.push_segment(c, seg) {
                self.segments = backup;
                return Err(e);
            }
        }
        Ok(())
    }

    /// Distinct segment windows over all coordinates, in time order.
    pub fn transit_windows(&self) -> Vec<(f64, f64)> {
        let mut windows: Vec<(f64, f64)> =
            self.segments.iter().flatten().map(|s| (s.t_start, s.t_end)).collect();
        windows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        windows.dedup();
        windows
    }

    pub fn evaluate_coordinate(&self, coordinate: Coordinate, t: f64) -> BoundaryState {
        let list = &self.segments[coordinate.index()];
        let idx = list.partition_point(|s| s.t_start <= t);
        if idx == 0 {
            return BoundaryState::at_rest(self.initial[coordinate.index()]);
        }
        let seg = &list[idx - 1];
        if t <= seg.t_end {
            seg.eval(t)
        } else {
            BoundaryState::at_rest(seg.end.position)
        }
    }

    pub fn evaluate(&self, t: f64) -> TrajectorySample {
        let mut out = TrajectorySample::default();
        for c in Coordinate::ALL {
            let s = self.evaluate_coordinate(c, t);
            out.position[c.index()] = s.position;
            out.velocity[c.index()] = s.velocity;
            out.acceleration[c.index()] = s.acceleration;
        }
        out
    }
}
