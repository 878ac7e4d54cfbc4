//! Least-squares fit of rotor thrust and drag-moment coefficients from
//! bench logs of `(Ω, F, M)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use thiserror::Error;

/// Below this `ΣΩ⁴` the regressor carries no information.
pub const MIN_REGRESSOR: f64 = 1e-12;
pub const MIN_DISTINCT_SPEEDS: usize = 3;

#[derive(Debug, Error)]
pub enum IdentificationError {
    #[error("need at least {MIN_DISTINCT_SPEEDS} distinct rotor speeds, got {distinct}")]
    InsufficientData { distinct: usize },
    #[error("regressor is degenerate (sum of omega^4 = {sum:e})")]
    DegenerateRegressor { sum: f64 },
    #[error("row {row}: {reason}")]
    InvalidRow { row: usize, reason: String },
    #[error("malformed log: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotorSample {
    /// Rotor speed (rad/s).
    pub omega: f64,
    /// Measured thrust (N).
    pub thrust: f64,
    /// Measured drag moment (N·m).
    pub drag_moment: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RotorSampleLog {
    pub rotor: usize,
    pub samples: Vec<RotorSample>,
}

impl RotorSampleLog {
    pub fn new(rotor: usize, samples: Vec<RotorSample>) -> Self {
        Self { rotor, samples }
    }

    /// Reads `omega,thrust,drag_moment` rows with a header line.
    pub fn read_csv<R: Read>(rotor: usize, reader: R) -> Result<Self, IdentificationError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["omega", "thrust", "drag_moment"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(IdentificationError::InvalidRow {
                row: 1,
                reason: format!("header must be `omega,thrust,drag_moment`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut samples = Vec::new();
        for (i, row) in rdr.deserialize::<RotorSample>().enumerate() {
            let line = i + 2;
            let s = row.map_err(|e| IdentificationError::InvalidRow { row: line, reason: e.to_string() })?;
            if ![s.omega, s.thrust, s.drag_moment].iter().all(|v| v.is_finite()) {
                return Err(IdentificationError::InvalidRow { row: line, reason: "non-finite value".into() });
            }
            if s.omega < 0.0 {
                return Err(IdentificationError::InvalidRow { row: line, reason: format!("negative omega {}", s.omega) });
            }
            samples.push(s);
        }
        Ok(Self { rotor, samples })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), IdentificationError> {
        let mut w = csv::Writer::from_writer(writer);
        for s in &self.samples {
            w.serialize(s)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub rotor: usize,
    pub kf: f64,
    pub km: f64,
    pub thrust_residual_rms: f64,
    pub moment_residual_rms: f64,
    pub samples: usize,
}

/// Regression through the origin on `Ω²`: `k = ΣyΩ² / ΣΩ⁴` for thrust and
/// drag moment independently.
pub fn fit_rotor_coefficients(log: &RotorSampleLog) -> Result<FitResult, IdentificationError> {
    let s = &log.samples;
    let sum4: f64 = s.iter().map(|r| r.omega.powi(4)).sum();
    if !(sum4 >= MIN_REGRESSOR) {
        return Err(IdentificationError::DegenerateRegressor { sum: sum4 });
    }
    let mut speeds: Vec<f64> = s.iter().map(|r| r.omega).collect();
    speeds.sort_by(f64::total_cmp);
    speeds.dedup();
    if speeds.len() < MIN_DISTINCT_SPEEDS {
        return Err(IdentificationError::InsufficientData { distinct: speeds.len() });
    }
    let kf = s.iter().map(|r| r.thrust * r.omega * r.omega).sum::<f64>() / sum4;
    let km = s.iter().map(|r| r.drag_moment * r.omega * r.omega).sum::<f64>() / sum4;
    let rms = |k: f64, y: fn(&RotorSample) -> f64| {
        (s.iter().map(|r| (y(r) - k * r.omega * r.omega).powi(2)).sum::<f64>() / s.len() as f64).sqrt()
    };
    Ok(FitResult {
        rotor: log.rotor,
        kf,
        km,
        thrust_residual_rms: rms(kf, |r| r.thrust),
        moment_residual_rms: rms(km, |r| r.drag_moment),
        samples: s.len(),
    })
}

/// Bench log with `F = kF·Ω²`, `M = kM·Ω²` at each speed, each reading
/// scaled by `1 + noise·N(0, 1)`.
pub fn synthesize_rotor_log(rotor: usize, kf: f64, km: f64, speeds: &[f64], noise: f64, seed: u64) -> RotorSampleLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let samples = speeds
        .iter()
        .map(|&omega| {
            let w2 = omega * omega;
            let (ef, em) = if noise > 0.0 {
                (normal.sample(&mut rng), normal.sample(&mut rng))
            } else {
                (0.0, 0.0)
            };
            RotorSample { omega, thrust: kf * w2 * (1.0 + noise * ef), drag_moment: km * w2 * (1.0 + noise * em) }
        })
        .collect();
    RotorSampleLog { rotor, samples }
}
