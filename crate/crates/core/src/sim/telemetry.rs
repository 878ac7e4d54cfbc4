//! Telemetry frames and their CSV form.
//!
//! Floats are written in Rust's shortest round-trip notation, so a file
//! read back reproduces the in-memory frames bit for bit.

use std::io::{BufRead, BufReader, Read, Write};
use thiserror::Error;

pub const HEADER_COMMENT: &str = "# aeromanip telemetry. Units: t s; x y z m; phi theta psi theta1 theta2 rad; \
*_dot m/s or rad/s; *_ref setpoints; phi_des theta_des rad; thrust N; tau_a* tau_m* N*m; omega* rad/s; \
ee_* gripper pose (m, rad), ee_*_ref desired gripper pose; payload 1 when attached";

const Q_NAMES: [&str; 8] = ["x", "y", "z", "phi", "theta", "psi", "theta1", "theta2"];
const REF_NAMES: [&str; 6] = ["x", "y", "z", "psi", "theta1", "theta2"];
const EE_NAMES: [&str; 6] = ["ee_x", "ee_y", "ee_z", "ee_phi", "ee_theta", "ee_psi"];
const COMMAND_NAMES: [&str; 6] = ["thrust", "tau_a1", "tau_a2", "tau_a3", "tau_m1", "tau_m2"];
pub const COLUMN_COUNT: usize = 1 + 8 + 8 + 6 + 2 + 6 + 4 + 6 + 6 + 1;

#[derive(Debug, Error)]
pub enum TelemetryError {
    #[error("telemetry is empty")]
    Empty,
    #[error("unexpected header: {0}")]
    Header(String),
    #[error("line {line}: bad value `{value}` in column `{column}`")]
    Value { line: u64, column: String, value: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Everything logged at one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TelemetryFrame {
    pub t: f64,
    pub q: [f64; 8],
    pub qdot: [f64; 8],
    /// Setpoints of `[X, Y, Z, ψ, θ₁, θ₂]`.
    pub reference: [f64; 6],
    pub phi_des: f64,
    pub theta_des: f64,
    /// `[T, τ_a1, τ_a2, τ_a3, τ_m1, τ_m2]` as applied to the plant.
    pub command: [f64; 6],
    pub rotor_speeds: [f64; 4],
    /// Gripper `[x, y, z, φ, θ, ψ]`.
    pub ee_actual: [f64; 6],
    pub ee_desired: [f64; 6],
    pub payload_attached: bool,
}

impl TelemetryFrame {
    /// Tracking errors `reference − actual` of `[X, Y, Z, ψ, θ₁, θ₂]`.
    pub fn tracking_error(&self) -> [f64; 6] {
        let actual = [self.q[0], self.q[1], self.q[2], self.q[5], self.q[6], self.q[7]];
        std::array::from_fn(|i| self.reference[i] - actual[i])
    }

    /// Largest of the three position errors (m).
    pub fn position_error(&self) -> f64 {
        let e = self.tracking_error();
        e[0].abs().max(e[1].abs()).max(e[2].abs())
    }

    fn values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(COLUMN_COUNT);
        v.push(self.t);
        v.extend_from_slice(&self.q);
        v.extend_from_slice(&self.qdot);
        v.extend_from_slice(&self.reference);
        v.push(self.phi_des);
        v.push(self.theta_des);
        v.extend_from_slice(&self.command);
        v.extend_from_slice(&self.rotor_speeds);
        v.extend_from_slice(&self.ee_actual);
        v.extend_from_slice(&self.ee_desired);
        v
    }

    fn from_values(v: &[f64], payload_attached: bool) -> Self {
        let take = |start: usize, out: &mut [f64]| out.copy_from_slice(&v[start..start + out.len()]);
        let mut f = TelemetryFrame { t: v[0], payload_attached, ..Default::default() };
        take(1, &mut f.q);
        take(9, &mut f.qdot);
        take(17, &mut f.reference);
        f.phi_des = v[23];
        f.theta_des = v[24];
        take(25, &mut f.command);
        take(31, &mut f.rotor_speeds);
        take(35, &mut f.ee_actual);
        take(41, &mut f.ee_desired);
        f
    }
}

/// Column names in file order.
pub fn column_names() -> Vec<String> {
    let mut c = vec!["t".to_string()];
    c.extend(Q_NAMES.iter().map(|n| n.to_string()));
    c.extend(Q_NAMES.iter().map(|n| format!("{n}_dot")));
    c.extend(REF_NAMES.iter().map(|n| format!("{n}_ref")));
    c.push("phi_des".into());
    c.push("theta_des".into());
    c.extend(COMMAND_NAMES.iter().map(|n| n.to_string()));
    c.extend((1..=4).map(|j| format!("omega{j}")));
    c.extend(EE_NAMES.iter().map(|n| n.to_string()));
    c.extend(EE_NAMES.iter().map(|n| format!("{n}_ref")));
    c.push("payload".into());
    c
}

pub fn write_csv<W: Write>(frames: &[TelemetryFrame], mut writer: W) -> Result<(), TelemetryError> {
    writeln!(writer, "{HEADER_COMMENT}")?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(column_names())?;
    let mut record: Vec<String> = Vec::with_capacity(COLUMN_COUNT);
    for f in frames {
        record.clear();
        record.extend(f.values().iter().map(|v| format!("{v}")));
        record.push(if f.payload_attached { "1" } else { "0" }.to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<TelemetryFrame>, TelemetryError> {
    let mut buffered = BufReader::new(reader);
    let mut first = String::new();
    if buffered.read_line(&mut first)? == 0 {
        return Err(TelemetryError::Empty);
    }
    if !first.starts_with('#') {
        return Err(TelemetryError::Header("missing `#` comment line".into()));
    }
    let mut rdr = csv::ReaderBuilder::new().from_reader(buffered);
    let names = column_names();
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(names.iter().map(String::as_str)) {
        return Err(TelemetryError::Header(headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut frames = Vec::new();
    let mut values = vec![0.0; COLUMN_COUNT - 1];
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let bad = |i: usize| TelemetryError::Value { line, column: names[i].clone(), value: record[i].to_string() };
        for (i, v) in values.iter_mut().enumerate() {
            *v = record[i].parse().map_err(|_| bad(i))?;
        }
        let flag = match &record[COLUMN_COUNT - 1] {
            "0" => false,
            "1" => true,
            _ => return Err(bad(COLUMN_COUNT - 1)),
        };
        frames.push(TelemetryFrame::from_values(&values, flag));
    }
    if frames.is_empty() {
        return Err(TelemetryError::Empty);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(t: f64) -> TelemetryFrame {
        TelemetryFrame {
            t,
            q: std::array::from_fn(|i| 0.1 * i as f64 + t / 3.0),
            qdot: std::array::from_fn(|i| -1e-17 * i as f64),
            reference: [1.0 / 3.0; 6],
            phi_des: -0.2,
            theta_des: 0.3490658503988659,
            command: [11.74257, 1e-300, -0.0, 0.5, 0.25, 0.125],
            rotor_speeds: [430.5, 420.1, 410.0, 400.0],
            ee_actual: [0.1; 6],
            ee_desired: [std::f64::consts::PI; 6],
            payload_attached: t > 0.5,
        }
    }

    #[test]
    fn column_layout() {
        let names = column_names();
        assert_eq!(names.len(), COLUMN_COUNT);
        assert_eq!(names[0], "t");
        assert_eq!(names[17], "x_ref");
        assert_eq!(names[25], "thrust");
        assert_eq!(names[31], "omega1");
        assert_eq!(names[35], "ee_x");
        assert_eq!(names[41], "ee_x_ref");
        assert_eq!(names[COLUMN_COUNT - 1], "payload");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let frames: Vec<_> = (0..20).map(|i| frame(i as f64 * 0.1)).collect();
        let mut buf = Vec::new();
        write_csv(&frames, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), frames.len());
        for (a, b) in back.iter().zip(&frames) {
            assert_eq!(a.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            assert_eq!(a.payload_attached, b.payload_attached);
        }
    }

    #[test]
    fn rejects_empty_and_malformed() {
        assert!(matches!(read_csv(&b""[..]), Err(TelemetryError::Empty)));
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert!(matches!(read_csv(buf.as_slice()), Err(TelemetryError::Empty)));
        let mut buf = Vec::new();
        write_csv(&[frame(0.0)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("0.1,", "zz,", 1);
        assert!(matches!(read_csv(text.as_bytes()), Err(TelemetryError::Value { .. })));
    }
}
