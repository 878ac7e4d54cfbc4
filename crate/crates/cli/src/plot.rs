use crate::Failure;
use aeromanip::sim::{read_csv, TelemetryFrame};
use clap::{Args, ValueEnum};
use plotters::prelude::*;
use std::fs::File;
use std::path::{Path, PathBuf};

/// Plot tracked against desired signals from a telemetry file, one SVG per
/// channel group, with payload attach/detach times marked.
#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Telemetry CSV written by `simulate` (t in s, positions in m, angles in rad)
    telemetry: PathBuf,
    /// Output directory for the SVG files, created if missing
    #[arg(short, long, value_name = "DIR", default_value = ".")]
    output: PathBuf,
    /// Channel groups to plot, comma separated [default: all]
    #[arg(long, value_enum, value_delimiter = ',')]
    channels: Vec<Channel>,
    /// Plot width (px)
    #[arg(long, default_value_t = 1000)]
    width: u32,
    /// Height of each panel (px)
    #[arg(long, default_value_t = 240)]
    panel_height: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Channel {
    /// Vehicle X, Y, Z (m)
    Position,
    /// Vehicle roll, pitch, yaw (rad)
    Attitude,
    /// Arm joint angles (rad)
    Joints,
    /// Gripper position (m) and orientation (rad)
    EndEffector,
}

impl Channel {
    const ALL: [Channel; 4] = [Channel::Position, Channel::Attitude, Channel::Joints, Channel::EndEffector];

    fn file_tag(self) -> &'static str {
        match self {
            Channel::Position => "position",
            Channel::Attitude => "attitude",
            Channel::Joints => "joints",
            Channel::EndEffector => "end_effector",
        }
    }
}

/// One panel: label, unit and accessors for the actual and desired traces.
struct Panel {
    label: &'static str,
    unit: &'static str,
    actual: fn(&TelemetryFrame) -> f64,
    desired: fn(&TelemetryFrame) -> f64,
}

fn panels(channel: Channel) -> Vec<Panel> {
    let p = |label, unit, actual, desired| Panel { label, unit, actual, desired };
    match channel {
        Channel::Position => vec![
            p("X", "m", |f: &TelemetryFrame| f.q[0], |f: &TelemetryFrame| f.reference[0]),
            p("Y", "m", |f| f.q[1], |f| f.reference[1]),
            p("Z", "m", |f| f.q[2], |f| f.reference[2]),
        ],
        Channel::Attitude => vec![
            p("phi", "rad", |f: &TelemetryFrame| f.q[3], |f: &TelemetryFrame| f.phi_des),
            p("theta", "rad", |f| f.q[4], |f| f.theta_des),
            p("psi", "rad", |f| f.q[5], |f| f.reference[3]),
        ],
        Channel::Joints => vec![
            p("theta1", "rad", |f: &TelemetryFrame| f.q[6], |f: &TelemetryFrame| f.reference[4]),
            p("theta2", "rad", |f| f.q[7], |f| f.reference[5]),
        ],
        Channel::EndEffector => vec![
            p("ee_x", "m", |f: &TelemetryFrame| f.ee_actual[0], |f: &TelemetryFrame| f.ee_desired[0]),
            p("ee_y", "m", |f| f.ee_actual[1], |f| f.ee_desired[1]),
            p("ee_z", "m", |f| f.ee_actual[2], |f| f.ee_desired[2]),
            p("ee_phi", "rad", |f| f.ee_actual[3], |f| f.ee_desired[3]),
            p("ee_theta", "rad", |f| f.ee_actual[4], |f| f.ee_desired[4]),
            p("ee_psi", "rad", |f| f.ee_actual[5], |f| f.ee_desired[5]),
        ],
    }
}

/// Times at which the payload flag changes.
pub fn event_times(frames: &[TelemetryFrame]) -> Vec<f64> {
    frames.windows(2).filter(|w| w[0].payload_attached != w[1].payload_attached).map(|w| w[1].t).collect()
}

fn y_range(frames: &[TelemetryFrame], panel: &Panel) -> (f64, f64) {
    let (lo, hi) = frames
        .iter()
        .flat_map(|f| [(panel.actual)(f), (panel.desired)(f)])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let pad = ((hi - lo) * 0.08).max(1e-3);
    (lo - pad, hi + pad)
}

fn draw(frames: &[TelemetryFrame], channel: Channel, path: &Path, width: u32, panel_height: u32) -> Result<(), String> {
    let specs = panels(channel);
    let root = SVGBackend::new(path, (width, panel_height * specs.len() as u32)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let areas = root.split_evenly((specs.len(), 1));
    let t0 = frames.first().map(|f| f.t).unwrap_or(0.0);
    let t1 = frames.last().map(|f| f.t).unwrap_or(1.0).max(t0 + 1e-9);
    let events = event_times(frames);
    for (area, panel) in areas.iter().zip(&specs) {
        let (lo, hi) = y_range(frames, panel);
        let mut chart = ChartBuilder::on(area)
            .margin(8)
            .x_label_area_size(28)
            .y_label_area_size(60)
            .caption(format!("{} ({})", panel.label, panel.unit), ("sans-serif", 16))
            .build_cartesian_2d(t0..t1, lo..hi)
            .map_err(|e| e.to_string())?;
        chart.configure_mesh().x_desc("t (s)").y_desc(panel.unit).draw().map_err(|e| e.to_string())?;
        for &t in &events {
            chart
                .draw_series(LineSeries::new([(t, lo), (t, hi)], ShapeStyle::from(&BLACK.mix(0.5)).stroke_width(1)))
                .map_err(|e| e.to_string())?;
        }
        chart
            .draw_series(LineSeries::new(frames.iter().map(|f| (f.t, (panel.desired)(f))), RED.stroke_width(1)))
            .map_err(|e| e.to_string())?
            .label("desired")
            .legend(|(x, y)| PathElement::new([(x, y), (x + 16, y)], RED));
        chart
            .draw_series(LineSeries::new(frames.iter().map(|f| (f.t, (panel.actual)(f))), BLUE.stroke_width(1)))
            .map_err(|e| e.to_string())?
            .label("actual")
            .legend(|(x, y)| PathElement::new([(x, y), (x + 16, y)], BLUE));
        chart
            .configure_series_labels()
            .position(SeriesLabelPosition::UpperRight)
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(|e| e.to_string())?;
    }
    root.present().map_err(|e| e.to_string())
}

pub fn run(args: &PlotArgs) -> Result<(), Failure> {
    let file = File::open(&args.telemetry).map_err(|e| Failure::usage(format!("{}: {e}", args.telemetry.display())))?;
    let frames = read_csv(file).map_err(|e| Failure::usage(format!("{}: {e}", args.telemetry.display())))?;
    if args.width < 100 || args.panel_height < 60 {
        return Err(Failure::usage("plot is too small: need --width >= 100 and --panel-height >= 60"));
    }
    std::fs::create_dir_all(&args.output).map_err(|e| Failure::io(format!("{}: {e}", args.output.display())))?;
    let stem = args.telemetry.file_stem().and_then(|s| s.to_str()).unwrap_or("telemetry");
    let channels: &[Channel] = if args.channels.is_empty() { &Channel::ALL } else { &args.channels };
    for &channel in channels {
        let path = args.output.join(format!("{stem}_{}.svg", channel.file_tag()));
        draw(&frames, channel, &path, args.width, args.panel_height)
            .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        println!("{}", path.display());
    }
    Ok(())
}
