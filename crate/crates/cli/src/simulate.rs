use crate::{Failure, EXIT_DIVERGED, EXIT_IO, EXIT_KINEMATICS, EXIT_USAGE};
use aeromanip::sim::{run_scenario, write_csv, RunOutput, Scenario, SimError};
use clap::Args;
use rayon::prelude::*;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

/// Run scenario files and write telemetry (CSV) and a summary for each.
///
/// For a scenario `name.json` the outputs are `name.csv` and
/// `name.summary.txt` (key = value lines); the summary table is echoed to
/// standard output.
#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file (JSON, SI units)
    #[arg(required_unless_present = "batch", conflicts_with = "batch")]
    scenario: Option<PathBuf>,
    /// Run every *.json scenario in this directory, in parallel
    #[arg(long, value_name = "DIR")]
    batch: Option<PathBuf>,
    /// Output directory, created if missing
    #[arg(short, long, value_name = "DIR", default_value = ".")]
    output: PathBuf,
    /// Override the control period and integration step (s)
    #[arg(long)]
    dt: Option<f64>,
    /// Override the simulated time (s)
    #[arg(long)]
    duration: Option<f64>,
    /// Override the measurement-noise seed (integer)
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of RK4 substeps per control period (count)
    #[arg(long)]
    substeps: Option<usize>,
    /// Override the telemetry decimation: log every n-th step (count)
    #[arg(long)]
    decimation: Option<usize>,
}

fn sim_failure(e: &SimError) -> Failure {
    let code = match e {
        SimError::Ik { .. } => EXIT_KINEMATICS,
        SimError::Diverged { .. } => EXIT_DIVERGED,
        SimError::Telemetry(_) => EXIT_IO,
        _ => EXIT_USAGE,
    };
    Failure::new(code, e.to_string())
}

impl SimulateArgs {
    fn apply_overrides(&self, s: &mut Scenario) {
        if let Some(dt) = self.dt {
            s.dt = dt;
        }
        if let Some(d) = self.duration {
            s.duration = d;
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(n) = self.substeps {
            s.integrator_substeps = n;
        }
        if let Some(n) = self.decimation {
            s.telemetry_decimation = n;
        }
    }
}

fn write_outputs(out: &RunOutput, dir: &Path, stem: &str) -> Result<(), Failure> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let file = File::create(&csv_path).map_err(|e| Failure::io(format!("{}: {e}", csv_path.display())))?;
    write_csv(&out.telemetry, BufWriter::new(file)).map_err(|e| Failure::io(format!("{}: {e}", csv_path.display())))?;
    let summary_path = dir.join(format!("{stem}.summary.txt"));
    fs::write(&summary_path, out.summary.to_key_value())
        .map_err(|e| Failure::io(format!("{}: {e}", summary_path.display())))?;
    Ok(())
}

/// Loads, runs and writes one scenario. Returns the table to echo.
fn run_one(args: &SimulateArgs, path: &Path) -> Result<String, Failure> {
    let mut scenario = Scenario::load(path).map_err(|e| sim_failure(&e))?;
    args.apply_overrides(&mut scenario);
    scenario.validate().map_err(|e| sim_failure(&e))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string();
    match run_scenario(&scenario) {
        Ok(out) => {
            write_outputs(&out, &args.output, &stem)?;
            Ok(out.summary.to_table())
        }
        Err(SimError::Diverged { time, reason, partial }) => {
            if let Some(out) = partial {
                write_outputs(&out, &args.output, &stem)?;
                print!("{}", out.summary.to_table());
            }
            Err(Failure::new(EXIT_DIVERGED, format!("{}: diverged at t = {time} s: {reason}", path.display())))
        }
        Err(e) => Err(sim_failure(&e)),
    }
}

fn scenarios_in(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::usage(format!("{}: no *.json scenarios", dir.display())));
    }
    Ok(paths)
}

pub fn run(args: &SimulateArgs) -> Result<(), Failure> {
    fs::create_dir_all(&args.output).map_err(|e| Failure::io(format!("{}: {e}", args.output.display())))?;
    let Some(dir) = &args.batch else {
        let path = args.scenario.as_ref().expect("clap requires a scenario without --batch");
        print!("{}", run_one(args, path)?);
        return Ok(());
    };
    let paths = scenarios_in(dir)?;
    let results: Vec<_> = paths.par_iter().map(|p| run_one(args, p)).collect();
    let mut worst: Option<Failure> = None;
    for (path, result) in paths.iter().zip(results) {
        match result {
            Ok(table) => {
                println!("== {}", path.display());
                print!("{table}");
            }
            Err(f) => {
                eprintln!("error: {}: {}", path.display(), f.message);
                if worst.as_ref().is_none_or(|w| f.code > w.code) {
                    worst = Some(f);
                }
            }
        }
    }
    match worst {
        None => Ok(()),
        Some(f) => Err(Failure::new(f.code, "one or more scenarios failed")),
    }
}
