use crate::Failure;
use aeromanip::identification::{fit_rotor_coefficients, RotorSampleLog};
use clap::Args;
use std::fs::File;
use std::path::PathBuf;

/// Fit thrust and drag-moment coefficients to rotor bench logs.
///
/// Each log is a CSV with header `omega,thrust,drag_moment` in rad/s, N
/// and N·m. Logs are numbered as rotors 1, 2, ... in the order given.
#[derive(Debug, Args)]
pub struct FitArgs {
    /// Bench log files (CSV: omega rad/s, thrust N, drag_moment N·m)
    #[arg(required = true)]
    logs: Vec<PathBuf>,
}

pub fn run(args: &FitArgs) -> Result<(), Failure> {
    println!("{:<6}{:>16}{:>16}{:>14}{:>14}{:>9}", "rotor", "kf", "km", "rms_thrust", "rms_moment", "samples");
    for (i, path) in args.logs.iter().enumerate() {
        let file = File::open(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let log = RotorSampleLog::read_csv(i + 1, file).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let fit = fit_rotor_coefficients(&log).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        println!(
            "{:<6}{:>16.6e}{:>16.6e}{:>14.3e}{:>14.3e}{:>9}",
            fit.rotor, fit.kf, fit.km, fit.thrust_residual_rms, fit.moment_residual_rms, fit.samples
        );
    }
    println!("# kf in N·s²/rad², km in N·m·s²/rad², residuals in N and N·m");
    Ok(())
}
