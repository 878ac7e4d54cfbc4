mod fit;
mod kinematics;
mod plot;
mod simulate;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

/// Simulator and toolbox for a quadrotor carrying a two-link arm.
///
/// Exit codes: 0 success, 1 I/O failure, 2 usage or parse error,
/// 3 inverse-kinematics error, 4 simulation diverged.
#[derive(Debug, Parser)]
#[command(name = "aeromanip", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    Fk(kinematics::FkArgs),
    Ik(kinematics::IkArgs),
    Simulate(simulate::SimulateArgs),
    Fit(fit::FitArgs),
    Plot(plot::PlotArgs),
}

/// A failed command: message for stderr and the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_IO: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_KINEMATICS: u8 = 3;
pub const EXIT_DIVERGED: u8 = 4;

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new(EXIT_IO, message)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Fk(a) => kinematics::fk(&a),
        Command::Ik(a) => kinematics::ik(&a),
        Command::Simulate(a) => simulate::run(&a),
        Command::Fit(a) => fit::run(&a),
        Command::Plot(a) => plot::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
