//! Command-line front end for the hybrid-finger toolkit.
//!
//! Angles are degrees on the command line and in every file; the conversion
//! to radians happens in `commands` only. Exit codes: 0 success, 2 bad
//! configuration or input, 3 numerical failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hybrid_finger::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    /// Errors raised while loading and validating inputs.
    pub fn config(context: &str, err: impl std::fmt::Display) -> Self {
        CliError::Config(format!("{context}: {err}"))
    }
}

impl From<ModelError> for CliError {
    fn from(err: ModelError) -> Self {
        match err {
            ModelError::InvalidParameter { .. }
            | ModelError::OutOfWorkspace(_)
            | ModelError::DimensionMismatch { .. } => CliError::Config(err.to_string()),
            _ => CliError::Numerical(err.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hybrid-finger",
    version,
    about = "Kinematics, stiffness and simulation toolkit for a hybrid hydraulic-pneumatic finger"
)]
struct Cli {
    /// Geometry JSON; the bundled reference geometry is used when omitted.
    #[arg(long, global = true)]
    geometry: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Joint {
    Theta1,
    Theta2,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalized manipulability over the joint-limit box.
    Sweep {
        #[arg(long, default_value_t = 41)]
        n1: usize,
        #[arg(long, default_value_t = 41)]
        n2: usize,
    },
    /// Actuator-space trace with one dual joint held fixed.
    Contour {
        #[arg(long, value_enum)]
        fixed: Joint,
        /// Fixed joint angle, degrees.
        #[arg(long, allow_negative_numbers = true)]
        value_deg: f64,
        #[arg(long, default_value_t = 41)]
        samples: usize,
    },
    /// Stiffness and compliance matrices plus the hydraulic force curve.
    Compliance {
        /// Chamber JSON; the bundled reference chamber is used when omitted.
        #[arg(long)]
        chamber: Option<PathBuf>,
        /// Joint pose, degrees.
        #[arg(long, num_args = 3, value_names = ["T1", "T2", "T3"], allow_negative_numbers = true, default_values_t = [0.0, 0.0, 0.0])]
        q_deg: Vec<f64>,
        /// Hydraulic compliance, mm/N; defaults to the inverse rest slope of the force curve.
        #[arg(long)]
        c_h: Option<f64>,
        /// Effective area, mm²; defaults to the chamber's minor cross-section.
        #[arg(long)]
        a_eff: Option<f64>,
        #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
        dy_min: f64,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        dy_max: f64,
        #[arg(long, default_value_t = 0.5)]
        dy_step: f64,
    },
    /// Isothermal gas pressure, force and tangent stiffness over a length range.
    PneumaticCurve {
        /// Pneumatic model JSON; the bundled reference model is used when omitted.
        #[arg(long)]
        pneumatic: Option<PathBuf>,
        #[arg(long, default_value_t = -20.0, allow_negative_numbers = true)]
        l_min: f64,
        #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
        l_max: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Affine piston-to-length regression for a measured or synthetic dataset.
    Calibrate {
        /// Dataset CSV with header Q1_mm,Q2_mm,Q3_mm,theta1_deg,theta2_deg,theta3_deg.
        #[arg(
            long,
            conflicts_with = "synthetic",
            required_unless_present = "synthetic"
        )]
        csv: Option<PathBuf>,
        /// Generate this many synthetic samples instead of reading a file.
        #[arg(long)]
        synthetic: Option<usize>,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Angle noise of the synthetic protocol, degrees.
        #[arg(long, default_value_t = 0.3)]
        noise_deg: f64,
    },
    /// Compliant joint-motion simulation of a scripted scenario.
    Simulate {
        /// Scenario JSON; the bundled grasp-and-release script is used when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Simulation parameter JSON; built-in defaults when omitted.
        #[arg(long)]
        params: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = commands::Context::new(cli.geometry.as_deref(), &cli.out)?;
    match cli.command {
        Command::Sweep { n1, n2 } => commands::sweep(&ctx, n1, n2),
        Command::Contour {
            fixed,
            value_deg,
            samples,
        } => commands::contour(&ctx, fixed, value_deg, samples),
        Command::Compliance {
            chamber,
            q_deg,
            c_h,
            a_eff,
            dy_min,
            dy_max,
            dy_step,
        } => commands::compliance(
            &ctx,
            &commands::ComplianceArgs {
                chamber,
                q_deg: [q_deg[0], q_deg[1], q_deg[2]],
                c_h,
                a_eff,
                dy_range: (dy_min, dy_max, dy_step),
            },
        ),
        Command::PneumaticCurve {
            pneumatic,
            l_min,
            l_max,
            points,
        } => commands::pneumatic_curve(&ctx, pneumatic.as_deref(), l_min, l_max, points),
        Command::Calibrate {
            csv,
            synthetic,
            seed,
            noise_deg,
        } => commands::calibrate(&ctx, csv.as_deref(), synthetic, seed, noise_deg),
        Command::Simulate { scenario, params } => {
            commands::simulate(&ctx, scenario.as_deref(), params.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
