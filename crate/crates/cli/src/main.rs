use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use keyrate_cli::commands;
use keyrate_core::FormulaVariant;

/// Secure-key-rate calculator for BB84 sources over fiber and free-space
/// links.
#[derive(Parser)]
#[command(name = "keyrate", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize the secure gain over pump power at one distance.
    Optimize {
        #[arg(long, value_name = "PATH")]
        scenario: PathBuf,
        /// Channel distance in km.
        #[arg(long, value_name = "KM")]
        distance: f64,
        /// Override the scenario's formula variant.
        #[arg(long, value_name = "VARIANT")]
        variant: Option<FormulaVariantArg>,
    },
    /// Optimize over a log-spaced distance grid and write a CSV.
    Sweep {
        #[arg(long, value_name = "PATH")]
        scenario: PathBuf,
        #[arg(long, value_name = "KM")]
        from: f64,
        #[arg(long, value_name = "KM")]
        to: f64,
        #[arg(long, value_name = "N")]
        points: usize,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long, value_name = "VARIANT")]
        variant: Option<FormulaVariantArg>,
    },
    /// Largest distance whose optimized gain still exceeds a threshold.
    Cutoff {
        #[arg(long, value_name = "PATH")]
        scenario: PathBuf,
        #[arg(long, value_name = "KM")]
        from: f64,
        #[arg(long, value_name = "KM")]
        to: f64,
        /// Gain threshold defining "secure".
        #[arg(long, value_name = "G", default_value_t = keyrate_core::GAIN_FLOOR)]
        g_min: f64,
        #[arg(long, value_name = "VARIANT")]
        variant: Option<FormulaVariantArg>,
    },
    /// Simulate pulses and compare empirical rates with the analytic model.
    Montecarlo {
        #[arg(long, value_name = "PATH")]
        scenario: PathBuf,
        #[arg(long, value_name = "KM")]
        distance: f64,
        /// Pump parameter (mean photon/pair number).
        #[arg(long, value_name = "X")]
        mu: f64,
        #[arg(long, value_name = "N")]
        pulses: u64,
        #[arg(long, value_name = "N", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "VARIANT")]
        variant: Option<FormulaVariantArg>,
    },
}

/// Clap-friendly wrapper for the formula variant names.
#[derive(Clone, Copy)]
struct FormulaVariantArg(FormulaVariant);

impl std::str::FromStr for FormulaVariantArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(FormulaVariantArg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Optimize { scenario, distance, variant } => {
            commands::cmd_optimize(&scenario, distance, variant.map(|v| v.0)).map(Some)
        }
        Command::Sweep { scenario, from, to, points, out, variant } => {
            commands::cmd_sweep(&scenario, from, to, points, &out, variant.map(|v| v.0)).map(|()| None)
        }
        Command::Cutoff { scenario, from, to, g_min, variant } => {
            commands::cmd_cutoff(&scenario, from, to, g_min, variant.map(|v| v.0)).map(Some)
        }
        Command::Montecarlo { scenario, distance, mu, pulses, seed, variant } => {
            commands::cmd_montecarlo(&scenario, distance, mu, pulses, seed, variant.map(|v| v.0))
                .map(Some)
        }
    };
    match result {
        Ok(Some(output)) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
