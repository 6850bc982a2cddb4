//! Command-line front end for the receiver simulator.
//!
//! Exit codes: 0 when the command ran (including runs that do not lock),
//! 1 for runtime failures such as I/O or decode errors, 2 for usage and
//! configuration errors, 3 for internal invariant violations.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(aiot_rx::Error),
    Invariant(String),
}

impl From<aiot_rx::Error> for CliError {
    fn from(e: aiot_rx::Error) -> Self {
        match e {
            aiot_rx::Error::InvalidParameter { .. } | aiot_rx::Error::SampleRateTooLow { .. } => {
                CliError::Usage(e.to_string())
            }
            aiot_rx::Error::Invariant(m) => CliError::Invariant(m),
            other => CliError::Run(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Run(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(e) => write!(f, "{e}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "aiot-rx", version, about = "Ambient-IoT receiver simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Scenario file (TOML). Flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Data output file. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List admissible IFs for a channel bandwidth.
    PlanIf {
        #[arg(long, default_value_t = 180e3)]
        cbw: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the LO calibration loop on an unmodulated carrier.
    SimLoop {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        offset_ppm: Option<f64>,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        power: Option<f64>,
    },
    /// Link-budget sensitivity in dBm.
    Sensitivity {
        #[arg(long, default_value_t = 180e3)]
        bw: f64,
        #[arg(long, default_value_t = 15.0, allow_hyphen_values = true)]
        snr: f64,
        #[arg(long, default_value_t = 12.0, allow_hyphen_values = true)]
        nf: f64,
        #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
        margin: f64,
    },
    /// Monte-Carlo BER against input power.
    SweepBer {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        pmin: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        pmax: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Payload bits per trial.
        #[arg(long)]
        bits: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        offset_ppm: Option<f64>,
    },
    /// Receive one frame and print the link report.
    Receive {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        power: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        offset_ppm: Option<f64>,
        #[arg(long)]
        bits: Option<usize>,
    },
    /// Front-end selectivity over a grid of offsets.
    Response {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = -40e6, allow_hyphen_values = true)]
        fmin: f64,
        #[arg(long, default_value_t = 40e6, allow_hyphen_values = true)]
        fmax: f64,
        #[arg(long, default_value_t = 801)]
        points: usize,
    },
    /// Encode or decode a line code between text files of 0/1 characters.
    Codec(commands::CodecArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::PlanIf { cbw, format } => commands::plan_if(cbw, format),
        Command::SimLoop {
            common,
            offset_ppm,
            duration,
            power,
        } => commands::sim_loop(&common, offset_ppm, duration, power),
        Command::Sensitivity {
            bw,
            snr,
            nf,
            margin,
        } => commands::sensitivity(bw, snr, nf, margin),
        Command::SweepBer {
            common,
            pmin,
            pmax,
            step,
            trials,
            bits,
            offset_ppm,
        } => commands::sweep_ber(
            &common,
            commands::SweepFlags {
                pmin,
                pmax,
                step,
                trials,
                bits,
                offset_ppm,
            },
        ),
        Command::Receive {
            common,
            power,
            offset_ppm,
            bits,
        } => commands::receive(&common, power, offset_ppm, bits),
        Command::Response {
            common,
            fmin,
            fmax,
            points,
        } => commands::response(&common, fmin, fmax, points),
        Command::Codec(args) => commands::codec(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aiot-rx: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
