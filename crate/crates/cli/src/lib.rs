//! `snnsim` command-line front end.
//!
//! Exit codes: 0 ok, 1 I/O or usage, 2 netlist parse errors, 3 timestep too
//! coarse, 4 infeasible device or waveform.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use snnsim_core::error::SimError;
use snnsim_core::netlist::{parse_si, ParseError};

mod check;
mod output;
mod run;
mod sweep;

pub use output::write_atomic;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{} parse error(s)", .errors.len())]
    Parse { path: String, errors: Vec<ParseError> },
    #[error("{0}")]
    Resolution(String),
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse { .. } => 2,
            CliError::Resolution(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }

    fn report(&self, err: &mut dyn Write) {
        match self {
            CliError::Parse { path, errors } => {
                for e in errors {
                    let _ = writeln!(err, "{path}:{e}");
                }
            }
            other => {
                let _ = writeln!(err, "error: {other}");
            }
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Resolution { .. } => CliError::Resolution(e.to_string()),
            SimError::InfeasibleShape(_) => CliError::Infeasible(e.to_string()),
            other => CliError::Io(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Number argument with optional SI suffix (`10n`, `1M`, `140m`).
pub fn si_arg(s: &str) -> Result<f64, String> {
    parse_si(s).ok_or_else(|| format!("not a number: {s}"))
}

#[derive(Debug, Parser)]
#[command(name = "snnsim", version, about = "Memristive spiking network simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a netlist and write traces and a summary.
    Run(RunArgs),
    /// Sweep the STDP window of a spike pair.
    StdpSweep(StdpArgs),
    /// Analytic load, efficiency and power versus fanout.
    PowerSweep(PowerArgs),
    /// Device and waveform feasibility checks.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub netlist: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Reseeds Poisson stimuli: the k-th one in name order gets seed + k.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the netlist timestep.
    #[arg(long, value_parser = si_arg)]
    pub dt: Option<f64>,
}

/// Device and waveform parameters; unset values fall back to the reference set.
#[derive(Debug, Args, Clone)]
pub struct DeviceWaveformArgs {
    #[arg(long, value_parser = si_arg)]
    pub vp: Option<f64>,
    #[arg(long, value_parser = si_arg)]
    pub vn: Option<f64>,
    #[arg(long, value_parser = si_arg)]
    pub r_on: Option<f64>,
    #[arg(long, value_parser = si_arg)]
    pub r_off: Option<f64>,
    #[arg(long, value_parser = si_arg)]
    pub kappa_p: Option<f64>,
    #[arg(long, value_parser = si_arg)]
    pub kappa_n: Option<f64>,
    #[arg(long, value_parser = si_arg)]
    pub va_plus: Option<f64>,
    #[arg(long, value_parser = si_arg)]
    pub va_minus: Option<f64>,
    #[arg(long, value_parser = si_arg)]
    pub tail_plus: Option<f64>,
    #[arg(long, value_parser = si_arg)]
    pub tail_minus: Option<f64>,
    #[arg(long, value_parser = si_arg)]
    pub tau_minus: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StdpArgs {
    /// Take device and waveform from a netlist instead of flags.
    #[arg(long, conflicts_with_all = ["vp", "vn", "r_on", "r_off", "kappa_p", "kappa_n", "va_plus", "va_minus", "tail_plus", "tail_minus", "tau_minus"])]
    pub netlist: Option<PathBuf>,
    #[command(flatten)]
    pub params: DeviceWaveformArgs,
    /// `start:stop:step`, e.g. `-4u:4u:0.1u`.
    #[arg(long, default_value = "-4u:4u:0.1u", allow_hyphen_values = true)]
    pub range: String,
    #[arg(long, value_parser = si_arg)]
    pub dt: Option<f64>,
    /// CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Accepted for interface uniformity; the sweep is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Comma-separated synapse counts.
    #[arg(long, value_delimiter = ',', default_value = "1,784,10000")]
    pub fanout: Vec<u64>,
    /// Resistance of every synapse.
    #[arg(long, value_parser = si_arg, default_value = "1M")]
    pub r: f64,
    #[arg(long, value_parser = si_arg, default_value = "140m")]
    pub va_plus: f64,
    #[arg(long, value_parser = si_arg, default_value = "13u")]
    pub i_base: f64,
    #[arg(long, value_parser = si_arg, default_value = "56u")]
    pub i_drive: f64,
    #[arg(long, value_parser = si_arg, default_value = "1.8")]
    pub vdd: f64,
    /// Driver current used for eta; defaults to the drive current.
    #[arg(long, value_parser = si_arg)]
    pub i_ifn: Option<f64>,
    /// CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_parser = si_arg, allow_hyphen_values = true)]
    pub vp: f64,
    #[arg(long, value_parser = si_arg, allow_hyphen_values = true)]
    pub vn: f64,
    #[arg(long, value_parser = si_arg, requires = "va_minus")]
    pub va_plus: Option<f64>,
    #[arg(long, value_parser = si_arg, requires = "va_plus")]
    pub va_minus: Option<f64>,
}

/// Applies `SNNSIM_THREADS` (0 or unset: one thread per core).
fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("SNNSIM_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Io(format!("SNNSIM_THREADS must be a non-negative integer, got {raw:?}")))?;
    if n > 0 {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs the CLI against explicit streams and returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Run(a) => run::cmd_run(a, out, err),
        Command::StdpSweep(a) => sweep::cmd_stdp_sweep(a, out, err),
        Command::PowerSweep(a) => sweep::cmd_power_sweep(a, out, err),
        Command::Check(a) => check::cmd_check(a, out),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            e.report(err);
            e.exit_code()
        }
    }
}
