//! `tascl`: construct codes, measure BLER, evaluate and validate the TA-SCL model.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "TASCL_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "tascl",
    version,
    about = "Polar SC/SCL, adaptive SCL and the TA-SCL pipeline model"
)]
struct Cli {
    /// Flat `key = value` file supplying defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a polar code and write its code file.
    Construct(ConstructArgs),
    /// Monte Carlo BLER of SC, SCL or adaptive SCL.
    Bler(BlerArgs),
    /// Evaluate the Markov model: overflow probability and BLER bracket.
    Model(ModelArgs),
    /// Compare the model with a synthetic pipeline run.
    Validate(ValidateArgs),
    /// End-to-end TA-SCL simulation with real decoders.
    Tascl(TasclArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DecoderArg {
    Sc,
    Scl,
    Ascl,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelArg {
    MinSum,
    Exact,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SnrModeArg {
    Ebn0,
    Esn0,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    DropInProgress,
    DropNewest,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct ConstructArgs {
    /// Code length N (power of two).
    #[arg(long, value_parser = power_of_two)]
    n: usize,
    /// Information bits K, CRC included.
    #[arg(long)]
    k: usize,
    /// CRC width r.
    #[arg(long, default_value_t = 0)]
    r: usize,
    /// Design SNR in dB for the Bhattacharyya construction.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    design_snr: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ChannelArgs {
    /// Comma-separated SNR points in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr: String,
    #[arg(long, value_enum, default_value = "ebn0")]
    snr_mode: SnrModeArg,
}

#[derive(Debug, Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = 10_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads, 0 for all cores. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, value_enum, default_value = "min-sum")]
    kernel: KernelArg,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct BlerArgs {
    /// Code file written by `construct`.
    #[arg(long)]
    code: PathBuf,
    #[arg(long, value_enum, default_value = "scl")]
    decoder: DecoderArg,
    #[arg(long, default_value_t = 8)]
    list_size: usize,
    #[arg(long, default_value_t = 32)]
    l_max: usize,
    #[command(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Stop a point after this many block errors, 0 to disable.
    #[arg(long, default_value_t = 100)]
    min_errors: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct ModelArgs {
    #[arg(long)]
    beta: usize,
    #[arg(long)]
    zeta: usize,
    /// Comma-separated D_s block error rates.
    #[arg(long)]
    eps_s: String,
    /// D_l block error rate for the BLER bracket.
    #[arg(long, default_value_t = 0.0)]
    eps_l: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct ValidateArgs {
    #[arg(long)]
    beta: usize,
    #[arg(long)]
    zeta: usize,
    #[arg(long)]
    eps_s: f64,
    #[arg(long, default_value_t = 10_000_000)]
    slots: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "drop-in-progress")]
    overflow_policy: PolicyArg,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct TasclArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    beta: usize,
    #[arg(long)]
    zeta: usize,
    #[arg(long, default_value_t = 1)]
    l_small: usize,
    #[arg(long, default_value_t = 32)]
    l_large: usize,
    #[arg(long, value_enum, default_value = "drop-in-progress")]
    overflow_policy: PolicyArg,
    #[command(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-slot schedule CSV; one file per SNR point, suffixed when several.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn power_of_two(s: &str) -> Result<usize, String> {
    let n: usize = s
        .parse()
        .map_err(|_| format!("'{s}' is not a non-negative integer"))?;
    if n.is_power_of_two() {
        Ok(n)
    } else {
        Err(format!("{n} is not a power of two"))
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match config::expand(argv, &Cli::command()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(argv);
    let result = match cli.command {
        Command::Construct(a) => commands::construct(a),
        Command::Bler(a) => commands::bler(a),
        Command::Model(a) => commands::model(a),
        Command::Validate(a) => commands::validate(a),
        Command::Tascl(a) => commands::tascl(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
