//! `s17`: simulate, decode and analyse Surface-17 memory experiments.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use surface17::experiment::{FirstRound, InitialState, RejectionMode};

/// Environment variable that relocates relative output paths.
pub const OUTPUT_DIR_ENV: &str = "S17_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "s17", version, about = "Surface-17 memory experiment simulator, decoder and analysis")]
struct Cli {
    /// Maximum number of worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate shots of a memory experiment and write them as JSON lines.
    Simulate(SimulateArgs),
    /// Learn edge probabilities from simulated or recorded shots.
    Weights(WeightsArgs),
    /// Decode shots with learned weights.
    Decode(DecodeArgs),
    /// Fit logical decay, retention and scaling from decoded points.
    Analyze(AnalyzeArgs),
    /// Logical-state fidelity from simulated tomography of |0>_L.
    Fidelity(FidelityArgs),
    /// Calibration analyses on synthetic or recorded data.
    #[command(subcommand)]
    Calibrate(CalibrateCommand),
    /// Check a CZ schedule for hook errors along the logical operators.
    ValidateSchedule(ValidateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Rejection {
    None,
    DataOnly,
    AuxOnly,
    Both,
}

impl From<Rejection> for RejectionMode {
    fn from(r: Rejection) -> Self {
        match r {
            Rejection::None => RejectionMode::None,
            Rejection::DataOnly => RejectionMode::DataOnly,
            Rejection::AuxOnly => RejectionMode::AuxOnly,
            Rejection::Both => RejectionMode::Both,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum First {
    Frame,
    Discard,
}

impl From<First> for FirstRound {
    fn from(f: First) -> Self {
        match f {
            First::Frame => FirstRound::Frame,
            First::Discard => FirstRound::Discard,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct Filtering {
    /// Leakage rejection applied before analysis.
    #[arg(long, value_enum, default_value = "both")]
    rejection: Rejection,
    /// Treatment of the first opposite-basis stabilizer round.
    #[arg(long, value_enum, default_value = "frame")]
    first_round: First,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Device parameter file (TOML); defaults to the bundled device table.
    #[arg(long)]
    device: Option<PathBuf>,
    /// Initial logical state: 0L, 1L, +L or -L.
    #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
    state: InitialState,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    cycles: u32,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    #[arg(long)]
    seed: u64,
    /// Output JSON-lines file.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    filter: Filtering,
}

#[derive(Args, Debug)]
struct WeightsArgs {
    /// Shot records (JSON lines).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Longest path, in edges, summed into a weight.
    #[arg(long, default_value_t = surface17::decoder::DEFAULT_PATH_CAP)]
    cap: usize,
    #[command(flatten)]
    filter: Filtering,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Weights written by `s17 weights`.
    #[arg(long)]
    weights: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    filter: Filtering,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Decoded points written by `s17 decode`.
    #[arg(long, num_args = 1.., conflicts_with = "simulate")]
    points: Vec<PathBuf>,
    /// Simulate, train and decode every point instead of reading files.
    #[arg(long)]
    simulate: bool,
    #[arg(long)]
    device: Option<PathBuf>,
    /// Replace every qubit by the device average.
    #[arg(long)]
    uniform: bool,
    #[arg(long, value_delimiter = ',', value_parser = parse_state, allow_hyphen_values = true, default_value = "0L,1L,+L,-L")]
    states: Vec<InitialState>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    cycles: Vec<u32>,
    #[arg(long, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Improvement factors for the scaling study.
    #[arg(long, value_delimiter = ',')]
    scaling: Vec<f64>,
    /// Cycle duration in microseconds when reading points.
    #[arg(long, default_value_t = 1.1)]
    cycle_us: f64,
    /// Directory for memory.csv, summary.json and the scaling tables.
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    filter: Filtering,
    #[arg(long, default_value_t = surface17::decoder::DEFAULT_PATH_CAP)]
    cap: usize,
}

#[derive(Args, Debug)]
struct FidelityArgs {
    #[arg(long)]
    device: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    #[arg(long)]
    seed: u64,
    /// Number of random correctable subspaces averaged.
    #[arg(long, default_value_t = 100)]
    subspaces: usize,
    /// Add data readout errors from the device table and mitigate them.
    #[arg(long)]
    readout_mitigation: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum CalibrateCommand {
    /// Three-level readout classification with a Gaussian mixture.
    Gmm(GmmArgs),
    /// Flux-crosstalk compensation.
    Flux(FluxArgs),
    /// Drive-crosstalk suppression ratio.
    Drive(DriveArgs),
    /// Phase-flip probability from measurement-induced dephasing.
    Dephasing(DephasingArgs),
}

#[derive(Args, Debug)]
struct GmmArgs {
    /// Labelled IQ batch (JSON).
    #[arg(long, required_unless_present = "planted")]
    input: Option<PathBuf>,
    /// Planted mixture (JSON) to synthesise a batch from.
    #[arg(long, conflicts_with = "input")]
    planted: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    per_level: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Assign with equal priors instead of fitted weights.
    #[arg(long)]
    equal_priors: bool,
    /// Also write the synthesised batch.
    #[arg(long)]
    save_batch: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FluxArgs {
    /// Crosstalk matrix (CSV, row j holds dPhi_j/dV_i).
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Size of a planted matrix when no file is given.
    #[arg(long, default_value_t = 17)]
    size: usize,
    /// Off-diagonal magnitude of a planted matrix.
    #[arg(long, default_value_t = 1e-3)]
    planted_off: f64,
    /// Target fluxes, comma separated.
    #[arg(long, value_delimiter = ',')]
    target: Vec<f64>,
    /// Measurement noise per matrix element.
    #[arg(long, default_value_t = 1e-5)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DriveArgs {
    #[arg(long)]
    target_amplitude: f64,
    #[arg(long)]
    cross_amplitude: f64,
}

#[derive(Args, Debug)]
struct DephasingArgs {
    /// Dephasing rate in 1/us.
    #[arg(long)]
    gamma: f64,
    /// Readout duration in ns.
    #[arg(long)]
    tau: f64,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Schedule table, one `step: AUX-DATA ...` line per step; defaults to
    /// the default schedule.
    #[arg(long)]
    schedule: Option<PathBuf>,
}

fn parse_state(s: &str) -> Result<InitialState, String> {
    s.parse().map_err(|e: surface17::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .parse_default_env()
        .init();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<commands::Usage>() { 1 } else { 2 })
        }
    }
}
