//! Command-line interface.

mod args;
mod commands;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{ArgMatches, Args, Command, CommandFactory, FromArgMatches, Parser, Subcommand};
use dmcp::DmcpError;
use serde_json::Value;

use args::{parse_angle, parse_samples, MetricArg, ModeArg, OutputArgs, Samples, SequenceArgs};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_DATA: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: message.into() }
    }

    pub fn convergence(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONVERGENCE, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<DmcpError> for CliError {
    fn from(e: DmcpError) -> Self {
        let code = match e {
            DmcpError::InvalidInput(_) | DmcpError::DimensionMismatch { .. } => EXIT_USAGE,
            DmcpError::NoConvergence { .. } => EXIT_CONVERGENCE,
            DmcpError::DegenerateInput(_)
            | DmcpError::OutOfRange { .. }
            | DmcpError::NotSpecialUnitary(_)
            | DmcpError::Calibration(_) => EXIT_DATA,
        };
        Self { code, message: e.to_string() }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "dmcp",
    version,
    about = "Detuning-modulated composite pulses: derive, verify, scan and map to waveguides"
)]
pub struct Cli {
    /// JSON file of option values; flags given on the command line win
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads for grid scans (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// RNG seed for random states and solver restarts
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Commands,
}

#[derive(Subcommand, Debug)]
pub enum Commands {
    /// Solve for a universal sequence and verify it
    Derive(DeriveArgs),
    /// Check that a sequence realizes its target rotation
    Verify(VerifyArgs),
    /// List the built-in sequence tables
    Tables(TablesArgs),
    /// Fidelity scans over error parameters
    #[command(subcommand)]
    Scan(ScanCommand),
    /// Run a sequence on an n-level ladder
    Nlevel(NlevelArgs),
    /// Map a sequence onto a waveguide coupler and propagate light
    Waveguide(WaveguideArgs),
}

#[derive(Args, Debug)]
pub struct DeriveArgs {
    /// Target rotation angle (pi, pi/2, radians)
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta: f64,
    /// Total number of pieces (even, ≥ 4)
    #[arg(long)]
    pub n: usize,
    /// Number of nullified derivatives (1 or 2)
    #[arg(long, default_value_t = 1)]
    pub order: u8,
    /// Starting ratios for the first half of the sequence
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "R1,R2,..")]
    pub init: Option<Vec<f64>>,
    /// Random restarts tried when no starting point is given or it fails
    #[arg(long, default_value_t = 200)]
    pub restarts: usize,
    /// Gate-distance tolerance for verification
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub sequence: SequenceArgs,
    /// Check every built-in table
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct TablesArgs {
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Subcommand, Debug)]
pub enum ScanCommand {
    /// Fidelity versus pulse-area error for several initial states
    Area(AreaArgs),
    /// Fidelity over coupling and detuning errors
    Grid2d(GridArgs),
    /// Infidelity versus upper-level decay rate
    Decoherence(DecoherenceArgs),
    /// Largest area error keeping the infidelity under a threshold
    Radius(RadiusArgs),
}

#[derive(Args, Debug)]
pub struct AreaArgs {
    #[command(flatten)]
    pub sequence: SequenceArgs,
    /// Area errors as start:stop:step or a list
    #[arg(long, value_parser = parse_samples, default_value = "-0.3:0.3:0.001", allow_hyphen_values = true)]
    pub eps: Samples,
    /// Initial states: reference, ground, or haar:K
    #[arg(long, default_value = "reference")]
    pub states: String,
    #[arg(long, value_enum, default_value = "state")]
    pub metric: MetricArg,
    /// Number of levels (lifts the sequence when above 2)
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    #[command(flatten)]
    pub sequence: SequenceArgs,
    /// Half-width of both error axes
    #[arg(long, default_value_t = 1.0)]
    pub range: f64,
    /// Samples per axis
    #[arg(long, default_value_t = 201)]
    pub steps: usize,
    /// Detuning errors relative to each detuning or in units of the coupling
    #[arg(long, value_enum, default_value = "relative")]
    pub detuning_mode: ModeArg,
    /// Initial state amplitudes (real), comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,0")]
    pub state: Vec<f64>,
    #[arg(long, value_enum, default_value = "state")]
    pub metric: MetricArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct DecoherenceArgs {
    #[command(flatten)]
    pub sequence: SequenceArgs,
    /// Decay rates in units of the coupling
    #[arg(long, value_parser = parse_samples, default_value = "0:0.2:0.005")]
    pub gamma: Samples,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,0")]
    pub state: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct RadiusArgs {
    #[command(flatten)]
    pub sequence: SequenceArgs,
    #[arg(long, default_value_t = 1e-4)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value = "state")]
    pub metric: MetricArg,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub state: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct NlevelArgs {
    /// Number of levels
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub sequence: SequenceArgs,
    /// Emit populations versus time instead of an area scan
    #[arg(long)]
    pub populations: bool,
    /// Samples per segment for --populations
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    /// Initial level for --populations
    #[arg(long, default_value_t = 0)]
    pub initial_level: usize,
    #[arg(long, value_parser = parse_samples, default_value = "-0.3:0.3:0.005", allow_hyphen_values = true)]
    pub eps: Samples,
    #[arg(long, value_enum, default_value = "state")]
    pub metric: MetricArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct WaveguideArgs {
    #[command(flatten)]
    pub sequence: SequenceArgs,
    /// Coupling calibration CSV (g_um,omega_rad_per_um); bundled synthetic data if omitted
    #[arg(long, value_name = "PATH")]
    pub coupling_cal: Option<PathBuf>,
    /// Propagation-constant calibration CSV (w_um,beta_rad_per_um); bundled synthetic data if omitted
    #[arg(long, value_name = "PATH")]
    pub beta_cal: Option<PathBuf>,
    /// Gap between the guides (µm)
    #[arg(long, default_value_t = 0.2)]
    pub gap: f64,
    /// Base waveguide width (µm)
    #[arg(long, default_value_t = 0.45)]
    pub w0: f64,
    /// Input amplitudes of the two guides
    #[arg(long, value_delimiter = ',', default_value = "1,0")]
    pub input: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    /// Also write the layout JSON here
    #[arg(long, value_name = "PATH")]
    pub layout_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn allow_repeats(cmd: Command) -> Command {
    cmd.args_override_self(true).mut_subcommands(allow_repeats)
}

fn subcommand_path(m: &ArgMatches) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = m;
    while let Some((name, sub)) = cur.subcommand() {
        out.push(name.to_string());
        cur = sub;
    }
    out
}

fn config_tokens(path: &PathBuf) -> Result<Vec<OsString>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: invalid JSON: {e}", path.display())))?;
    let Value::Object(map) = doc else {
        return Err(CliError::data(format!("{}: expected a JSON object of options", path.display())));
    };
    let scalar = |v: &Value| match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(CliError::usage(format!("unsupported config value {other}"))),
    };
    let mut tokens = Vec::new();
    for (key, value) in map {
        if key == "config" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match &value {
            Value::Bool(true) => tokens.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let joined = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?.join(",");
                tokens.push(format!("{flag}={joined}").into());
            }
            v => tokens.push(format!("{flag}={}", scalar(v)?).into()),
        }
    }
    Ok(tokens)
}

/// Parses arguments, folding in `--config` values beneath explicit flags.
pub fn parse(argv: Vec<OsString>) -> Result<Cli, clap::Error> {
    let cmd = allow_repeats(Cli::command());
    let first = cmd.clone().try_get_matches_from(&argv)?;
    let Some(config) = first.get_one::<PathBuf>("config").cloned() else {
        return Cli::from_arg_matches(&first);
    };
    let tokens = match config_tokens(&config) {
        Ok(t) => t,
        Err(e) => return Err(cmd.clone().error(clap::error::ErrorKind::ValueValidation, e.message)),
    };
    // Config flags go right after the subcommand names so later CLI flags override them.
    let path = subcommand_path(&first);
    let mut insert_at = argv.len();
    let mut depth = 0;
    for (i, tok) in argv.iter().enumerate().skip(1) {
        if depth < path.len() && tok.to_str() == Some(path[depth].as_str()) {
            depth += 1;
            if depth == path.len() {
                insert_at = i + 1;
                break;
            }
        }
    }
    let mut merged = argv[..insert_at].to_vec();
    merged.extend(tokens);
    merged.extend_from_slice(&argv[insert_at..]);
    let matches = cmd.try_get_matches_from(merged)?;
    Cli::from_arg_matches(&matches)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot configure thread pool: {e}")))?;
    }
    match cli.command {
        Commands::Derive(a) => commands::derive(&a, cli.seed),
        Commands::Verify(a) => commands::verify(&a),
        Commands::Tables(a) => commands::tables(&a),
        Commands::Scan(ScanCommand::Area(a)) => commands::scan_area(&a, cli.seed),
        Commands::Scan(ScanCommand::Grid2d(a)) => commands::scan_grid(&a),
        Commands::Scan(ScanCommand::Decoherence(a)) => commands::scan_decoherence(&a),
        Commands::Scan(ScanCommand::Radius(a)) => commands::scan_radius(&a),
        Commands::Nlevel(a) => commands::nlevel(&a),
        Commands::Waveguide(a) => commands::waveguide(&a),
    }
}
