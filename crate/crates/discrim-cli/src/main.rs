//! Command-line front end: sweep configuration in, CSV/JSON out.
//!
//! Data goes to `--out` (or stdout); progress and warnings go to
//! stderr. Exit codes: 0 success, 2 configuration error, 3 resource
//! ceiling exceeded, 4 numeric failure.

mod commands;
mod config;
mod output;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::SweepConfig;
use discrim::Error as LibError;
use output::{meta, Table};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Lib(LibError),
    Io(io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<LibError> for CliError {
    fn from(e: LibError) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Lib(e) => match e {
                LibError::SizeLimit { .. } => 3,
                LibError::InvalidParameter { .. } | LibError::UnsupportedPrior { .. } => 2,
                LibError::ImpossibleOutcome { .. }
                | LibError::OptimizerFailure(_)
                | LibError::DegenerateFit(_)
                | LibError::NumericFailure(_) => 4,
            },
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Sweep configuration file (TOML).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output path; stdout when omitted (simulate requires a path).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Parser)]
#[command(
    name = "discrim",
    version,
    about = "Error probabilities and Chernoff exponents for multiple-copy discrimination of depolarized qubit pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Finite-N error probabilities per scheme and family.
    ErrorCurve(CommonArgs),
    /// Optimal measurement angles (gof per N, goa full table).
    Angles(CommonArgs),
    /// Chernoff exponents: analytic, optimized, numeric, extrapolated.
    Chernoff(CommonArgs),
    /// Critical mixture of the fixed-measurement bifurcation.
    Critical(CommonArgs),
    /// Seeded trajectory simulation with an empirical error summary.
    Simulate(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::ErrorCurve(a)
            | Command::Angles(a)
            | Command::Chernoff(a)
            | Command::Critical(a)
            | Command::Simulate(a) => a,
        }
    }
}

fn load_config(args: &CommonArgs) -> Result<SweepConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            SweepConfig::from_toml(&text)?
        }
        None => SweepConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn writer_for(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_table(args: &CommonArgs, command: &str, config: &SweepConfig, table: &Table) -> Result<(), CliError> {
    let mut out = writer_for(args.out.as_deref())?;
    match args.format {
        Format::Csv => table.write_csv(&mut out)?,
        Format::Json => table.write_json(meta(command, config.seed, config), &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let args = cli.command.args();
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure {threads} threads: {e}")))?;
    }
    let config = load_config(args)?;

    match &cli.command {
        Command::ErrorCurve(args) => {
            let table = commands::cmd_error_curve(&config)?;
            emit_table(args, "error-curve", &config, &table)
        }
        Command::Angles(args) => {
            let table = commands::cmd_angles(&config)?;
            emit_table(args, "angles", &config, &table)
        }
        Command::Chernoff(args) => {
            let table = commands::cmd_chernoff(&config)?;
            emit_table(args, "chernoff", &config, &table)
        }
        Command::Critical(args) => {
            let table = commands::cmd_critical(&config)?;
            emit_table(args, "critical", &config, &table)
        }
        Command::Simulate(args) => {
            let Some(out_path) = &args.out else {
                return Err(CliError::Config(
                    "simulate writes two files and requires --out <path>".into(),
                ));
            };
            let result = commands::cmd_simulate(&config)?;

            let mut out = writer_for(Some(out_path))?;
            match args.format {
                Format::Csv => commands::write_trajectories_csv(&mut out, &result.trajectories)?,
                Format::Json => {
                    commands::write_trajectories_jsonl(&mut out, &result.trajectories)?
                }
            }
            out.flush()?;

            let summary_path = summary_path_for(out_path);
            let mut summary = writer_for(Some(&summary_path))?;
            let doc = serde_json::json!({
                "meta": meta("simulate", config.seed, &config),
                "data": result.summary,
            });
            writeln!(summary, "{}", serde_json::to_string_pretty(&doc)?)?;
            summary.flush()?;
            eprintln!("# summary written to {}", summary_path.display());
            Ok(())
        }
    }
}

fn summary_path_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".summary.json");
    out.with_file_name(name)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
