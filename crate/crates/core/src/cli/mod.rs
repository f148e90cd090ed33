//! Batch front-end.

pub mod commands;
pub mod config;
pub mod table;
pub mod validate;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{run_spectrum, run_steady, run_trajectory};
pub use config::{ConfigError, OutputFormat, RunConfig};
pub use table::{Cell, ResultTable};
pub use validate::{run_validate, validation_failed};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Io(_) => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gaussync",
    version,
    about = "Coupled damped oscillators in a correlated bath"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalue branches of the drift matrix along a sweep.
    Spectrum(CommonArgs),
    /// Time evolution of first and second moments.
    Trajectory(CommonArgs),
    /// Stationary covariance, heat flux and information measures.
    Steady(CommonArgs),
    /// Self-consistency checks on a seeded random corpus.
    Validate(CommonArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config field, e.g. `--set params.xi=0.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub output: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut overrides = self.overrides.clone();
        if let Some(o) = &self.output {
            overrides.push(format!(
                "output.path={}",
                serde_json::Value::String(o.clone())
            ));
        }
        if let Some(f) = self.format {
            let name = match f {
                FormatArg::Csv => "csv",
                FormatArg::Json => "json",
            };
            overrides.push(format!("output.format={name}"));
        }
        if let Some(s) = self.seed {
            overrides.push(format!("seed={s}"));
        }
        RunConfig::load(self.config.as_deref(), &overrides)
    }
}

type Runner = fn(&RunConfig) -> Result<ResultTable, CliError>;

/// Run one parsed command; returns the table or the error that ended it.
pub fn execute(command: &Command) -> Result<(RunConfig, ResultTable), CliError> {
    let (args, f): (&CommonArgs, Runner) = match command {
        Command::Spectrum(a) => (a, run_spectrum),
        Command::Trajectory(a) => (a, run_trajectory),
        Command::Steady(a) => (a, run_steady),
        Command::Validate(a) => (a, run_validate),
    };
    let cfg = args.resolve()?;
    let table = f(&cfg)?;
    Ok((cfg, table))
}

fn emit(cfg: &RunConfig, table: &ResultTable) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match cfg.resolved_output() {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(io)?;
            }
            let mut file = std::io::BufWriter::new(std::fs::File::create(&path).map_err(io)?);
            table.write(cfg.output.format, &mut file).map_err(io)?;
            file.flush().map_err(io)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write(cfg.output.format, &mut lock).map_err(io)?;
            lock.flush().map_err(io)
        }
    }
}

/// Parse arguments, run, write output and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (cfg, table) = match execute(&cli.command) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = emit(&cfg, &table) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    if matches!(cli.command, Command::Validate(_)) && validation_failed(&table) {
        eprintln!("validation failed");
        return EXIT_VALIDATION;
    }
    EXIT_OK
}
