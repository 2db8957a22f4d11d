//! Command-line front end: JSON configuration, the `convergence`,
//! `extrapolate` and `diagnostics` commands, and CSV/JSON reports.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure.

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_convergence, cmd_diagnostics, cmd_extrapolate, ExtrapolationRow, CONVERGENCE_HEADER, DIAGNOSTICS_HEADER,
    EXTRAPOLATION_HEADER,
};
pub use config::{
    parse_config, parse_config_str, ConfigError, Grading, MethodTag, OneOrMany, ProblemSpec, ProfileTag, Resolved,
    RunConfig,
};
pub use output::{n_spec, sci, sci_opt};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write output: {0}")]
    Output(std::io::Error),
    #[error("numerical failure: {0}")]
    Numerical(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "corner-bie", version, about = "Double-layer boundary integral solver on polygons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error and EOC of each method over a ladder of uniformly doubled meshes.
    Convergence(RunArgs),
    /// Multi-parameter extrapolation of the iterated methods.
    Extrapolate(RunArgs),
    /// Decay of `T(I - P)u` and `T(I - P)T(I - P)u`.
    Diagnostics(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; overrides `parallelism` in the config.
    #[arg(long)]
    pub parallelism: Option<usize>,
}

/// Runs one command inside a thread pool of the configured size.
pub fn execute(command: &Command) -> Result<(), CliError> {
    let (args, run): (&RunArgs, fn(&RunConfig, &std::path::Path) -> Result<(), CliError>) = match command {
        Command::Convergence(a) => (a, cmd_convergence),
        Command::Extrapolate(a) => (a, cmd_extrapolate),
        Command::Diagnostics(a) => (a, cmd_diagnostics),
    };
    if args.parallelism == Some(0) {
        return Err(ConfigError::Validation {
            field: "parallelism",
            message: "must be at least 1".into(),
        }
        .into());
    }
    let mut config = parse_config(&args.config)?;
    if let Some(p) = args.parallelism {
        config.parallelism = Some(p);
    }
    if let Some(o) = &args.out {
        config.output_dir = Some(o.clone());
    }
    // 0 lets rayon pick the number of threads
    let threads = config.parallelism.unwrap_or(0);
    let out = config.output_dir.clone().ok_or_else(|| ConfigError::Validation {
        field: "output_dir",
        message: "no output directory; pass --out or set output_dir".into(),
    })?;
    std::fs::create_dir_all(&out).map_err(CliError::Output)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Output(std::io::Error::other(e)))?;
    pool.install(|| run(&config, &out))
}

/// Parses arguments, runs, reports errors on standard error, and returns
/// the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
