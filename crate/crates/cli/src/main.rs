//! `incres` command-line front end.
//!
//! Angles are read and written in degrees; everything else is in the units
//! of the physical model (canonical by default). Data goes to stdout (or
//! `--output`), diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use incres::config::ModelConfig;
use incres::table::Format;
use incres::{PhysicalModel, RationalRatio};

#[derive(Debug, Parser)]
#[command(
    name = "incres",
    version,
    about = "J2 main problem, radial intermediary and resonant inclinations"
)]
struct Cli {
    /// Model config (JSON with mu, alpha, j2); overrides INCRES_CONFIG.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Gravitational parameter, overriding the config.
    #[arg(long, global = true)]
    mu: Option<f64>,

    /// Equatorial radius, overriding the config.
    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Oblateness coefficient, overriding the config.
    #[arg(long, global = true)]
    j2: Option<f64>,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    /// Write data here instead of stdout.
    #[arg(long, short, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical inclination (1:1 resonance) for a given sigma.
    Critical(CriticalArgs),
    /// Rational resonances n_r/n_theta = num/den and their inclinations.
    Resonances(ResonanceArgs),
    /// Sampled intermediary trajectory in the orbital plane.
    Rosette(RosetteArgs),
    /// Frequency-ratio / inclination curves.
    Diagram(DiagramArgs),
    /// Propagate a state with one of the three methods.
    Propagate(PropagateArgs),
    /// Run the self-check suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    /// sigma = J2 (alpha/p)^2.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// Semi-latus rectum; sigma is formed with --j2 and the model's alpha.
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ResonanceArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: f64,
    #[arg(long, default_value_t = 25)]
    pub max_den: u64,
    /// Window of k = n_r/n_theta as LO,HI.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.5])]
    pub window: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct RosetteArgs {
    /// Q/P as a rational number.
    #[arg(long, default_value = "1/1")]
    pub ratio: RationalRatio,
    #[arg(long, default_value_t = 0.8)]
    pub e: f64,
    /// Latitude of perigee, degrees.
    #[arg(long, default_value_t = 135.0, allow_negative_numbers = true)]
    pub theta0: f64,
    /// Latitude cycles to draw; defaults to the closure count.
    #[arg(long)]
    pub revs: Option<u64>,
    #[arg(long, default_value_t = 360)]
    pub samples_per_rev: u64,
    /// Q^2/mu, the conic parameter.
    #[arg(long, default_value_t = 1.0)]
    pub q2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DiagramKind {
    Apsidal,
    Latitude,
    KSigma,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    #[arg(long, value_enum)]
    pub kind: DiagramKind,
    /// sigma for the apsidal and latitude curves.
    #[arg(long, default_value_t = 1e-3)]
    pub sigma: f64,
    /// Grid points (ratio grid, or sigma grid for k-sigma).
    #[arg(long, default_value_t = 151)]
    pub points: usize,
    /// Largest sigma of the k-sigma grid.
    #[arg(long, default_value_t = 0.1)]
    pub sigma_max: f64,
    /// Inclinations (degrees) of the k-sigma curves.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 23.66, 45.0, 63.44, 75.0, 86.34, 90.0])]
    pub inclinations: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Numeric,
    Intermediary,
    Semianalytic,
}

#[derive(Debug, Args)]
pub struct PropagateArgs {
    #[arg(long, value_enum, default_value_t = Method::Numeric)]
    pub method: Method,
    /// Polar-nodal state r,theta,nu,R,Theta,N (angles in degrees).
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        conflicts_with = "elements"
    )]
    pub state: Option<Vec<f64>>,
    /// Osculating elements a,e,i,raan,argp,f (angles in degrees).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub elements: Option<Vec<f64>>,
    /// Time span.
    #[arg(long, conflicts_with = "orbits")]
    pub time: Option<f64>,
    /// Time span in Keplerian periods of the initial osculating orbit.
    #[arg(long)]
    pub orbits: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Output intervals (samples - 1).
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Constant integration step (numeric method), for reproducible runs.
    #[arg(long)]
    pub fixed_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

/// Everything a command needs besides its own arguments.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: PhysicalModel<f64>,
    /// `--j2` given explicitly on the command line.
    pub j2_flag: Option<f64>,
    pub format: Format,
    pub output: Option<PathBuf>,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
}

impl From<incres::Error> for CliError {
    fn from(e: incres::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

fn load_model(cli: &Cli) -> Result<PhysicalModel<f64>, CliError> {
    let base = match &cli.config {
        Some(path) => ModelConfig::from_file(path),
        None => ModelConfig::from_env(),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let merged = ModelConfig {
        mu: cli.mu.unwrap_or(base.mu),
        alpha: cli.alpha.unwrap_or(base.alpha),
        j2: cli.j2.unwrap_or(base.j2),
    };
    merged.model().map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let run = RunConfig {
        model: load_model(&cli)?,
        j2_flag: cli.j2,
        format: match cli.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
        output: cli.output.clone(),
    };
    let outcome = match &cli.command {
        Command::Critical(args) => commands::critical(&run, args)?,
        Command::Resonances(args) => commands::resonances(&run, args)?,
        Command::Rosette(args) => commands::rosette(&run, args)?,
        Command::Diagram(args) => commands::diagram(&run, args)?,
        Command::Propagate(args) => commands::propagate(&run, args)?,
        Command::Validate(args) => commands::validate(&run, args)?,
    };
    emit(&run, &outcome.table.render(run.format))?;
    outcome.status
}

fn emit(run: &RunConfig, text: &str) -> Result<(), CliError> {
    match &run.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            // a closed pipe is not worth an error
            let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Numeric(msg) => eprintln!("numerical failure: {msg}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
