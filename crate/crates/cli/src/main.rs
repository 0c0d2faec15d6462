//! `phasespace`: operator symbols, phase-space distributions, expectation
//! values and extended-phase-space evolution from the command line.

mod commands;
mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{read_config_file, RunConfig};

#[derive(Parser)]
#[command(name = "phasespace", version, about = "Ordering rules and quasi-probability distributions in phase space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the α-ordered symbol of an operator
    Symbol(Options),
    /// Compute a distribution field and check its invariants
    Distribution(Options),
    /// Compare the Hilbert-space trace with every phase-space pairing
    Expect(Options),
    /// Propagate the standard-order distribution in extended phase space
    Evolve(Options),
}

#[derive(Args)]
struct Options {
    /// Flat key = value configuration file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ordering parameter (default -0.5)
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long)]
    hbar: Option<String>,
    /// Operator text, e.g. "q^2 p - i hbar q"
    #[arg(long)]
    op: Option<String>,
    /// oscillator:N | coherent:Q0,P0 | file:PATH (default oscillator:0)
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
    /// Output directory (default .)
    #[arg(long)]
    out: Option<String>,
    /// Hamiltonian in q and p, e.g. "p^2/2 + q^2/2"
    #[arg(long)]
    ham: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    /// Write a snapshot every N steps
    #[arg(long)]
    stride: Option<String>,
    /// Certification tolerance for expectation pairings (default 1e-5)
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    q_count: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    q_min: Option<String>,
    #[arg(long)]
    q_step: Option<String>,
    #[arg(long)]
    p_count: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p_min: Option<String>,
    #[arg(long)]
    p_step: Option<String>,
}

impl Options {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let mut map = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        let flags = [
            ("alpha", self.alpha),
            ("hbar", self.hbar),
            ("op", self.op),
            ("state", self.state),
            ("out", self.out),
            ("ham", self.ham),
            ("dt", self.dt),
            ("steps", self.steps),
            ("stride", self.stride),
            ("tol", self.tol),
            ("q_count", self.q_count),
            ("q_min", self.q_min),
            ("q_step", self.q_step),
            ("p_count", self.p_count),
            ("p_min", self.p_min),
            ("p_step", self.p_step),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                map.insert(key.to_string(), v);
            }
        }
        RunConfig::from_map(map)
    }
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Invariant(String),
    Instability { dt: f64, suggested: f64 },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Instability { .. } => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant failure: {m}"),
            CliError::Instability { dt, suggested } => {
                write!(f, "numerical instability at dt = {dt}; suggested dt <= {suggested:.6e}")
            }
        }
    }
}

impl From<phasespace::Error> for CliError {
    fn from(e: phasespace::Error) -> Self {
        use phasespace::Error as E;
        match e {
            E::Stability { dt, suggested } => CliError::Instability { dt, suggested },
            E::DomainTruncation(_) | E::Resolution(_) => CliError::Invariant(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

type Runner = fn(&RunConfig) -> Result<(), CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (run, options): (Runner, Options) = match cli.command {
        Command::Symbol(o) => (commands::symbol, o),
        Command::Distribution(o) => (commands::distribution, o),
        Command::Expect(o) => (commands::expect, o),
        Command::Evolve(o) => (commands::evolve, o),
    };
    match options.into_config().and_then(|c| run(&c)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("phasespace: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
