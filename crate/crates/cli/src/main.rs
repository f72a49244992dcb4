//! `hyperlinear`: command-line entry point for the toolkit.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "hyperlinear", version, about = "Finite-dimensional checks for approximate representations and moment sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format; CSV is available for moment vectors, trajectories and the suite.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// JSON file whose keys mirror the long flags; flags on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for parallel sections.
    #[arg(long, env = "HYPERLINEAR_THREADS", global = true)]
    pub threads: Option<usize>,

    /// Suppress timestamps and timings so reports are byte-identical across runs.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the approximate representation of order n and measure its properties.
    ApproxRep(ApproxRepArgs),
    /// Normalize or reduce a word in a and b.
    Word(WordArgs),
    /// Amalgamated trace of a word with A = a1 v, B = b.
    Trace(TraceArgs),
    /// Moment vectors of random unitaries or projections, or hull membership.
    Moments(MomentsArgs),
    /// Membership of pair moments in the abelian hull, with a certificate when outside.
    Hull(HullArgs),
    /// Maximize a quadratic trace functional over projection tuples.
    Optimize(OptimizeArgs),
    /// Run the acceptance checks.
    Suite(SuiteArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ApproxRep(_) => "approx-rep",
            Command::Word(_) => "word",
            Command::Trace(_) => "trace",
            Command::Moments(_) => "moments",
            Command::Hull(_) => "hull",
            Command::Optimize(_) => "optimize",
            Command::Suite(_) => "suite",
        }
    }
}

#[derive(Args, Debug)]
pub struct ApproxRepArgs {
    #[arg(long)]
    pub n: usize,
    /// Largest |α| in the expectation residuals.
    #[arg(long, default_value_t = 6)]
    pub p_max: i64,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct WordArgs {
    /// Rewrite into the sign-change normal form.
    #[arg(long)]
    pub normalize: Option<String>,
    /// Apply pinch reduction.
    #[arg(long)]
    pub reduce: Option<String>,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[arg(long)]
    pub word: String,
    #[arg(long)]
    pub n: usize,
    /// Also estimate the trace by sampling Haar unitaries.
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Block multiplicity of the sampled model.
    #[arg(long, default_value_t = 8)]
    pub amplification: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MomentKind {
    Unitary,
    Projection,
    Hull,
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    pub kind: MomentKind,
    /// Number of unitaries or projections.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Longest product in the unitary index set.
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    /// Append the adjoints as extra unitaries.
    #[arg(long)]
    pub augment: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pair moments for `hull`: a JSON file or an inline comma list.
    #[arg(long)]
    pub lambda: Option<String>,
}

#[derive(Args, Debug)]
pub struct HullArgs {
    #[arg(long)]
    pub n: usize,
    /// Pair moments λ_11, λ_12, …, λ_nn: a JSON file or an inline comma list.
    #[arg(long)]
    pub lambda: String,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub dim: usize,
    /// Coefficients a_11, a_12, …, a_nn (or a JSON file with a list or a matrix).
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: String,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_sweeps: usize,
    /// Skip the 0/I starting tuples.
    #[arg(long)]
    pub no_scalar_starts: bool,
    /// Write the ascent trajectory of the best restart as CSV.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SuiteArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Comma-separated criterion numbers; 10 is the run-twice determinism check.
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<u32>>,
}

#[derive(Debug)]
pub enum Report {
    Json(serde_json::Value),
    Csv(String),
}

/// Failure modes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Checks(Report, Vec<u32>),
}

impl From<hyperlinear::Error> for Failure {
    fn from(e: hyperlinear::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn emit(cli: &Cli, report: &Report) -> std::io::Result<()> {
    let text = match report {
        Report::Json(v) => {
            let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
            s.push('\n');
            s
        }
        Report::Csv(s) => s.clone(),
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match config::parse(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    match commands::run(&cli) {
        Ok(report) => match emit(&cli, &report) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Checks(report, failing)) => {
            if let Err(e) = emit(&cli, &report) {
                eprintln!("error: {e}");
            }
            let ids: Vec<String> = failing.iter().map(u32::to_string).collect();
            eprintln!("failing criteria: {}", ids.join(", "));
            ExitCode::from(1)
        }
    }
}
