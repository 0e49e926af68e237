//! `qns`: verify, build, simulate and value quantum no-signalling
//! correlations stored as JSON files.
//!
//! Exit codes: 0 every verdict passed, 1 some verdict failed, 2 bad input,
//! 3 the value solver did not converge.

mod commands;
mod report;
mod specs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qns", version, about = "Quantum no-signalling correlations from the command line")]
pub struct Cli {
    /// Numerical tolerance for loading and verifying.
    #[arg(long, global = true, default_value_t = qns::DEFAULT_TOL)]
    pub tol: f64,
    /// Seed for `gen`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the artifact (or the report, for commands without one).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Human-readable report and indented JSON artifacts.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Check a file against a class or property.
    Verify {
        kind: VerifyKind,
        /// `perfect` takes a strategy then a game; `graph` takes a graph game,
        /// optionally preceded by a strategy.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Build a correlation from a spec file.
    Build { kind: BuildKind, spec: PathBuf },
    /// Generate a seeded random instance.
    Gen(GenArgs),
    /// Route an inner strategy through an SQNS simulator.
    Simulate {
        #[arg(long)]
        simulator: PathBuf,
        #[arg(long)]
        inner: PathBuf,
    },
    /// Game values.
    Value {
        #[command(subcommand)]
        mode: ValueMode,
    },
    /// Write the no-signalling value SDP in SDPA sparse format.
    ExportSdpa {
        #[arg(long)]
        game: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VerifyKind {
    Ns,
    Sns,
    Stochastic,
    StronglyStochastic,
    Bicorrelation,
    Concurrent,
    Perfect,
    Graph,
    Relations,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BuildKind {
    Local,
    Quantum,
    Qc,
    Tracial,
    JointlyTracial,
    ClassicalEmbed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// `--inputs`, `--outputs` leg sizes, `--rank` Kraus operators.
    Channel,
    /// `--sizes x,a`, `--dim` for d_h.
    TraceRep,
    /// Classical table with the strong no-signalling sums; `--sizes` per leg.
    SnsClassical,
    /// `--sizes x,y,a,b`.
    NsClassical,
    /// Arbitrary classical table; `--inputs`, `--outputs`.
    Classical,
    /// `--sizes x,a`, `--dim`.
    Stochastic,
    /// `--sizes p2,q1,p1,q2`, `--dim`, `--terms`.
    StronglyStochastic,
    /// `--sizes x,y,a,b`.
    ClassicalGame,
    /// Spec for `build local`; `--size`, `--terms`, `--rank`.
    LocalSpec,
    /// Spec for `build quantum`; `--size`, `--dim`, `--terms`.
    QuantumSpec,
    /// Spec for `build qc`; `--size`, `--dim`.
    QcSpec,
    /// Spec for `build jointly-tracial`; `--size`, `--dim`.
    JointlyTracialSpec,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub kind: GenKind,
    #[arg(long, value_delimiter = ',')]
    pub inputs: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub outputs: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Size of every leg, for the spec generators.
    #[arg(long, default_value_t = 2)]
    pub size: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub terms: usize,
    /// Leg names overriding the defaults.
    #[arg(long, value_delimiter = ',')]
    pub names: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum ValueMode {
    /// Score a given strategy.
    Eval {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
    },
    /// No-signalling value, with a witness strategy as the artifact.
    Ns {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        tol_value: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Classical local value by enumeration.
    Loc {
        #[arg(long)]
        game: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
