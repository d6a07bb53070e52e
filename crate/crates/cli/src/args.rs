use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "entgeom", version, about = "Verify geometric properties of pure-state spaces")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Local dimension N (supported: 2, 3, 4)
    #[arg(long, global = true, default_value_t = 2, value_parser = parse_n)]
    pub n: usize,
    /// Seed of the random generator
    #[arg(long, global = true, env = "ENTGEOM_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Number of random sample points
    #[arg(long, global = true, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub points: u64,
    /// Override the check's tolerance
    #[arg(long, global = true, value_parser = positive)]
    pub tol: Option<f64>,
    /// Write output here instead of standard output
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Record wall-clock time in reports
    #[arg(long, global = true)]
    pub timing: bool,
    #[arg(long, global = true, value_enum, default_value_t = Exec::Parallel)]
    pub execution: Exec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Exec {
    Sequential,
    Parallel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Rk4,
    ImplicitMidpoint,
    ExplicitEuler,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a named verification check and emit a report
    #[command(subcommand)]
    Verify(Verify),
    /// Distances and curve lengths in projective space
    #[command(subcommand)]
    Geometry(Geometry),
    /// Draw random objects, one JSON object per line
    Sample {
        #[arg(value_enum)]
        what: SampleKind,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
    },
    /// Integrate the Schrödinger flow and write the trajectory as CSV
    Evolve {
        #[command(flatten)]
        flow: FlowArgs,
        /// Write every k-th step
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        stride: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SampleKind {
    State,
    Unitary,
    Maxent,
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// Symplectic pullback and tangent rank on the maximally entangled orbit
    Lagrangian,
    /// Negative control on the product-state (Segre) variety
    Segre,
    /// Volume variation of the N = 2 orbit along random fields
    Minimal(MinimalArgs),
    /// Integrator against the exact propagator
    Flow(FlowArgs),
    /// Poisson algebra of quadratic observables
    Bracket,
}

#[derive(Debug, Args)]
pub struct MinimalArgs {
    /// Midpoint nodes per Euler angle
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(2..))]
    pub grid: u64,
    #[arg(long, default_value_t = 1e-3, value_parser = positive)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 20)]
    pub normal_fields: usize,
    #[arg(long, default_value_t = 5)]
    pub tangential_fields: usize,
    /// Also write an epsilon sweep (CSV) for the first normal field
    #[arg(long)]
    pub sweep: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long, default_value_t = 1e-3, value_parser = positive)]
    pub dt: f64,
    #[arg(long, default_value_t = 1.0, value_parser = nonnegative)]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = Method::Rk4)]
    pub method: Method,
    /// Hamiltonian (matrix JSON); defaults to diag(1, -1, 0, ...)
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,
    /// Initial state (vector JSON); defaults to the uniform superposition
    #[arg(long)]
    pub state: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Geometry {
    /// Fubini-Study distance of two states and its unitary invariance
    Distance(PairArgs),
    /// Length of the sampled geodesic arc against the distance
    Length {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(2..))]
        samples: u64,
    },
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// First state (vector JSON); random when omitted
    #[arg(long)]
    pub a: Option<PathBuf>,
    /// Second state (vector JSON); random when omitted
    #[arg(long)]
    pub b: Option<PathBuf>,
}

fn parse_n(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if entgeom::submanifold::SUPPORTED_N.contains(&n) {
        Ok(n)
    } else {
        Err(format!("unsupported n = {n} (supported: 2, 3, 4)"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

fn nonnegative(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a nonnegative number, got {s}"))
    }
}
