use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use yule_core::mgf::{ProcessKind, ProcessSpec};
use yule_core::moments::{Scheme, MAX_ORDER};

use crate::error::CliError;

const ABOUT: &str = "Moments of Yule's nonsense correlation ρ(T) = Y12 / √(Y11 Y22), \
where Y_ij = ∫₀ᵀ X_i X_j dt − T X̄_i X̄_j, for two Brownian motions (bm), \
Ornstein–Uhlenbeck processes (ou), Brownian bridges (bb) or correlated \
Brownian motions (cbm).";

#[derive(Debug, Parser)]
#[command(name = "yule", version, about = ABOUT, long_about = None)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact moments E ρ^k from the joint Laplace transform.
    #[command(long_about = MOMENTS_HELP)]
    Moments(MomentsArgs),
    /// Polynomial density on [-1, 1] matching the first K moments.
    #[command(long_about = DENSITY_HELP)]
    Density(DensityArgs),
    /// Monte Carlo moments with jackknife standard errors.
    #[command(long_about = SIMULATE_HELP)]
    Simulate(SimulateArgs),
    /// Closed-form transform against the backward Riccati integrator.
    #[command(long_about = VERIFY_HELP)]
    Verify(VerifyArgs),
    /// Large-horizon behaviour of ρ for two independent OU processes.
    #[command(long_about = CLT_HELP)]
    Clt(CltArgs),
    /// Re-runs the command recorded in a manifest sidecar.
    Rerun {
        /// Path to a `*.manifest.json` file.
        manifest: PathBuf,
    },
}

const MOMENTS_HELP: &str = "\
Exact moments E ρ^k, k = 1..16, from

    E ρ^k = (−1)^k k! · 4 / (2^k Γ(k/2)²) ∫₀^∞∫₀^∞ u^{k−1} v^{k−1} c_k(u², v²) du dv,

where c_k(s11, s22) is the coefficient of ε^k in the centred transform
φ(s11, ε, s22) = E exp(−½(s11 Y11 + s22 Y22) − ε Y12). The ε-expansion is
computed with truncated Taylor arithmetic on the closed-form transform and the
quadrant integral with nested adaptive quadrature refined until successive
levels differ by less than --tol. Odd moments of bm, ou and bb vanish by
symmetry.

Exit status 3 if the quadrature does not converge; the message names the
order and refinement level.";

const DENSITY_HELP: &str = "\
Fits the unique polynomial p of degree K with ∫ x^j p(x) dx = E ρ^j for
j = 0..K, written in the Legendre basis as

    p(x) = Σ_{n ≤ K} (2n + 1)/2 · E[P_n(ρ)] · P_n(x),   x ∈ [−1, 1].

The CSV output samples p on --points evenly spaced abscissae (header x,pdf);
with --out, the monomial coefficients are written to <out>.coeffs.json. For
the symmetric families K must be even.";

const SIMULATE_HELP: &str = "\
Simulates --paths independent path pairs on a uniform grid of --steps
intervals with exact Gaussian transitions (the bridge by pinning a Brownian
path), forms Y_ij with the trapezoidal rule and ρ = Y12 / √(Y11 Y22), and
reports sample means of ρ^k with jackknife standard errors over 100 blocks.
Path i uses stream i of a ChaCha8 generator seeded with --seed, so output is
identical for any VC_THREADS.";

const VERIFY_HELP: &str = "\
Compares the closed-form φ(S) = E exp(−½ tr(S Y)) with an independent
numerical one. For dX = σ dW + (BX + δ) dt with X(0) = 0, the transform
E[exp(−½∫ₜᵀ X·QX ds − ∫ₜᵀ z·X ds) | X_t = x] equals exp(−½x·Vx − b·x − γ), where

    V' = VΣV − (VB + BᵀV) − Q,   b' = (VΣ − Bᵀ)b − Vδ − z,
    2γ' = bᵀΣb − tr(VΣ) − δᵀb,  with zero terminal values,

is integrated backwards with RK4. The centring term is restored by
driving z with an auxiliary Gaussian a ~ N(0, S/T); since γ(0; a) is quadratic
in a, that mixing is done in closed form. The grid is
s11, s22 ∈ {0, 0.5, 2, 8, 20} and s12 = f √(s11 s22), f ∈ {−0.9, 0, 0.5}.

Exit status 4 if the largest deviation exceeds 1e-6 (1e-5 for bb, whose
singular drift is cut off at T − ε).";

const CLT_HELP: &str = "\
For two independent OU processes dX = −rX dt + dW started at 0, simulates
ρ(T) on each horizon in --T with 2048·T steps (or --steps per unit time) and
reports the sample variance of √T ρ(T), the sample variance of
T^{−1/2} ∫₀ᵀ X1 X2 dt, the sample mean of Y11/T (ergodic limit 1/(2r)), the
sample mean of ρ(T), and Kolmogorov–Smirnov distances of √T ρ(T) to
N(0, 1/(2r)) and to N(0, 1/r). All standard errors are jackknife estimates.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Bm,
    Ou,
    Bb,
    Cbm,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProcessArgs {
    /// Process family.
    #[arg(long, value_enum, default_value = "bm")]
    pub process: Family,
    /// Mean-reversion rate (ou only).
    #[arg(long)]
    pub r: Option<f64>,
    /// Noise correlation in (−1, 1) (cbm only).
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Horizon T (bb is fixed at 1).
    #[arg(long = "T", default_value_t = 1.0)]
    pub horizon: f64,
}

impl ProcessArgs {
    pub fn spec(&self) -> Result<ProcessSpec, CliError> {
        if self.r.is_some() && self.process != Family::Ou {
            return Err(CliError::Usage("--r applies only to --process ou".into()));
        }
        if self.c.is_some() && self.process != Family::Cbm {
            return Err(CliError::Usage("--c applies only to --process cbm".into()));
        }
        let kind = match self.process {
            Family::Bm => ProcessKind::Bm,
            Family::Bb => ProcessKind::Bb,
            Family::Ou => ProcessKind::Ou {
                r: self.r.ok_or_else(|| CliError::Usage("--process ou requires --r".into()))?,
            },
            Family::Cbm => ProcessKind::CorrelatedBm {
                c: self.c.ok_or_else(|| CliError::Usage("--process cbm requires --c".into()))?,
            },
        };
        Ok(ProcessSpec::new(kind, self.horizon)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write to this file (plus a `.manifest.json` sidecar) instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    GaussLegendre,
    TanhSinh,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::GaussLegendre => Scheme::GaussLegendrePanels,
            SchemeArg::TanhSinh => Scheme::TanhSinh2d,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    /// Comma-separated orders in 1..=16 [default: 2,4,6,8, or 1,2 for cbm].
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    /// Absolute tolerance between successive quadrature levels.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Quadrature rule on the quadrant.
    #[arg(long, value_enum, default_value = "gauss-legendre")]
    pub scheme: SchemeArg,
    /// Deepest refinement level before giving up (at least 4).
    #[arg(long, default_value_t = 12)]
    pub max_level: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DensityArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    /// Polynomial degree K (≤ 16).
    #[arg(long, default_value_t = 12)]
    pub order: usize,
    /// Number of evenly spaced sample points on [-1, 1].
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Quadrature tolerance for the moments.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    /// Comma-separated orders in 1..=16.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub orders: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    /// Time steps per path [default: 2048·T, at least 2048].
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    /// RK4 steps for the backward integration.
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    /// Cut-off ε before the horizon for the bridge drift.
    #[arg(long, default_value_t = 1e-6)]
    pub cutoff: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CltArgs {
    /// Mean-reversion rate r > 0.
    #[arg(long)]
    pub r: f64,
    /// Comma-separated increasing horizons.
    #[arg(long = "T", value_delimiter = ',', default_value = "10,25,50")]
    pub horizons: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    /// Time steps per unit time.
    #[arg(long, default_value_t = 2048)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Moments(_) => "moments",
            Command::Density(_) => "density",
            Command::Simulate(_) => "simulate",
            Command::Verify(_) => "verify",
            Command::Clt(_) => "clt",
            Command::Rerun { .. } => "rerun",
        }
    }

    pub fn output(&self) -> OutputArgs {
        match self {
            Command::Moments(a) => a.output.clone(),
            Command::Density(a) => a.output.clone(),
            Command::Simulate(a) => a.output.clone(),
            Command::Verify(a) => a.output.clone(),
            Command::Clt(a) => a.output.clone(),
            Command::Rerun { .. } => OutputArgs {
                format: Format::Csv,
                out: None,
            },
        }
    }
}

pub fn check_orders(orders: &[usize]) -> Result<(), CliError> {
    if orders.is_empty() {
        return Err(CliError::Usage("--orders must not be empty".into()));
    }
    match orders.iter().find(|&&k| k == 0 || k > MAX_ORDER) {
        Some(k) => Err(CliError::Usage(format!("order {k} is outside 1..={MAX_ORDER}"))),
        None => Ok(()),
    }
}
