//! Path simulation of `ρ(T)`.
//!
//! Paths are sampled on a uniform grid with exact Gaussian transitions (the
//! bridge is obtained by pinning a Brownian path), and the time integrals
//! `Y_ij = ∫ X_i X_j - T X̄_i X̄_j` use the trapezoidal rule. Path `i` draws
//! from ChaCha8 stream `i` of the configured seed, so results are identical
//! for any number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::mgf::{ProcessKind, ProcessSpec};
use crate::quad::pairwise_sum;

pub const JACKKNIFE_BLOCKS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation configuration: {0}")]
    InvalidConfig(String),
    #[error("degenerate path: Y11 = {y11:e}, Y22 = {y22:e}")]
    Degenerate { y11: f64, y22: f64 },
    #[error("moment order {0} is outside 1..=16")]
    InvalidOrder(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    /// Number of time steps; the grid has `n_steps + 1` points.
    pub n_steps: usize,
    pub seed: u64,
    pub spec: ProcessSpec,
}

impl SimConfig {
    /// Defaults to 2048 steps per unit of time.
    pub fn new(spec: ProcessSpec, n_paths: usize, seed: u64) -> Self {
        SimConfig {
            n_paths,
            n_steps: default_steps(spec.horizon()),
            seed,
            spec,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_paths < 1 {
            return Err(SimError::InvalidConfig("n_paths must be at least 1".into()));
        }
        if self.n_steps < 2 {
            return Err(SimError::InvalidConfig("n_steps must be at least 2".into()));
        }
        Ok(())
    }
}

pub fn default_steps(horizon: f64) -> usize {
    ((2048.0 * horizon).round() as usize).max(2048)
}

/// A discretized pair of paths on `t_i = i · dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub dt: f64,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

impl Path {
    fn with_steps(n_steps: usize, dt: f64) -> Self {
        Path {
            dt,
            x1: vec![0.0; n_steps + 1],
            x2: vec![0.0; n_steps + 1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoSample {
    pub rho: f64,
    pub y11: f64,
    pub y12: f64,
    pub y22: f64,
    /// Trapezoidal `∫ X₁ X₂` before centring.
    pub cross: f64,
}

/// RNG for path `index` under `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Samples one pair of paths with `X(0) = 0`.
pub fn simulate_path<R: Rng>(spec: &ProcessSpec, n_steps: usize, rng: &mut R) -> Path {
    let mut path = Path::with_steps(n_steps, spec.horizon() / n_steps as f64);
    fill_path(spec, &mut path, rng);
    path
}

fn fill_path<R: Rng>(spec: &ProcessSpec, path: &mut Path, rng: &mut R) {
    let n = path.x1.len() - 1;
    let dt = path.dt;
    path.x1[0] = 0.0;
    path.x2[0] = 0.0;
    match spec.kind() {
        ProcessKind::Bm | ProcessKind::Bb => {
            let s = dt.sqrt();
            for i in 0..n {
                let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                path.x1[i + 1] = path.x1[i] + s * a;
                path.x2[i + 1] = path.x2[i] + s * b;
            }
            if spec.kind() == ProcessKind::Bb {
                // X(t) = W(t) - t W(1)
                let (w1, w2) = (path.x1[n], path.x2[n]);
                for i in 0..=n {
                    let t = i as f64 / n as f64;
                    path.x1[i] -= t * w1;
                    path.x2[i] -= t * w2;
                }
                path.x1[n] = 0.0;
                path.x2[n] = 0.0;
            }
        }
        ProcessKind::Ou { r } => {
            let a = (-r * dt).exp();
            let s = (-(-2.0 * r * dt).exp_m1() / (2.0 * r)).sqrt();
            for i in 0..n {
                let (u, v): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                path.x1[i + 1] = a * path.x1[i] + s * u;
                path.x2[i + 1] = a * path.x2[i] + s * v;
            }
        }
        ProcessKind::CorrelatedBm { c } => {
            let s = dt.sqrt();
            let cc = (1.0 - c * c).sqrt();
            for i in 0..n {
                let (u, v): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                path.x1[i + 1] = path.x1[i] + s * u;
                path.x2[i + 1] = path.x2[i] + s * (c * u + cc * v);
            }
        }
    }
}

/// `ρ` of a discretized path pair.
pub fn rho_of_path(path: &Path) -> Result<RhoSample, SimError> {
    let n = path.x1.len();
    if n < 2 || path.x2.len() != n {
        return Err(SimError::InvalidConfig("a path needs at least two grid points".into()));
    }
    let (x1, x2) = (&path.x1, &path.x2);
    let (mut s1, mut s2, mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 1..n - 1 {
        let (a, b) = (x1[i], x2[i]);
        s1 += a;
        s2 += b;
        s11 += a * a;
        s22 += b * b;
        s12 += a * b;
    }
    let (a0, b0, an, bn) = (x1[0], x2[0], x1[n - 1], x2[n - 1]);
    let h = path.dt;
    let s1 = h * (s1 + 0.5 * (a0 + an));
    let s2 = h * (s2 + 0.5 * (b0 + bn));
    let s11 = h * (s11 + 0.5 * (a0 * a0 + an * an));
    let s22 = h * (s22 + 0.5 * (b0 * b0 + bn * bn));
    let s12 = h * (s12 + 0.5 * (a0 * b0 + an * bn));
    let t = h * (n - 1) as f64;
    let y11 = s11 - s1 * s1 / t;
    let y22 = s22 - s2 * s2 / t;
    let y12 = s12 - s1 * s2 / t;
    if !(y11 > 0.0 && y22 > 0.0) {
        return Err(SimError::Degenerate { y11, y22 });
    }
    let raw = y12 / (y11 * y22).sqrt();
    debug_assert!(raw.abs() <= 1.0 + 1e-12, "Cauchy–Schwarz violated: {raw}");
    Ok(RhoSample {
        rho: raw.clamp(-1.0, 1.0),
        y11,
        y12,
        y22,
        cross: s12,
    })
}

/// All per-path samples in path order, plus the number of rejected paths.
pub fn sample_paths(cfg: &SimConfig) -> Result<(Vec<RhoSample>, usize), SimError> {
    cfg.validate()?;
    let dt = cfg.spec.horizon() / cfg.n_steps as f64;
    let results: Vec<Option<RhoSample>> = (0..cfg.n_paths)
        .into_par_iter()
        .map_init(
            || Path::with_steps(cfg.n_steps, dt),
            |path, i| {
                let mut rng = path_rng(cfg.seed, i as u64);
                fill_path(&cfg.spec, path, &mut rng);
                rho_of_path(path).ok()
            },
        )
        .collect();
    let rejected = results.iter().filter(|r| r.is_none()).count();
    Ok((results.into_iter().flatten().collect(), rejected))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub k: usize,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub estimates: Vec<MomentEstimate>,
    pub accepted: usize,
    pub rejected: usize,
}

/// Contiguous blocks of indices for the jackknife.
fn blocks(n: usize) -> Vec<std::ops::Range<usize>> {
    let b = JACKKNIFE_BLOCKS.min(n).max(1);
    (0..b).map(|i| (i * n / b)..((i + 1) * n / b)).collect()
}

/// Jackknife over contiguous blocks for a statistic of per-sample features,
/// given through their block sums. Returns the full-sample statistic and its
/// standard error.
pub fn jackknife<F>(features: &[Vec<f64>], stat: F) -> (f64, f64)
where
    F: Fn(&[f64], f64) -> f64,
{
    let n = features.first().map_or(0, |f| f.len());
    let bl = blocks(n);
    let block_sums: Vec<Vec<f64>> = bl
        .iter()
        .map(|r| features.iter().map(|f| pairwise_sum(&f[r.clone()])).collect())
        .collect();
    let totals: Vec<f64> = (0..features.len())
        .map(|j| pairwise_sum(&block_sums.iter().map(|b| b[j]).collect::<Vec<_>>()))
        .collect();
    let full = stat(&totals, n as f64);
    let nb = bl.len();
    if nb < 2 {
        return (full, f64::NAN);
    }
    let loo: Vec<f64> = bl
        .iter()
        .zip(&block_sums)
        .map(|(r, bs)| {
            let rest: Vec<f64> = totals.iter().zip(bs).map(|(t, b)| t - b).collect();
            stat(&rest, (n - r.len()) as f64)
        })
        .collect();
    let mean = pairwise_sum(&loo) / nb as f64;
    let ss = pairwise_sum(&loo.iter().map(|x| (x - mean) * (x - mean)).collect::<Vec<_>>());
    (full, ((nb - 1) as f64 / nb as f64 * ss).sqrt())
}

/// Sample mean of `values` with a jackknife standard error.
pub fn mean_with_se(values: &[f64]) -> (f64, f64) {
    jackknife(&[values.to_vec()], |s, n| s[0] / n)
}

/// Sample variance of `values` with a jackknife standard error.
pub fn variance_with_se(values: &[f64]) -> (f64, f64) {
    let sq: Vec<f64> = values.iter().map(|x| x * x).collect();
    jackknife(&[values.to_vec(), sq], |s, n| {
        let m = s[0] / n;
        (s[1] / n - m * m) * n / (n - 1.0)
    })
}

/// Monte Carlo estimates of `E ρ^k` for each requested order.
pub fn estimate_moments(cfg: &SimConfig, orders: &[usize]) -> Result<SimulationResult, SimError> {
    if let Some(&k) = orders.iter().find(|&&k| k == 0 || k > 16) {
        return Err(SimError::InvalidOrder(k));
    }
    let (samples, rejected) = sample_paths(cfg)?;
    let rho: Vec<f64> = samples.iter().map(|s| s.rho).collect();
    Ok(SimulationResult {
        estimates: moments_of_samples(&rho, orders),
        accepted: rho.len(),
        rejected,
    })
}

pub fn moments_of_samples(rho: &[f64], orders: &[usize]) -> Vec<MomentEstimate> {
    orders
        .iter()
        .map(|&k| {
            let pw: Vec<f64> = rho.iter().map(|r| r.powi(k as i32)).collect();
            let (estimate, std_error) = mean_with_se(&pw);
            MomentEstimate { k, estimate, std_error }
        })
        .collect()
}

/// Kolmogorov–Smirnov distance between a sample and `N(0, variance)`.
pub fn ks_distance_normal(samples: &[f64], variance: f64) -> f64 {
    let normal = Normal::new(0.0, variance.sqrt()).expect("positive variance");
    let mut x = samples.to_vec();
    x.sort_by(|a, b| a.total_cmp(b));
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let f = normal.cdf(xi);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltConfig {
    pub n_paths: usize,
    pub seed: u64,
    /// Time steps per unit of time.
    pub steps_per_unit: usize,
}

impl Default for CltConfig {
    fn default() -> Self {
        CltConfig {
            n_paths: 100_000,
            seed: 1,
            steps_per_unit: 2048,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub horizon: f64,
    /// `Var(√T ρ(T))`
    pub var_scaled_rho: f64,
    pub var_scaled_rho_se: f64,
    /// `Var(T^{-1/2} ∫ X₁ X₂)`
    pub var_scaled_cross: f64,
    pub var_scaled_cross_se: f64,
    /// Mean of `Y₁₁ / T`
    pub mean_y11_over_t: f64,
    pub mean_y11_over_t_se: f64,
    pub mean_rho: f64,
    pub mean_rho_se: f64,
    /// KS distance of `√T ρ` to `N(0, 1/(2r))`
    pub ks_half_rate: f64,
    /// KS distance of `√T ρ` to `N(0, 1/r)`
    pub ks_rate: f64,
}

/// Large-horizon behaviour of `ρ` for two independent OU processes.
pub fn clt_experiment(r: f64, horizons: &[f64], cfg: &CltConfig) -> Result<Vec<CltRow>, SimError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(SimError::InvalidConfig(format!("rate must be positive (got {r})")));
    }
    if horizons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SimError::InvalidConfig("horizons must be increasing".into()));
    }
    horizons
        .iter()
        .map(|&t| {
            let spec = ProcessSpec::ou(r, t).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
            let sim = SimConfig {
                n_paths: cfg.n_paths,
                n_steps: (cfg.steps_per_unit as f64 * t).round().max(2.0) as usize,
                seed: cfg.seed,
                spec,
            };
            let (samples, _) = sample_paths(&sim)?;
            let st = t.sqrt();
            let scaled: Vec<f64> = samples.iter().map(|s| st * s.rho).collect();
            let cross: Vec<f64> = samples.iter().map(|s| s.cross / st).collect();
            let y11: Vec<f64> = samples.iter().map(|s| s.y11 / t).collect();
            let rho: Vec<f64> = samples.iter().map(|s| s.rho).collect();
            let (var_scaled_rho, var_scaled_rho_se) = variance_with_se(&scaled);
            let (var_scaled_cross, var_scaled_cross_se) = variance_with_se(&cross);
            let (mean_y11_over_t, mean_y11_over_t_se) = mean_with_se(&y11);
            let (mean_rho, mean_rho_se) = mean_with_se(&rho);
            Ok(CltRow {
                horizon: t,
                var_scaled_rho,
                var_scaled_rho_se,
                var_scaled_cross,
                var_scaled_cross_se,
                mean_y11_over_t,
                mean_y11_over_t_se,
                mean_rho,
                mean_rho_se,
                ks_half_rate: ks_distance_normal(&scaled, 0.5 / r),
                ks_rate: ks_distance_normal(&scaled, 1.0 / r),
            })
        })
        .collect()
}
