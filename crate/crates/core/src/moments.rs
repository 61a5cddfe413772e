//! Moments of the empirical correlation from the joint transform.
//!
//! With `c_k(s11, s22)` the `k`-th Taylor coefficient of
//! `ε ↦ φ(s11, ε, s22)` and `s11 = u²`, `s22 = v²`,
//!
//! ```text
//! E ρ^k = (-1)^k k! · 4 / (2^k Γ(k/2)²) ∫₀^∞∫₀^∞ u^{k-1} v^{k-1} c_k(u², v²) du dv.
//! ```
//!
//! The quadrant is truncated where the transform has decayed by `e^{-100}`
//! and integrated with a tensor rule that is refined level by level until two
//! successive levels agree to `abs_tol`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mgf::{Mgf, MgfError, ProcessKind, ProcessSpec};
use crate::quad::{composite_gauss_legendre, exp_sinh, pairwise_sum, tanh_sinh_unit, Rule};
use crate::special::{gamma, ln_sinh};

pub const MAX_ORDER: usize = 16;

/// Decay of the transform, in e-folds, at the truncation radius.
const TAIL_EFOLDS: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomentError {
    #[error("moment order {0} is not supported (1..={MAX_ORDER})")]
    UnsupportedOrder(usize),
    #[error("quadrature for order {k} did not converge by level {level} (last change {delta:e})")]
    NotConverged { k: usize, level: usize, delta: f64 },
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Mgf(#[from] MgfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Double-exponential (exp–sinh) rule on each half-line.
    TanhSinh2d,
    /// Composite Gauss–Legendre panels on the truncated quadrant.
    GaussLegendrePanels,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub max_level: usize,
    pub scheme: Scheme,
    /// Integrate over `u <= v` only when the integrand is exchangeable.
    pub symmetry_fold: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-8,
            max_level: 12,
            scheme: Scheme::GaussLegendrePanels,
            symmetry_fold: true,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), MomentError> {
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(MomentError::InvalidConfig(format!(
                "abs_tol must be positive (got {})",
                self.abs_tol
            )));
        }
        if self.max_level < 4 {
            return Err(MomentError::InvalidConfig(format!(
                "max_level must be at least 4 (got {})",
                self.max_level
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    JetQuadrature,
    ExplicitM2,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    pub k: usize,
    pub value: f64,
    pub err_estimate: f64,
    pub route: Route,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanVariance {
    pub mean: MomentResult,
    pub second: MomentResult,
    pub variance: f64,
}

/// `(-1)^k k! · 4 / (2^k Γ(k/2)²)`.
pub fn prefactor(k: usize) -> f64 {
    let fact: f64 = (1..=k).map(|n| n as f64).product();
    let g = gamma(0.5 * k as f64);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * fact * 4.0 / (2f64.powi(k as i32) * g * g)
}

/// Radius beyond which the integrand is below `e^{-100}` of its scale.
pub fn truncation_radius(spec: &ProcessSpec) -> f64 {
    let t = spec.horizon();
    let base = match spec.kind() {
        ProcessKind::Ou { r } => {
            // (√(r² + U²) - r) T / 2 = TAIL_EFOLDS
            let a = r + 2.0 * TAIL_EFOLDS / t;
            (a * a - r * r).sqrt()
        }
        _ => 2.0 * TAIL_EFOLDS / t,
    };
    base / (1.0 - spec.correlation().abs()).sqrt()
}

/// `u^{k-1} v^{k-1} c_k(u², v²)`.
pub fn integrand(mgf: &Mgf, k: usize, u: f64, v: f64) -> Result<f64, MgfError> {
    let jet = mgf.cross_jet(u * u, v * v, k)?;
    let ck = jet.coeff(k);
    if ck == 0.0 {
        return Ok(0.0);
    }
    Ok(ck * (u * v).powi(k as i32 - 1))
}

fn panel_breakpoints(radius: f64) -> Vec<f64> {
    // designed on [0, 200]: widths grow geometrically from 1/4 and are capped
    // at 12, then rescaled to the radius
    let mut b = vec![0.0];
    let mut x: f64 = 0.0;
    while x < 200.0 {
        x = (x + (0.3 * x).clamp(0.25, 12.0)).min(200.0);
        b.push(x);
    }
    b.iter().map(|&p| p * radius / 200.0).collect()
}

fn level_rule(scheme: Scheme, level: usize, radius: f64) -> Rule {
    match scheme {
        Scheme::GaussLegendrePanels => {
            composite_gauss_legendre(&panel_breakpoints(radius), 2 * level + 2)
        }
        Scheme::TanhSinh2d => {
            let h = 2f64.powi(2 - level as i32);
            let mut rule = exp_sinh(h, 4.0, radius / 40.0);
            let keep: Vec<usize> = (0..rule.len())
                .filter(|&i| rule.nodes[i] <= 1.5 * radius && rule.nodes[i] > 1e-150)
                .collect();
            rule.nodes = keep.iter().map(|&i| rule.nodes[i]).collect();
            rule.weights = keep.iter().map(|&i| rule.weights[i]).collect();
            rule
        }
    }
}

/// Tensor-product sum of `f(u, v)` over one rule on both axes, rows in
/// parallel, reduced in a fixed order.
fn tensor_sum<F>(rule: &Rule, fold: bool, f: F) -> Result<f64, MgfError>
where
    F: Fn(f64, f64) -> Result<f64, MgfError> + Sync,
{
    let n = rule.len();
    let rows: Result<Vec<f64>, MgfError> = (0..n)
        .into_par_iter()
        .map(|i| {
            let u = rule.nodes[i];
            let start = if fold { i } else { 0 };
            let mut terms = Vec::with_capacity(n - start);
            for j in start..n {
                let mult = if fold && j != i { 2.0 } else { 1.0 };
                let val = f(u, rule.nodes[j])?;
                terms.push(mult * rule.weights[j] * val);
            }
            Ok(rule.weights[i] * pairwise_sum(&terms))
        })
        .collect();
    Ok(pairwise_sum(&rows?))
}

/// `E ρ^k` by differentiating the closed-form transform.
pub fn moment(spec: &ProcessSpec, k: usize, cfg: &QuadratureConfig) -> Result<MomentResult, MomentError> {
    cfg.validate()?;
    if k == 0 || k > MAX_ORDER {
        return Err(MomentError::UnsupportedOrder(k));
    }
    if spec.is_symmetric() && k % 2 == 1 {
        return Ok(MomentResult {
            k,
            value: 0.0,
            err_estimate: 0.0,
            route: Route::JetQuadrature,
        });
    }
    let mgf = Mgf::new(*spec);
    let radius = truncation_radius(spec);
    let fold = cfg.symmetry_fold && spec.is_symmetric();
    let pre = prefactor(k);
    let eval = |level: usize| -> Result<f64, MomentError> {
        let rule = level_rule(cfg.scheme, level, radius);
        Ok(pre * tensor_sum(&rule, fold, |u, v| integrand(&mgf, k, u, v))?)
    };
    refine(k, cfg, Route::JetQuadrature, eval)
}

fn refine<F>(k: usize, cfg: &QuadratureConfig, route: Route, eval: F) -> Result<MomentResult, MomentError>
where
    F: Fn(usize) -> Result<f64, MomentError>,
{
    let mut prev = eval(3)?;
    let mut delta = f64::INFINITY;
    for level in 4..=cfg.max_level {
        let cur = eval(level)?;
        delta = (cur - prev).abs();
        if delta <= cfg.abs_tol {
            return Ok(MomentResult {
                k,
                value: cur,
                err_estimate: delta,
                route,
            });
        }
        prev = cur;
    }
    Err(MomentError::NotConverged {
        k,
        level: cfg.max_level,
        delta,
    })
}

/// `g(x) = (x coth x - 1)/x²`, regular at 0.
fn coth_term(x: f64) -> f64 {
    if x < 0.1 {
        let x2 = x * x;
        1.0 / 3.0 + x2 * (-1.0 / 45.0 + x2 * (2.0 / 945.0 + x2 * (-1.0 / 4725.0 + x2 * 2.0 / 93555.0)))
    } else {
        (1.0 / x.tanh() - 1.0 / x) / x
    }
}

fn coth_term_derivative(x: f64) -> f64 {
    if x < 0.1 {
        let x2 = x * x;
        x * (-2.0 / 45.0 + x2 * (8.0 / 945.0 + x2 * (-6.0 / 4725.0 + x2 * 16.0 / 93555.0)))
    } else {
        let s = x.sinh();
        let csch2 = if x > 300.0 { 0.0 } else { 1.0 / (s * s) };
        -csch2 / x - 1.0 / (x.tanh() * x * x) + 2.0 / (x * x * x)
    }
}

/// Integrand of the closed-form double integral for `E ρ²` of Brownian
/// motion, on `0 < u < v`:
///
/// ```text
/// uv√(uv) / ((v² - u²) √(sinh u sinh v)) · (g(u) - g(v))
/// ```
///
/// with `g(x) = 1/(x tanh x) - 1/x²`. `one_minus_t` is `1 - u/v`, passed
/// separately so the removable singularity at `u = v` is handled without
/// cancellation.
pub fn explicit_m2_integrand(u: f64, v: f64, one_minus_t: f64) -> f64 {
    let diff_over_gap = if one_minus_t < 1e-6 {
        // (g(u) - g(v)) / (v - u) -> -g'(midpoint)
        -coth_term_derivative(0.5 * (u + v))
    } else {
        (coth_term(u) - coth_term(v)) / (v * one_minus_t)
    };
    let uv = u * v;
    let sinh_part = (-0.5 * (ln_sinh(u) + ln_sinh(v))).exp();
    uv * uv.sqrt() * sinh_part * diff_over_gap / (u + v)
}

/// `E ρ²` for Brownian motion from the explicit double integral, with the
/// inner variable `u = t v` on a tanh–sinh rule.
pub fn moment2_explicit_bm(cfg: &QuadratureConfig) -> Result<MomentResult, MomentError> {
    cfg.validate()?;
    let radius = 2.0 * TAIL_EFOLDS;
    let eval = |level: usize| -> Result<f64, MomentError> {
        let outer = level_rule(cfg.scheme, level, radius);
        let h = 2f64.powi(2 - level as i32);
        let (inner, comp) = tanh_sinh_unit(h, 4.0);
        let rows: Vec<f64> = outer
            .nodes
            .par_iter()
            .zip(&outer.weights)
            .map(|(&v, &wv)| {
                let terms: Vec<f64> = inner
                    .nodes
                    .iter()
                    .zip(&comp)
                    .zip(&inner.weights)
                    .map(|((&t, &tc), &wt)| wt * v * explicit_m2_integrand(t * v, v, tc))
                    .collect();
                wv * pairwise_sum(&terms)
            })
            .collect();
        Ok(pairwise_sum(&rows))
    };
    refine(2, cfg, Route::ExplicitM2, eval)
}

/// Mean, second moment and variance of `ρ`.
pub fn mean_and_variance(spec: &ProcessSpec, cfg: &QuadratureConfig) -> Result<MeanVariance, MomentError> {
    let mean = moment(spec, 1, cfg)?;
    let second = moment(spec, 2, cfg)?;
    Ok(MeanVariance {
        mean,
        second,
        variance: second.value - mean.value * mean.value,
    })
}
