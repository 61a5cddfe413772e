//! Closed-form generating functions.
//!
//! For a scalar process `X` on `[0, T]` let
//! `ψ(θ²) = E exp(-½ θ² ∫ (X - X̄)² dt)`. For two independent copies the
//! joint transform `φ(S) = E exp(-½ Σ s_ij Y_ij)` factorizes as
//! `ψ(θ₁²) ψ(θ₂²)` over the eigenvalues of `S`; for correlated Brownian motion
//! the eigenvalues of the congruence `AᵀSA` (with `X = AW`) take their place.
//!
//! Every `ψ` used here has the form `ψ(x) = exp(ℓ) · G(α (x + β))^p` with `G`
//! entire and positive on `[0, ∞)`, built from the series
//!
//! ```text
//! F(z)  = Σ z^k / (2k+1)!          = sinh(√z)/√z
//! C₁(z) = Σ z^k / (2k+2)!          = (cosh √z - 1)/z
//! E₁(z) = Σ (2k+2) z^k / (2k+3)!   = (cosh √z - F)/z
//! E₂(z) = Σ (2k+2) z^k / (2k+4)!   = (F - 2 C₁)/z
//! ```
//!
//! Taylor coefficients of `ψ` about any base point are therefore available in
//! closed form, scaled by half the distance to the nearest zero of `G`. The
//! jet evaluation of `φ` never takes square roots of a vanishing discriminant:
//! near the diagonal `s11 = s22` the symmetric product `ψ(μ+√w) ψ(μ-√w)` is
//! expanded as a power series in `w` instead.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jet::{Jet, JetError};
use crate::special::{binomial, ln_factorials, ln_sinh, ln_sinhc, sinhc};

/// Above this value of `z₀ = α(x₀ + β)` the Taylor coefficients of `G` are
/// computed from exponentially scaled closed forms instead of power series.
const SERIES_SWITCH: f64 = 2000.0;

/// Number of precomputed series coefficients of `G`.
const MAX_SERIES_TERMS: usize = 640;

/// The direct eigenvalue route is used when `√w ≥ DIRECT_RATIO · ρ(μ)`.
const DIRECT_RATIO: f64 = 0.45;

/// Terms of the symmetric `w`-series beyond the jet order.
const W_SERIES_BASE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ProcessError {
    #[error("mean-reversion rate must be positive and finite (got {0})")]
    InvalidRate(f64),
    #[error("correlation must lie strictly inside (-1, 1) (got {0})")]
    InvalidCorrelation(f64),
    #[error("horizon must be positive and finite (got {0})")]
    InvalidHorizon(f64),
    #[error("the Brownian bridge is pinned on [0, 1]; horizon must be 1 (got {0})")]
    BridgeHorizon(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MgfError {
    #[error("generating function argument {0} lies outside the admissible domain")]
    OutOfDomain(f64),
    #[error("eigenvalue branch is not smooth here: the discriminant vanishes at the base point")]
    NonSmoothEigen,
    #[error("matrix is not positive semidefinite (eigenvalue {0})")]
    NotPositiveSemidefinite(f64),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Process family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessKind {
    Bm,
    Ou { r: f64 },
    Bb,
    CorrelatedBm { c: f64 },
}

/// A validated process family together with its horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    kind: ProcessKind,
    horizon: f64,
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind, horizon: f64) -> Result<Self, ProcessError> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(ProcessError::InvalidHorizon(horizon));
        }
        match kind {
            ProcessKind::Ou { r } if !(r.is_finite() && r > 0.0) => {
                return Err(ProcessError::InvalidRate(r));
            }
            ProcessKind::CorrelatedBm { c } if !(c.is_finite() && c.abs() < 1.0) => {
                return Err(ProcessError::InvalidCorrelation(c));
            }
            ProcessKind::Bb if horizon != 1.0 => return Err(ProcessError::BridgeHorizon(horizon)),
            _ => {}
        }
        Ok(ProcessSpec { kind, horizon })
    }

    pub fn bm(horizon: f64) -> Result<Self, ProcessError> {
        Self::new(ProcessKind::Bm, horizon)
    }

    pub fn ou(r: f64, horizon: f64) -> Result<Self, ProcessError> {
        Self::new(ProcessKind::Ou { r }, horizon)
    }

    pub fn bb() -> Self {
        ProcessSpec {
            kind: ProcessKind::Bb,
            horizon: 1.0,
        }
    }

    pub fn correlated_bm(c: f64, horizon: f64) -> Result<Self, ProcessError> {
        Self::new(ProcessKind::CorrelatedBm { c }, horizon)
    }

    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Independent components with identical laws: `ρ` is symmetric about 0
    /// and `φ` is exchangeable in `s11 ↔ s22`.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self.kind, ProcessKind::CorrelatedBm { .. })
    }

    /// Correlation of the driving noises (0 for the independent families).
    pub fn correlation(&self) -> f64 {
        match self.kind {
            ProcessKind::CorrelatedBm { c } => c,
            _ => 0.0,
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            ProcessKind::Bm => format!("bm(T={})", self.horizon),
            ProcessKind::Ou { r } => format!("ou(r={r}, T={})", self.horizon),
            ProcessKind::Bb => "bb".to_string(),
            ProcessKind::CorrelatedBm { c } => format!("cbm(c={c}, T={})", self.horizon),
        }
    }
}

/// Symmetric 2×2 matrix `[[s11, s12], [s12, s22]]` over scalars or jets.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix2<T> {
    pub s11: T,
    pub s12: T,
    pub s22: T,
}

impl<T> SymMatrix2<T> {
    pub fn new(s11: T, s12: T, s22: T) -> Self {
        SymMatrix2 { s11, s12, s22 }
    }
}

impl SymMatrix2<f64> {
    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn trace(&self) -> f64 {
        self.s11 + self.s22
    }

    pub fn det(&self) -> f64 {
        self.s11 * self.s22 - self.s12 * self.s12
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self::new(t * self.s11, t * self.s12, t * self.s22)
    }

    /// The congruence `AᵀSA` with `A = [[1, 0], [c, √(1-c²)]]`, i.e. the
    /// matrix of the quadratic form `X·SX` written in independent coordinates
    /// `W` with `X = AW`.
    pub fn decorrelated(&self, c: f64) -> Self {
        let sc = (1.0 - c * c).sqrt();
        let a = self.s11 + 2.0 * c * self.s12 + c * c * self.s22;
        let b = sc * (self.s12 + c * self.s22);
        let d = sc * sc * self.s22;
        Self::new(a, b, d)
    }
}

/// Eigenvalues `(θ₁², θ₂²)` of `S`, larger first.
pub fn eigen_theta(s: &SymMatrix2<f64>) -> (f64, f64) {
    let half_tr = 0.5 * s.trace();
    let half_diff = 0.5 * (s.s11 - s.s22);
    let root = half_diff.hypot(s.s12);
    let t1 = half_tr + root;
    let t2 = if t1 > 0.0 { s.det() / t1 } else { 0.0 };
    (t1, t2)
}

/// Jet version of [`eigen_theta`]; fails where the discriminant vanishes.
pub fn eigen_theta_jet(s: &SymMatrix2<Jet>) -> Result<(Jet, Jet), MgfError> {
    let half_tr = (&s.s11 + &s.s22).scale(0.5);
    let half_diff = (&s.s11 - &s.s22).scale(0.5);
    let w = &(&half_diff * &half_diff) + &(&s.s12 * &s.s12);
    let det = &(&s.s11 * &s.s22) - &(&s.s12 * &s.s12);
    eigen_pair_jet(&half_tr, &w, &det)
}

/// Eigenvalues `(λ₁², λ₂²)` of the correlated family,
/// `½{s11 + s22 + 2c s12 ± √((s11-s22)² + 4(c s11 + s12)(c s22 + s12))}`.
pub fn eigen_lambda(s: &SymMatrix2<f64>, c: f64) -> (f64, f64) {
    eigen_theta(&s.decorrelated(c))
}

/// `μ ± √w` pair with the smaller root taken as `det / θ₁²`, where
/// `det = μ² - w` is supplied in a cancellation-free form.
fn eigen_pair_jet(mu: &Jet, w: &Jet, det: &Jet) -> Result<(Jet, Jet), MgfError> {
    if w.value() <= 0.0 {
        return Err(MgfError::NonSmoothEigen);
    }
    let root = w.sqrt()?;
    let t1 = mu + &root;
    let t2 = det.checked_div(&t1)?;
    Ok((t1, t2))
}

/// `λ² = μ ± √w` of the correlated family written directly in the entries of
/// `S`.
#[derive(Debug, Clone)]
pub struct CorrelatedEigen {
    pub mu: Jet,
    pub w: Jet,
    /// `λ₁² λ₂² = (1 - c²) det S`
    pub det: Jet,
}

impl CorrelatedEigen {
    pub fn new(s: &SymMatrix2<Jet>, c: f64) -> Self {
        let mu = (&(&s.s11 + &s.s22) + &s.s12.scale(2.0 * c)).scale(0.5);
        let d = &s.s11 - &s.s22;
        let p = &s.s11.scale(c) + &s.s12;
        let q = &s.s22.scale(c) + &s.s12;
        let w = (&(&d * &d) + &(&p * &q).scale(4.0)).scale(0.25);
        let det = (&(&s.s11 * &s.s22) - &(&s.s12 * &s.s12)).scale(1.0 - c * c);
        CorrelatedEigen { mu, w, det }
    }
}

/// `(θT / sinh θT)^{1/2}` at `θ² = theta_sq`.
pub fn psi_bm(theta_sq: f64, horizon: f64) -> Result<f64, MgfError> {
    check_arg(theta_sq)?;
    let x = theta_sq.max(0.0).sqrt() * horizon;
    Ok((-0.5 * ln_sinhc(x)).exp())
}

/// Ornstein–Uhlenbeck transform with `η = √(r² + θ²)`:
/// `√T e^{rT/2} {(θ²/η⁴)[2r(cosh ηT - 1) + η sinh ηT] + (r²T/η³)[η cosh ηT + r sinh ηT]}^{-1/2}`.
pub fn psi_ou(theta_sq: f64, r: f64, horizon: f64) -> Result<f64, MgfError> {
    check_arg(theta_sq)?;
    let th2 = theta_sq.max(0.0);
    let eta = (r * r + th2).sqrt();
    let et = eta * horizon;
    // everything scaled by e^{-ηT}
    let q = (-et).exp();
    let ch = 0.5 * (1.0 + q * q);
    let sh = 0.5 * (1.0 - q * q);
    let eta2 = eta * eta;
    let bracket = th2 / (eta2 * eta2) * (2.0 * r * (ch - q) + eta * sh)
        + r * r * horizon / (eta2 * eta) * (eta * ch + r * sh);
    Ok((0.5 * horizon.ln() + 0.5 * r * horizon - 0.5 * et - 0.5 * bracket.ln()).exp())
}

/// Brownian bridge transform `θ / (2 sinh(θ/2))`.
pub fn psi_bb(theta_sq: f64) -> Result<f64, MgfError> {
    check_arg(theta_sq)?;
    let x = 0.5 * theta_sq.max(0.0).sqrt();
    if x < 1.0 {
        Ok(1.0 / sinhc(x))
    } else {
        Ok((x.ln() - ln_sinh(x)).exp())
    }
}

fn check_arg(theta_sq: f64) -> Result<(), MgfError> {
    if theta_sq.is_nan() || theta_sq < -1e-12 {
        Err(MgfError::OutOfDomain(theta_sq))
    } else {
        Ok(())
    }
}

/// The representation `ψ(x) = exp(ℓ) G(α(x+β))^p` of one family, with the
/// power-series coefficients of `G` precomputed in log space.
#[derive(Debug, Clone)]
pub struct PsiFamily {
    alpha: f64,
    beta: f64,
    exponent: f64,
    log_prefactor: f64,
    /// weights of F, C₁, E₁, E₂ in G
    weights: [f64; 4],
    /// zero of G closest to the origin, as a value of `x`
    x_sing: f64,
    ln_g: Vec<f64>,
}

impl PsiFamily {
    pub fn for_process(spec: &ProcessSpec) -> Self {
        let t = spec.horizon();
        match spec.kind() {
            ProcessKind::Bm | ProcessKind::CorrelatedBm { .. } => {
                Self::build(t * t, 0.0, -0.5, 0.0, [1.0, 0.0, 0.0, 0.0])
            }
            ProcessKind::Bb => Self::build(0.25, 0.0, -1.0, 0.0, [1.0, 0.0, 0.0, 0.0]),
            ProcessKind::Ou { r } => Self::build(
                t * t,
                r * r,
                -0.5,
                0.5 * t.ln() + 0.5 * r * t,
                [t, 2.0 * r * t * t, r * r * t * t * t, r * r * r * t * t * t * t],
            ),
        }
    }

    fn build(alpha: f64, beta: f64, exponent: f64, log_prefactor: f64, weights: [f64; 4]) -> Self {
        let lf = ln_factorials(2 * MAX_SERIES_TERMS + 8);
        let ln_g = (0..MAX_SERIES_TERMS)
            .map(|k| {
                let two_k2 = (2 * k + 2) as f64;
                let logs = [
                    -lf[2 * k + 1],
                    -lf[2 * k + 2],
                    two_k2.ln() - lf[2 * k + 3],
                    two_k2.ln() - lf[2 * k + 4],
                ];
                log_sum_exp(&weights, &logs)
            })
            .collect();
        let z_sing = if weights[1..].iter().all(|&w| w == 0.0) {
            -std::f64::consts::PI.powi(2)
        } else {
            first_negative_zero(&weights)
        };
        PsiFamily {
            alpha,
            beta,
            exponent,
            log_prefactor,
            weights,
            x_sing: z_sing / alpha - beta,
            ln_g,
        }
    }

    /// Location of the singularity of `ψ` nearest to the positive axis.
    pub fn singularity(&self) -> f64 {
        self.x_sing
    }

    /// Radius of convergence of the Taylor series of `ψ` about `x0`.
    pub fn radius(&self, x0: f64) -> f64 {
        x0 - self.x_sing
    }

    /// Scalar value of `ψ(x)`.
    pub fn value(&self, x: f64) -> Result<f64, MgfError> {
        Ok(self.taylor(x, 1.0, 0)?[0])
    }

    /// Scaled Taylor coefficients `t_m = h^m ψ^{(m)}(x0) / m!` for `m <= n`.
    pub fn taylor(&self, x0: f64, h: f64, n: usize) -> Result<Vec<f64>, MgfError> {
        Ok(Jet::from_coeffs(self.ln_taylor(x0, h, n)?).exp().into_coeffs())
    }

    /// Scaled Taylor coefficients of `ln ψ` about `x0`.
    pub fn ln_taylor(&self, x0: f64, h: f64, n: usize) -> Result<Vec<f64>, MgfError> {
        if !(x0.is_finite() && x0 > -1e-12 * (1.0 + self.x_sing.abs())) {
            return Err(MgfError::OutOfDomain(x0));
        }
        let z0 = self.alpha * (x0 + self.beta);
        let dz = self.alpha * h;
        let ln_g_jet = if z0 <= SERIES_SWITCH {
            self.ln_g_series(z0, dz, n)?
        } else {
            self.ln_g_scaled(z0, dz, n)?
        };
        let l = ln_g_jet.scale(self.exponent).add_scalar(self.log_prefactor);
        Ok(l.into_coeffs())
    }

    fn ln_g_series(&self, z0: f64, dz: f64, n: usize) -> Result<Jet, MgfError> {
        if n + 1 >= MAX_SERIES_TERMS {
            return Err(MgfError::OutOfDomain(z0));
        }
        let ln_dz = dz.ln();
        let mut coeffs = Vec::with_capacity(n + 1);
        for m in 0..=n {
            let mut term = (self.ln_g[m] + m as f64 * ln_dz).exp();
            let mut sum = term;
            let mut l = 0;
            while m + l + 1 < MAX_SERIES_TERMS {
                let ratio = (self.ln_g[m + l + 1] - self.ln_g[m + l]).exp();
                term *= z0 * ratio * (m + l + 1) as f64 / (l + 1) as f64;
                sum += term;
                l += 1;
                if term.abs() <= 1e-18 * sum.abs() {
                    break;
                }
            }
            coeffs.push(sum);
        }
        Ok(Jet::from_coeffs(coeffs).ln()?)
    }

    fn ln_g_scaled(&self, z0: f64, dz: f64, n: usize) -> Result<Jet, MgfError> {
        let mut zc = vec![0.0; n + 1];
        zc[0] = z0;
        if n >= 1 {
            zc[1] = dz;
        }
        let z = Jet::from_coeffs(zc);
        let y = z.sqrt()?;
        let q = (-&y).exp();
        let q2 = &q * &q;
        let ce = q2.add_scalar(1.0).scale(0.5);
        let se = (-&q2).add_scalar(1.0).scale(0.5);
        let f = se.checked_div(&y)?;
        let c1 = (&ce - &q).checked_div(&z)?;
        let e1 = (&ce - &f).checked_div(&z)?;
        let e2 = (&f - &c1.scale(2.0)).checked_div(&z)?;
        let [wf, wc, w1, w2] = self.weights;
        let g = &(&f.scale(wf) + &c1.scale(wc)) + &(&e1.scale(w1) + &e2.scale(w2));
        Ok(&y + &g.ln()?)
    }

    /// `ψ` applied to a jet argument.
    pub fn eval_jet(&self, x: &Jet) -> Result<Jet, MgfError> {
        let x0 = x.value();
        let h = 0.5 * self.radius(x0);
        let t = self.taylor(x0, h, x.order())?;
        Ok(x.scale(1.0 / h).compose(&t))
    }

    /// `ψ(μ + √w) ψ(μ - √w)` as a jet, choosing between the eigenvalue route
    /// and the symmetric power series in `w`.
    pub fn pair_product(&self, mu: &Jet, w: &Jet, det: &Jet) -> Result<Jet, MgfError> {
        let mu0 = mu.value();
        let w0 = w.value();
        let rho = self.radius(mu0);
        if !(rho > 0.0) {
            return Err(MgfError::OutOfDomain(mu0));
        }
        if w0 > 0.0 && w0.sqrt() >= DIRECT_RATIO * rho {
            let (t1, t2) = eigen_pair_jet(mu, w, det)?;
            return Ok(&self.eval_jet(&t1)? * &self.eval_jet(&t2)?);
        }
        self.pair_series(mu, w, rho)
    }

    /// `exp(L(μ+s) + L(μ-s))` with `L = ln ψ`: only the even Taylor
    /// coefficients of `L` enter, so `√w` never appears and nothing cancels.
    fn pair_series(&self, mu: &Jet, w: &Jet, rho: f64) -> Result<Jet, MgfError> {
        let order = mu.order();
        let h = 0.5 * rho;
        let n_terms = W_SERIES_BASE + order;
        let deg = 2 * n_terms;
        let mu_const = mu.coeffs()[1..].iter().all(|&c| c == 0.0);
        let top = if mu_const { deg } else { deg + order };
        let t = self.ln_taylor(mu.value(), h, top)?;
        // even coefficients of L about the moving point μ(ε)
        let ell: Vec<Jet> = if mu_const {
            (0..=n_terms).map(|j| Jet::constant(t[2 * j], order)).collect()
        } else {
            let delta = mu.perturbation().scale(1.0 / h);
            let mut powers = vec![Jet::constant(1.0, order)];
            for l in 1..=order {
                let next = &powers[l - 1] * &delta;
                powers.push(next);
            }
            (0..=n_terms)
                .map(|j| {
                    let i = 2 * j;
                    let mut acc = Jet::constant(0.0, order);
                    for (l, p) in powers.iter().enumerate() {
                        acc += &p.scale(t[i + l] * binomial(i + l, l));
                    }
                    acc
                })
                .collect()
        };
        let omega = w.scale(1.0 / (h * h));
        let mut acc = ell[n_terms].clone();
        for e in ell[..n_terms].iter().rev() {
            acc = &(&acc * &omega) + e;
        }
        Ok(acc.scale(2.0).exp())
    }
}

fn log_sum_exp(weights: &[f64; 4], logs: &[f64; 4]) -> f64 {
    let m = weights
        .iter()
        .zip(logs)
        .filter(|(w, _)| **w > 0.0)
        .map(|(_, l)| *l)
        .fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = weights
        .iter()
        .zip(logs)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, l)| w * (l - m).exp())
        .sum();
    m + s.ln()
}

/// `Σ wᵢ Gᵢ(z)` for `z < 0` through the trigonometric closed forms.
fn g_negative(weights: &[f64; 4], z: f64) -> f64 {
    let om = (-z).sqrt();
    let c = om.cos();
    let f = om.sin() / om;
    let c1 = (c - 1.0) / z;
    let e1 = (c - f) / z;
    let e2 = (f - 2.0 * c1) / z;
    weights[0] * f + weights[1] * c1 + weights[2] * e1 + weights[3] * e2
}

/// Largest zero of `G` on the negative axis, by scanning down from `-π²` and
/// bisecting the first sign change.
fn first_negative_zero(weights: &[f64; 4]) -> f64 {
    let mut hi = -std::f64::consts::PI.powi(2) * 0.999;
    let step = 0.25;
    debug_assert!(g_negative(weights, hi) > 0.0);
    loop {
        let lo = hi - step;
        let g_lo = g_negative(weights, lo);
        if g_lo <= 0.0 {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if g_negative(weights, mid) > 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
                if b - a < 1e-14 * a.abs() {
                    break;
                }
            }
            return 0.5 * (a + b);
        }
        hi = lo;
        assert!(hi > -1e4, "no zero of the generating function found");
    }
}

/// Joint transform `φ(S)` of one process family.
#[derive(Debug, Clone)]
pub struct Mgf {
    spec: ProcessSpec,
    psi: PsiFamily,
}

impl Mgf {
    pub fn new(spec: ProcessSpec) -> Self {
        Mgf {
            spec,
            psi: PsiFamily::for_process(&spec),
        }
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn psi_family(&self) -> &PsiFamily {
        &self.psi
    }

    /// One-dimensional transform `ψ(θ²)` by its closed form.
    pub fn psi(&self, theta_sq: f64) -> Result<f64, MgfError> {
        let t = self.spec.horizon();
        match self.spec.kind() {
            ProcessKind::Bm | ProcessKind::CorrelatedBm { .. } => psi_bm(theta_sq, t),
            ProcessKind::Ou { r } => psi_ou(theta_sq, r, t),
            ProcessKind::Bb => psi_bb(theta_sq),
        }
    }

    /// `φ(S)` by the closed form.
    pub fn phi(&self, s: &SymMatrix2<f64>) -> Result<f64, MgfError> {
        let m = match self.spec.kind() {
            ProcessKind::CorrelatedBm { c } => s.decorrelated(c),
            _ => s.clone(),
        };
        let (t1, t2) = eigen_theta(&m);
        let scale = t1.abs().max(1.0);
        if t2 < -1e-12 * scale || m.s11 < -1e-12 * scale || m.s22 < -1e-12 * scale {
            return Err(MgfError::NotPositiveSemidefinite(t2));
        }
        Ok(self.psi(t1)? * self.psi(t2.max(0.0))?)
    }

    /// `φ(S)` for a matrix of jets.
    pub fn phi_jet(&self, s: &SymMatrix2<Jet>) -> Result<Jet, MgfError> {
        let (mu, w, det) = match self.spec.kind() {
            ProcessKind::CorrelatedBm { c } => {
                let e = CorrelatedEigen::new(s, c);
                (e.mu, e.w, e.det)
            }
            _ => {
                let mu = (&s.s11 + &s.s22).scale(0.5);
                let d = (&s.s11 - &s.s22).scale(0.5);
                let w = &(&d * &d) + &(&s.s12 * &s.s12);
                let det = &(&s.s11 * &s.s22) - &(&s.s12 * &s.s12);
                (mu, w, det)
            }
        };
        self.psi.pair_product(&mu, &w, &det)
    }

    /// Taylor coefficients of `ε ↦ φ(s11, ε, s22)` at `ε = 0` up to `order`,
    /// where `ε` multiplies the cross term with the sign used for moments:
    /// `φ(s11, ε, s22) = E exp(-½(s11 Y₁₁ + s22 Y₂₂) - ε Y₁₂)`.
    pub fn cross_jet(&self, s11: f64, s22: f64, order: usize) -> Result<Jet, MgfError> {
        let s = SymMatrix2::new(
            Jet::constant(s11, order),
            Jet::variable(0.0, order)?,
            Jet::constant(s22, order),
        );
        self.phi_jet(&s)
    }
}
