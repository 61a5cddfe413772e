//! Backward Riccati integration for linear diffusions.
//!
//! For `dX = σ dW + (B X + δ) dt` with `X(0) = 0` the conditional transform
//! `F(t, x) = E[exp(-½∫_t^T X·QX ds - ∫_t^T z·X ds) | X_t = x]` has the form
//! `exp(-½ x·V x - b·x - γ)` with
//!
//! ```text
//! V' = VΣV - (VB + BᵀV) - Q
//! b' = (VΣ - Bᵀ) b - Vδ - z
//! 2γ' = bᵀΣb - tr(VΣ) - δᵀb
//! ```
//!
//! and `V(T) = 0`, `b(T) = 0`, `γ(T) = 0`. The centred transform `φ(S)` is
//! recovered by mixing the linear coefficient over `a ~ N(0, S/T)`, which is
//! exact because `γ(0; a)` is quadratic in `a`.
//!
//! The integrator is classical RK4 on a fixed grid. For the bridge drift
//! `-X/(T-t)` the grid stops at `T - ε` and is geometric in `T - t`.

use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use thiserror::Error;

use crate::mgf::{Mgf, MgfError, ProcessKind, ProcessSpec, SymMatrix2};
use crate::quad::gauss_hermite;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiccatiError {
    #[error("V lost positive semidefiniteness at t = {t} (eigenvalue {eig:e}); the step is too coarse or the inputs are invalid")]
    NonPsd { t: f64, eig: f64 },
    #[error("state became non-finite at t = {0}")]
    NonFinite(f64),
    #[error("the Gaussian mixing integral diverges (eigenvalue {0:e} of the mixed form)")]
    DivergentMixing(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Drift matrix as a function of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drift {
    Constant(Matrix2<f64>),
    /// `-I/(T - t)`, singular at the horizon.
    Bridge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSde {
    pub sigma: Matrix2<f64>,
    pub drift: Drift,
    pub delta: Vector2<f64>,
    pub horizon: f64,
}

impl LinearSde {
    pub fn new(sigma: Matrix2<f64>, drift: Drift, delta: Vector2<f64>, horizon: f64) -> Result<Self, RiccatiError> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(RiccatiError::InvalidInput(format!("horizon {horizon}")));
        }
        if !sigma.iter().all(|x| x.is_finite()) {
            return Err(RiccatiError::InvalidInput("non-finite diffusion matrix".into()));
        }
        Ok(LinearSde {
            sigma,
            drift,
            delta,
            horizon,
        })
    }

    /// The pair of processes described by `spec`.
    pub fn for_process(spec: &ProcessSpec) -> Self {
        let t = spec.horizon();
        let (sigma, drift) = match spec.kind() {
            ProcessKind::Bm => (Matrix2::identity(), Drift::Constant(Matrix2::zeros())),
            ProcessKind::Ou { r } => (Matrix2::identity(), Drift::Constant(Matrix2::identity() * -r)),
            ProcessKind::Bb => (Matrix2::identity(), Drift::Bridge),
            ProcessKind::CorrelatedBm { c } => (
                Matrix2::new(1.0, 0.0, c, (1.0 - c * c).sqrt()),
                Drift::Constant(Matrix2::zeros()),
            ),
        };
        LinearSde {
            sigma,
            drift,
            delta: Vector2::zeros(),
            horizon: t,
        }
    }

    pub fn diffusion(&self) -> Matrix2<f64> {
        self.sigma * self.sigma.transpose()
    }

    fn drift_at(&self, t: f64) -> Matrix2<f64> {
        match self.drift {
            Drift::Constant(b) => b,
            Drift::Bridge => Matrix2::identity() * (-1.0 / (self.horizon - t)),
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self.drift, Drift::Bridge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub steps: usize,
    /// Distance from the horizon at which a singular drift is cut off.
    pub cutoff: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            steps: 10_000,
            cutoff: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiState {
    pub v: Matrix2<f64>,
    pub b: Vector2<f64>,
    pub gamma: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solution {
    pub state: RiccatiState,
    /// Step-halving estimate of the error in `γ(0)`.
    pub err_estimate: f64,
}

/// `V` together with one `(b, γ)` pair per linear coefficient `z`.
#[derive(Debug, Clone)]
struct System {
    v: Matrix2<f64>,
    b: Vec<Vector2<f64>>,
    g: Vec<f64>,
}

impl System {
    fn zero(n: usize) -> Self {
        System {
            v: Matrix2::zeros(),
            b: vec![Vector2::zeros(); n],
            g: vec![0.0; n],
        }
    }

    fn axpy(&self, k: f64, d: &System) -> System {
        System {
            v: self.v + d.v * k,
            b: self.b.iter().zip(&d.b).map(|(x, y)| x + y * k).collect(),
            g: self.g.iter().zip(&d.g).map(|(x, y)| x + y * k).collect(),
        }
    }

    fn is_finite(&self) -> bool {
        self.v.iter().all(|x| x.is_finite())
            && self.b.iter().all(|b| b.iter().all(|x| x.is_finite()))
            && self.g.iter().all(|x| x.is_finite())
    }
}

fn rhs(sde: &LinearSde, sig: &Matrix2<f64>, q: &Matrix2<f64>, zs: &[Vector2<f64>], t: f64, y: &System) -> System {
    let bm = sde.drift_at(t);
    let v = &y.v;
    let vs = v * sig;
    let v_dot = vs * v - (v * bm + bm.transpose() * v) - q;
    let lin = vs - bm.transpose();
    let vd = v * sde.delta;
    let tr = vs.trace();
    let b_dot = y.b.iter().zip(zs).map(|(b, z)| lin * b - vd - z).collect();
    let g_dot = y
        .b
        .iter()
        .map(|b| 0.5 * ((b.transpose() * sig * b)[0] - tr - sde.delta.dot(b)))
        .collect();
    System {
        v: v_dot,
        b: b_dot,
        g: g_dot,
    }
}

/// Time grid from the horizon (or the cut-off) back to 0.
fn grid(sde: &LinearSde, opts: &IntegrationOptions) -> Vec<f64> {
    let n = opts.steps.max(1);
    let t_end = sde.horizon;
    if sde.is_singular() {
        // T - t geometric from ε up to T
        let e = opts.cutoff;
        let ratio = (t_end / e).ln() / n as f64;
        (0..=n)
            .map(|i| if i == n { 0.0 } else { t_end - e * (ratio * i as f64).exp() })
            .collect()
    } else {
        (0..=n).map(|i| t_end * (1.0 - i as f64 / n as f64)).collect()
    }
}

fn integrate_system(
    sde: &LinearSde,
    q: &Matrix2<f64>,
    zs: &[Vector2<f64>],
    opts: &IntegrationOptions,
    mut observe: impl FnMut(f64, &System),
) -> Result<System, RiccatiError> {
    let sig = sde.diffusion();
    let ts = grid(sde, opts);
    let mut y = System::zero(zs.len());
    let scale = 1.0 + q.norm();
    observe(ts[0], &y);
    for w in ts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let dt = t1 - t0;
        let k1 = rhs(sde, &sig, q, zs, t0, &y);
        let k2 = rhs(sde, &sig, q, zs, t0 + 0.5 * dt, &y.axpy(0.5 * dt, &k1));
        let k3 = rhs(sde, &sig, q, zs, t0 + 0.5 * dt, &y.axpy(0.5 * dt, &k2));
        let k4 = rhs(sde, &sig, q, zs, t1, &y.axpy(dt, &k3));
        let mut next = y.axpy(dt / 6.0, &k1);
        next = next.axpy(dt / 3.0, &k2);
        next = next.axpy(dt / 3.0, &k3);
        next = next.axpy(dt / 6.0, &k4);
        let sym = 0.5 * (next.v[(0, 1)] + next.v[(1, 0)]);
        next.v[(0, 1)] = sym;
        next.v[(1, 0)] = sym;
        if !next.is_finite() {
            return Err(RiccatiError::NonFinite(t1));
        }
        let eig = SymmetricEigen::new(next.v).eigenvalues.min();
        if eig < -1e-10 * scale {
            return Err(RiccatiError::NonPsd { t: t1, eig });
        }
        y = next;
        observe(t1, &y);
    }
    Ok(y)
}

fn check_psd(q: &Matrix2<f64>) -> Result<(), RiccatiError> {
    if (q[(0, 1)] - q[(1, 0)]).abs() > 1e-12 * (1.0 + q.norm()) {
        return Err(RiccatiError::InvalidInput("Q must be symmetric".into()));
    }
    let eig = SymmetricEigen::new(*q).eigenvalues.min();
    if eig < -1e-12 * (1.0 + q.norm()) {
        return Err(RiccatiError::InvalidInput(format!("Q is not positive semidefinite (eigenvalue {eig:e})")));
    }
    Ok(())
}

/// Integrates from the horizon to 0 and returns the state at `t = 0`.
pub fn integrate_backward(
    sde: &LinearSde,
    q: &Matrix2<f64>,
    z: &Vector2<f64>,
    opts: &IntegrationOptions,
) -> Result<Solution, RiccatiError> {
    check_psd(q)?;
    let fine = integrate_system(sde, q, &[*z], opts, |_, _| {})?;
    let coarse_opts = IntegrationOptions {
        steps: (opts.steps / 2).max(1),
        ..*opts
    };
    let coarse = integrate_system(sde, q, &[*z], &coarse_opts, |_, _| {})?;
    Ok(Solution {
        state: RiccatiState {
            v: fine.v,
            b: fine.b[0],
            gamma: fine.g[0],
            t: 0.0,
        },
        err_estimate: (fine.g[0] - coarse.g[0]).abs() / 15.0,
    })
}

/// The whole backward trajectory, one state per grid point (horizon first).
pub fn trajectory(
    sde: &LinearSde,
    q: &Matrix2<f64>,
    z: &Vector2<f64>,
    opts: &IntegrationOptions,
) -> Result<Vec<RiccatiState>, RiccatiError> {
    check_psd(q)?;
    let mut out = Vec::with_capacity(opts.steps + 1);
    integrate_system(sde, q, &[*z], opts, |t, y| {
        out.push(RiccatiState {
            v: y.v,
            b: y.b[0],
            gamma: y.g[0],
            t,
        })
    })?;
    Ok(out)
}

/// `γ(0; a) = γ₀ + g·a + a·L a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaQuadratic {
    pub gamma0: f64,
    pub g: Vector2<f64>,
    pub l: Matrix2<f64>,
    /// Misfit of the quadratic at a seventh probe not used in the assembly.
    pub residual: f64,
}

impl GammaQuadratic {
    pub fn eval(&self, a: &Vector2<f64>) -> f64 {
        self.gamma0 + self.g.dot(a) + (a.transpose() * self.l * a)[0]
    }
}

/// Assembles `γ(0; a)` from six probe solves sharing one `V` trajectory.
pub fn gamma_quadratic(sde: &LinearSde, q: &Matrix2<f64>, opts: &IntegrationOptions) -> Result<GammaQuadratic, RiccatiError> {
    check_psd(q)?;
    let e1 = Vector2::new(1.0, 0.0);
    let e2 = Vector2::new(0.0, 1.0);
    let probes = [Vector2::zeros(), e1, -e1, e2, -e2, e1 + e2, e1 * 2.0 - e2 * 0.5];
    let y = integrate_system(sde, q, &probes, opts, |_, _| {})?;
    let g = &y.g;
    let gamma0 = g[0];
    let l11 = 0.5 * (g[1] + g[2]) - gamma0;
    let l22 = 0.5 * (g[3] + g[4]) - gamma0;
    let g1 = 0.5 * (g[1] - g[2]);
    let g2 = 0.5 * (g[3] - g[4]);
    let l12 = 0.5 * (g[5] - gamma0 - g1 - g2 - l11 - l22);
    let mut quad = GammaQuadratic {
        gamma0,
        g: Vector2::new(g1, g2),
        l: Matrix2::new(l11, l12, l12, l22),
        residual: 0.0,
    };
    quad.residual = (quad.eval(&probes[6]) - g[6]).abs();
    Ok(quad)
}

/// Symmetric square root of a PSD matrix.
fn sym_sqrt(c: &Matrix2<f64>) -> Matrix2<f64> {
    let eig = SymmetricEigen::new(*c);
    let d = Matrix2::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt()));
    eig.eigenvectors * d * eig.eigenvectors.transpose()
}

fn to_matrix(s: &SymMatrix2<f64>) -> Matrix2<f64> {
    Matrix2::new(s.s11, s.s12, s.s12, s.s22)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingResult {
    pub value: f64,
    pub quadratic: GammaQuadratic,
}

/// `φ(S) = E_a exp(-γ(0; a))` for `a ~ N(0, S/T)`, in closed form from the
/// assembled quadratic.
pub fn mgf_via_mixing(sde: &LinearSde, s: &SymMatrix2<f64>, opts: &IntegrationOptions) -> Result<MixingResult, RiccatiError> {
    let q = to_matrix(s);
    let quad = gamma_quadratic(sde, &q, opts)?;
    let r = sym_sqrt(&(q / sde.horizon));
    let rg = r * quad.g;
    let m = Matrix2::identity() + r * quad.l * r * 2.0;
    let eig = SymmetricEigen::new(m).eigenvalues;
    if eig.min() <= 0.0 {
        return Err(RiccatiError::DivergentMixing(eig.min()));
    }
    let m_inv = m.try_inverse().ok_or(RiccatiError::DivergentMixing(0.0))?;
    let expo = -quad.gamma0 + 0.5 * (rg.transpose() * m_inv * rg)[0];
    let value = expo.exp() / (eig[0] * eig[1]).sqrt();
    Ok(MixingResult { value, quadratic: quad })
}

/// Cross-check of [`mgf_via_mixing`]: tensor Gauss–Hermite over `a`, one full
/// backward solve per node.
pub fn mgf_via_hermite(
    sde: &LinearSde,
    s: &SymMatrix2<f64>,
    nodes: usize,
    opts: &IntegrationOptions,
) -> Result<f64, RiccatiError> {
    let q = to_matrix(s);
    check_psd(&q)?;
    let r = sym_sqrt(&(q / sde.horizon));
    let rule = gauss_hermite(nodes);
    let mut zs = Vec::with_capacity(nodes * nodes);
    let mut ws = Vec::with_capacity(nodes * nodes);
    for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
        for (xj, wj) in rule.nodes.iter().zip(&rule.weights) {
            let x = Vector2::new(*xi, *xj) * std::f64::consts::SQRT_2;
            zs.push(r * x);
            ws.push(wi * wj / std::f64::consts::PI);
        }
    }
    let y = integrate_system(sde, &q, &zs, opts, |_, _| {})?;
    let terms: Vec<f64> = y.g.iter().zip(&ws).map(|(g, w)| w * (-g).exp()).collect();
    Ok(crate::quad::pairwise_sum(&terms))
}

/// Bridge oracle extrapolated in the cut-off: `2 φ_{ε/2} - φ_ε`.
pub fn mgf_via_mixing_extrapolated(
    sde: &LinearSde,
    s: &SymMatrix2<f64>,
    opts: &IntegrationOptions,
) -> Result<f64, RiccatiError> {
    let a = mgf_via_mixing(sde, s, opts)?.value;
    if !sde.is_singular() {
        return Ok(a);
    }
    let half = IntegrationOptions {
        cutoff: 0.5 * opts.cutoff,
        ..*opts
    };
    let b = mgf_via_mixing(sde, s, &half)?.value;
    Ok(2.0 * b - a)
}

/// Diagonal levels and off-diagonal fractions of the default comparison
/// grid: `s12 = f √(s11 s22)`.
pub const VERIFY_LEVELS: [f64; 5] = [0.0, 0.5, 2.0, 8.0, 20.0];
pub const VERIFY_FRACTIONS: [f64; 3] = [-0.9, 0.0, 0.5];

/// The 5×5×3 grid of `(s11, s22, s12)` used by [`verify_closed_form`].
pub fn verify_grid() -> Vec<SymMatrix2<f64>> {
    let mut out = Vec::with_capacity(75);
    for &s11 in &VERIFY_LEVELS {
        for &s22 in &VERIFY_LEVELS {
            for &f in &VERIFY_FRACTIONS {
                out.push(SymMatrix2::new(s11, f * (s11 * s22).sqrt(), s22));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub max_dev: f64,
    pub worst: SymMatrix2<f64>,
    /// Largest residual of the quadratic assembly of `γ(0; a)`.
    pub max_residual: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Riccati(#[from] RiccatiError),
    #[error(transparent)]
    Mgf(#[from] MgfError),
}

/// Largest `|φ_closed − φ_riccati|` over `grid`.
pub fn verify_closed_form(
    spec: &ProcessSpec,
    grid: &[SymMatrix2<f64>],
    opts: &IntegrationOptions,
) -> Result<VerifyReport, VerifyError> {
    let sde = LinearSde::for_process(spec);
    let mgf = Mgf::new(*spec);
    let mut report = VerifyReport {
        max_dev: 0.0,
        worst: SymMatrix2::zero(),
        max_residual: 0.0,
        points: grid.len(),
    };
    for s in grid {
        let closed = mgf.phi(s)?;
        let mix = mgf_via_mixing(&sde, s, opts)?;
        let dev = (closed - mix.value).abs();
        if !(dev <= report.max_dev) {
            report.max_dev = dev;
            report.worst = s.clone();
        }
        report.max_residual = report.max_residual.max(mix.quadratic.residual);
    }
    Ok(report)
}
