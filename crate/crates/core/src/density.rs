//! Polynomial densities on [-1, 1] with prescribed moments.
//!
//! The degree-`k` polynomial whose first `k + 1` moments match is built in the
//! Legendre basis, where the coefficient of `P_n` is `(2n+1)/2 · E P_n(ρ)` and
//! only needs moments up to `n`, then converted to monomials.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_DEGREE: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("at least the zeroth moment is required")]
    Empty,
    #[error("degree {0} exceeds the supported maximum {MAX_DEGREE}")]
    DegreeTooHigh(usize),
    #[error("the zeroth moment must be 1 (got {0})")]
    NotNormalized(f64),
    #[error("moment {index} = {value} is not finite or exceeds 1 in magnitude")]
    InvalidMoment { index: usize, value: f64 },
    #[error("the moment system is singular")]
    Singular,
}

/// `p(x) = Σ coeffs[i] x^i` on [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityPoly {
    pub coeffs: Vec<f64>,
}

/// Monomial coefficients of the Legendre polynomials `P_0..P_n`.
pub fn legendre_monomials(n: usize) -> Vec<Vec<f64>> {
    let mut p = vec![vec![1.0]];
    if n >= 1 {
        p.push(vec![0.0, 1.0]);
    }
    for m in 1..n {
        // (m+1) P_{m+1} = (2m+1) x P_m - m P_{m-1}
        let mut next = vec![0.0; m + 2];
        for (i, c) in p[m].iter().enumerate() {
            next[i + 1] += (2 * m + 1) as f64 * c;
        }
        for (i, c) in p[m - 1].iter().enumerate() {
            next[i] -= m as f64 * c;
        }
        for c in next.iter_mut() {
            *c /= (m + 1) as f64;
        }
        p.push(next);
    }
    p
}

/// `∫_{-1}^{1} x^n dx`.
pub fn monomial_moment(n: usize) -> f64 {
    if n % 2 == 0 {
        2.0 / (n as f64 + 1.0)
    } else {
        0.0
    }
}

fn check_moments(moments: &[f64]) -> Result<(), DensityError> {
    if moments.is_empty() {
        return Err(DensityError::Empty);
    }
    if moments.len() - 1 > MAX_DEGREE {
        return Err(DensityError::DegreeTooHigh(moments.len() - 1));
    }
    if (moments[0] - 1.0).abs() > 1e-12 {
        return Err(DensityError::NotNormalized(moments[0]));
    }
    for (index, &value) in moments.iter().enumerate() {
        if !value.is_finite() || value.abs() > 1.0 + 1e-12 {
            return Err(DensityError::InvalidMoment { index, value });
        }
    }
    Ok(())
}

/// Fits the polynomial whose moments `E ρ^0..E ρ^k` equal `moments`.
pub fn fit_density(moments: &[f64]) -> Result<DensityPoly, DensityError> {
    check_moments(moments)?;
    let k = moments.len() - 1;
    let leg = legendre_monomials(k);
    let mut coeffs = vec![0.0; k + 1];
    for (n, pn) in leg.iter().enumerate() {
        let proj: f64 = pn.iter().zip(moments).map(|(c, m)| c * m).sum();
        let a = (2 * n + 1) as f64 / 2.0 * proj;
        if a == 0.0 {
            continue;
        }
        for (i, c) in pn.iter().enumerate() {
            coeffs[i] += a * c;
        }
    }
    Ok(DensityPoly { coeffs })
}

/// The same polynomial from the monomial moment system `H c = m` with
/// `H_ij = ∫ x^{i+j}`, solved by LU. Kept as an independent check of
/// [`fit_density`]; it loses accuracy quickly with the degree.
pub fn fit_density_normal_equations(moments: &[f64]) -> Result<DensityPoly, DensityError> {
    check_moments(moments)?;
    let n = moments.len();
    let h = DMatrix::from_fn(n, n, |i, j| monomial_moment(i + j));
    let m = DVector::from_column_slice(moments);
    let c = h.lu().solve(&m).ok_or(DensityError::Singular)?;
    Ok(DensityPoly {
        coeffs: c.iter().copied().collect(),
    })
}

impl DensityPoly {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// `∫ x^j p(x) dx` by exact monomial integration.
    pub fn moment(&self, j: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * monomial_moment(i + j))
            .sum()
    }

    /// `n_points` evenly spaced samples on [-1, 1].
    pub fn table(&self, n_points: usize) -> Vec<(f64, f64)> {
        assert!(n_points >= 2, "a density table needs at least two points");
        (0..n_points)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / (n_points - 1) as f64;
                (x, self.eval(x))
            })
            .collect()
    }

    /// CSV with header `x,pdf` and six decimals.
    pub fn to_csv(&self, n_points: usize) -> String {
        let mut out = String::from("x,pdf\n");
        for (x, y) in self.table(n_points) {
            out.push_str(&format!("{x:.6},{y:.6}\n"));
        }
        out
    }

    /// Smallest sampled value and where it occurs. Truncated moment
    /// polynomials are not positivity-preserving; this only reports it.
    pub fn min_on_grid(&self, n_points: usize) -> (f64, f64) {
        self.table(n_points)
            .into_iter()
            .fold((f64::NAN, f64::INFINITY), |best, (x, y)| if y < best.1 { (x, y) } else { best })
    }
}
