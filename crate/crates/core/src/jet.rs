//! Truncated univariate Taylor series ("jets").
//!
//! A [`Jet`] of order `K` stores the raw Taylor coefficients `c_0..c_K` of a
//! function of one perturbation variable `ε`, i.e. `Σ c_i ε^i mod ε^{K+1}`.
//! The `i`-th derivative at `ε = 0` is `i! · c_i`; the factorial is never
//! applied here so that high orders do not overflow inside inner loops.
//!
//! Transcendental functions are propagated with the usual ODE recurrences
//! (`f' = g · a'` style), which cost `O(K²)` per operation.

use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use thiserror::Error;

/// Below this magnitude of the constant term `sinhc` switches to its series.
pub const SINHC_SWITCH: f64 = 1.0;

/// Terms of the `sinh(x)/x` series branch beyond half the jet order; enough
/// for full precision of every coefficient when `|x| < SINHC_SWITCH`.
const SINHC_EXTRA_TERMS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum JetError {
    #[error("a variable jet needs order >= 1 (got order 0)")]
    ZeroOrderVariable,
    #[error("division by a jet with zero constant term")]
    DivisionByZero,
    #[error("square root of a jet with non-positive constant term {0}")]
    NonPositiveSqrt(f64),
    #[error("logarithm of a jet with non-positive constant term {0}")]
    NonPositiveLog(f64),
    #[error("real power of a jet with non-positive constant term {0}")]
    NonPositivePow(f64),
}

/// Truncated Taylor series of fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl Jet {
    /// `x + 0·ε + …` of order `order`.
    pub fn constant(x: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = x;
        Jet { coeffs }
    }

    /// The seed `x + ε`.
    pub fn variable(x: f64, order: usize) -> Result<Self, JetError> {
        if order == 0 {
            return Err(JetError::ZeroOrderVariable);
        }
        let mut j = Self::constant(x, order);
        j.coeffs[1] = 1.0;
        Ok(j)
    }

    /// Builds a jet from raw Taylor coefficients. The order is `coeffs.len() - 1`.
    ///
    /// Panics on an empty coefficient vector.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs[i]
    }

    /// `i`-th derivative with respect to the seed variable, `i! · c_i`.
    pub fn derivative(&self, i: usize) -> f64 {
        let fact: f64 = (1..=i).map(|n| n as f64).product();
        fact * self.coeffs[i]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// The first `order + 1` coefficients.
    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order());
        Jet {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    /// Same jet with the constant term removed (the nilpotent part).
    pub fn perturbation(&self) -> Self {
        let mut p = self.clone();
        p.coeffs[0] = 0.0;
        p
    }

    pub fn scale(&self, k: f64) -> Self {
        Jet {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    pub fn add_scalar(&self, x: f64) -> Self {
        let mut r = self.clone();
        r.coeffs[0] += x;
        r
    }

    fn check_order(&self, other: &Jet) {
        assert_eq!(
            self.coeffs.len(),
            other.coeffs.len(),
            "jet orders differ ({} vs {})",
            self.order(),
            other.order()
        );
    }

    pub fn checked_div(&self, other: &Jet) -> Result<Self, JetError> {
        self.check_order(other);
        let b0 = other.coeffs[0];
        if b0 == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let n = self.coeffs.len();
        let mut q = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.coeffs[i];
            for j in 1..=i {
                acc -= other.coeffs[j] * q[i - j];
            }
            q[i] = acc / b0;
        }
        Ok(Jet { coeffs: q })
    }

    /// `1 / self`.
    pub fn recip(&self) -> Result<Self, JetError> {
        Jet::constant(1.0, self.order()).checked_div(self)
    }

    pub fn sqrt(&self) -> Result<Self, JetError> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) {
            return Err(JetError::NonPositiveSqrt(a0));
        }
        let n = self.coeffs.len();
        let mut r = vec![0.0; n];
        r[0] = a0.sqrt();
        for i in 1..n {
            let mut acc = self.coeffs[i];
            for j in 1..i {
                acc -= r[j] * r[i - j];
            }
            r[i] = acc / (2.0 * r[0]);
        }
        Ok(Jet { coeffs: r })
    }

    pub fn exp(&self) -> Self {
        let n = self.coeffs.len();
        let mut e = vec![0.0; n];
        e[0] = self.coeffs[0].exp();
        for i in 1..n {
            let mut acc = 0.0;
            for j in 1..=i {
                acc += j as f64 * self.coeffs[j] * e[i - j];
            }
            e[i] = acc / i as f64;
        }
        Jet { coeffs: e }
    }

    pub fn ln(&self) -> Result<Self, JetError> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) {
            return Err(JetError::NonPositiveLog(a0));
        }
        let n = self.coeffs.len();
        let mut l = vec![0.0; n];
        l[0] = a0.ln();
        for i in 1..n {
            let mut acc = 0.0;
            for j in 1..i {
                acc += j as f64 * l[j] * self.coeffs[i - j];
            }
            l[i] = (self.coeffs[i] - acc / i as f64) / a0;
        }
        Ok(Jet { coeffs: l })
    }

    /// `self^alpha` for a positive constant term.
    pub fn powf(&self, alpha: f64) -> Result<Self, JetError> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) {
            return Err(JetError::NonPositivePow(a0));
        }
        let n = self.coeffs.len();
        let mut p = vec![0.0; n];
        p[0] = a0.powf(alpha);
        for i in 1..n {
            let mut acc = 0.0;
            for j in 1..=i {
                acc += (alpha * j as f64 - (i - j) as f64) * self.coeffs[j] * p[i - j];
            }
            p[i] = acc / (i as f64 * a0);
        }
        Ok(Jet { coeffs: p })
    }

    /// `(sinh(self), cosh(self))`, propagated jointly.
    pub fn sinh_cosh(&self) -> (Self, Self) {
        let n = self.coeffs.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = self.coeffs[0].sinh();
        c[0] = self.coeffs[0].cosh();
        for i in 1..n {
            let mut acc_s = 0.0;
            let mut acc_c = 0.0;
            for j in 1..=i {
                let ja = j as f64 * self.coeffs[j];
                acc_s += ja * c[i - j];
                acc_c += ja * s[i - j];
            }
            s[i] = acc_s / i as f64;
            c[i] = acc_c / i as f64;
        }
        (Jet { coeffs: s }, Jet { coeffs: c })
    }

    pub fn sinh(&self) -> Self {
        self.sinh_cosh().0
    }

    pub fn cosh(&self) -> Self {
        self.sinh_cosh().1
    }

    /// `sinh(x)/x` with the removable singularity at `x = 0` filled in.
    pub fn sinhc(&self) -> Self {
        let a0 = self.coeffs[0];
        if a0.abs() >= SINHC_SWITCH {
            return self
                .sinh()
                .checked_div(self)
                .expect("constant term is bounded away from zero");
        }
        // Σ x^{2n}/(2n+1)!: positive terms, no cancellation near 0
        let terms = SINHC_EXTRA_TERMS + self.order() / 2 + 1;
        let x2 = self * self;
        let mut coef = vec![1.0; terms];
        for n in 1..terms {
            coef[n] = coef[n - 1] / ((2 * n) as f64 * (2 * n + 1) as f64);
        }
        let mut acc = Jet::constant(coef[terms - 1], self.order());
        for n in (0..terms - 1).rev() {
            acc = &acc * &x2;
            acc.coeffs[0] += coef[n];
        }
        acc
    }

    /// Evaluates `Σ taylor[n] · (self - self₀)^n` by Horner's rule, where
    /// `taylor` holds the Taylor coefficients of an outer function at `self₀`.
    /// Coefficients beyond the jet order are ignored.
    pub fn compose(&self, taylor: &[f64]) -> Self {
        assert!(!taylor.is_empty());
        let delta = self.perturbation();
        let top = taylor.len().min(self.coeffs.len()) - 1;
        let mut acc = Jet::constant(taylor[top], self.order());
        for n in (0..top).rev() {
            acc = &acc * &delta;
            acc.coeffs[0] += taylor[n];
        }
        acc
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.check_order(rhs);
        Jet {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.check_order(rhs);
        Jet {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.check_order(rhs);
        let n = self.coeffs.len();
        let mut c = vec![0.0; n];
        for (i, ci) in c.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += self.coeffs[j] * rhs.coeffs[i - j];
            }
            *ci = acc;
        }
        Jet { coeffs: c }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        (&self).neg()
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.check_order(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        self.check_order(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, rhs: f64) {
        for a in &mut self.coeffs {
            *a *= rhs;
        }
    }
}
