//! One-dimensional quadrature rules and a deterministic summation helper.
//!
//! The 2-D integrals in [`crate::moments`] are tensor products of these rules.

use std::f64::consts::PI;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .collect();
        pairwise_sum(&terms)
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule with `n` nodes on every panel between
/// consecutive breakpoints.
pub fn composite_gauss_legendre(breakpoints: &[f64], n: usize) -> Rule {
    let base = gauss_legendre(n);
    let mut nodes = Vec::with_capacity(n * breakpoints.len());
    let mut weights = Vec::with_capacity(n * breakpoints.len());
    for pair in breakpoints.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in base.nodes.iter().zip(&base.weights) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    Rule { nodes, weights }
}

/// Exp–sinh rule on (0, ∞): `x = scale · exp(π/2 · sinh t)` with step `h`
/// and `|t| <= t_max`.
pub fn exp_sinh(h: f64, t_max: f64, scale: f64) -> Rule {
    let m = (t_max / h).ceil() as i64;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for k in -m..=m {
        let t = k as f64 * h;
        let x = scale * (0.5 * PI * t.sinh()).exp();
        let w = h * 0.5 * PI * t.cosh() * x;
        if x.is_finite() && w.is_finite() && w > 0.0 {
            nodes.push(x);
            weights.push(w);
        }
    }
    Rule { nodes, weights }
}

/// Tanh–sinh rule on (0, 1). Returns the rule together with `1 - x` for each
/// node, computed without cancellation.
pub fn tanh_sinh_unit(h: f64, t_max: f64) -> (Rule, Vec<f64>) {
    let m = (t_max / h).ceil() as i64;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut complements = Vec::new();
    for k in -m..=m {
        let t = k as f64 * h;
        let y = 0.5 * PI * t.sinh();
        let x = 1.0 / (1.0 + (-2.0 * y).exp());
        let xc = 1.0 / (1.0 + (2.0 * y).exp());
        let w = h * 0.25 * PI * t.cosh() / (y.cosh() * y.cosh());
        if w > 0.0 && w.is_finite() && x > 0.0 && xc > 0.0 {
            nodes.push(x);
            weights.push(w);
            complements.push(xc);
        }
    }
    (Rule { nodes, weights }, complements)
}

/// Gauss–Hermite rule for the weight `exp(-x²)` on the real line.
pub fn gauss_hermite(n: usize) -> Rule {
    assert!(n >= 1);
    let pim4 = PI.powf(-0.25);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (j as f64 + 1.0)).sqrt() * p2 - (j as f64 / (j as f64 + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// Pairwise summation in a fixed order, so results do not depend on how the
/// terms were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1, 2, 5, 16, 33] {
            let rule = gauss_legendre(n);
            assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for p in 0..(2 * n) {
                let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
                let got = rule.integrate(|x| x.powi(p as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} p={p} got {got}");
            }
        }
    }

    #[test]
    fn composite_rule_integrates_exponential() {
        let rule = composite_gauss_legendre(&[0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 40.0], 16);
        let got = rule.integrate(|x| (-x).exp());
        assert!((got - (1.0 - (-40.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn exp_sinh_handles_singular_and_decaying_integrands() {
        let rule = exp_sinh(1.0 / 64.0, 4.5, 1.0);
        // Γ(1/2) = √π
        let got = rule.integrate(|x| (-x).exp() / x.sqrt());
        assert!((got - PI.sqrt()).abs() < 1e-12, "{got}");
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        let (rule, comp) = tanh_sinh_unit(1.0 / 32.0, 4.0);
        // ∫_0^1 x^{-1/2} (1-x)^{-1/2} dx = π
        let terms: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&comp)
            .zip(&rule.weights)
            .map(|((x, xc), w)| w / (x * xc).sqrt())
            .collect();
        assert!((pairwise_sum(&terms) - PI).abs() < 1e-10);
    }

    #[test]
    fn gauss_hermite_moments() {
        let rule = gauss_hermite(20);
        let sp = PI.sqrt();
        assert!((rule.integrate(|_| 1.0) - sp).abs() < 1e-13);
        assert!((rule.integrate(|x| x * x) - sp / 2.0).abs() < 1e-13);
        assert!((rule.integrate(|x| x.powi(4)) - 3.0 * sp / 4.0).abs() < 1e-12);
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        assert_eq!(pairwise_sum(&xs), pairwise_sum(&xs.clone()));
        assert!((pairwise_sum(&xs) - xs.iter().sum::<f64>()).abs() < 1e-12);
    }
}
