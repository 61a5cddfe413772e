use yule_core::density::{fit_density, fit_density_normal_equations, DensityPoly};
use yule_core::moments::{moment, QuadratureConfig, Scheme};
use yule_core::ProcessSpec;

fn moments_upto(spec: &ProcessSpec, k: usize) -> Vec<f64> {
    let cfg = QuadratureConfig {
        scheme: Scheme::TanhSinh2d,
        ..Default::default()
    };
    std::iter::once(1.0)
        .chain((1..=k).map(|j| moment(spec, j, &cfg).unwrap().value))
        .collect()
}

#[test]
fn fitted_polynomial_reproduces_its_moments() {
    for spec in [ProcessSpec::bm(1.0).unwrap(), ProcessSpec::correlated_bm(0.6, 1.0).unwrap()] {
        let m = moments_upto(&spec, 12);
        for k in [0, 2, 4, 7, 12] {
            let p = fit_density(&m[..=k]).unwrap();
            for (j, want) in m[..=k].iter().enumerate() {
                assert!((p.moment(j) - want).abs() < 1e-12, "{} K={k} j={j}", spec.label());
            }
        }
    }
}

#[test]
fn legendre_and_monomial_solvers_agree() {
    let m = moments_upto(&ProcessSpec::bb(), 8);
    for k in [2, 4, 6, 8] {
        let a = fit_density(&m[..=k]).unwrap();
        let b = fit_density_normal_equations(&m[..=k]).unwrap();
        for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
            assert!((x - y).abs() < 1e-7 * x.abs().max(1.0), "K={k}: {:?} vs {:?}", a.coeffs, b.coeffs);
        }
    }
}

#[test]
fn low_order_brownian_coefficients() {
    let m = moments_upto(&ProcessSpec::bm(1.0).unwrap(), 6);
    let f4 = fit_density(&m[..=4]).unwrap();
    let f6 = fit_density(&m).unwrap();
    for (got, want) in [(f4.coeffs[0], 0.59081), (f4.coeffs[2], 0.31001), (f4.coeffs[4], -0.97075)] {
        assert!((got - want).abs() < 2e-4);
    }
    let want6 = [0.60057, 0.10518, -0.35627, -0.45062];
    for (i, w) in want6.iter().enumerate() {
        assert!((f6.coeffs[2 * i] - w).abs() < 2e-4, "a{}: {} vs {w}", 2 * i, f6.coeffs[2 * i]);
    }
}

#[test]
fn twelfth_order_brownian_density_is_symmetric_and_flat_in_the_middle() {
    let p = fit_density(&moments_upto(&ProcessSpec::bm(1.0).unwrap(), 12)).unwrap();
    for i in 0..=50 {
        let x = i as f64 / 50.0;
        assert!((p.eval(x) - p.eval(-x)).abs() < 1e-14);
    }
    let mid: Vec<f64> = (0..=100).map(|i| p.eval(-0.5 + i as f64 / 100.0)).collect();
    let (lo, hi) = mid.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &y| (a.min(y), b.max(y)));
    assert!(lo > 0.0 && hi / lo < 1.15, "{lo} {hi}");
}

/// The tabulated eighth-order coefficients
/// `0.61200 - 0.30638 x² + 1.9073 x⁴ - 4.3742 x⁶ + 2.1019 x⁸` cannot come from
/// the exact moments: the map from moments to coefficients is invertible and
/// theirs integrate to 0.99998 with a second moment off by 1.3e-5.
#[test]
fn tabulated_eighth_order_coefficients_are_not_moment_matched() {
    let printed = DensityPoly {
        coeffs: vec![0.61200, 0.0, -0.30638, 0.0, 1.9073, 0.0, -4.3742, 0.0, 2.1019],
    };
    let m = moments_upto(&ProcessSpec::bm(1.0).unwrap(), 8);
    assert!((printed.moment(0) - 1.0).abs() > 1e-5);
    assert!((printed.moment(2) - m[2]).abs() > 1e-5);
    let fitted = fit_density(&m).unwrap();
    let worst = fitted
        .coeffs
        .iter()
        .zip(&printed.coeffs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst > 1e-3, "{worst}");
}
