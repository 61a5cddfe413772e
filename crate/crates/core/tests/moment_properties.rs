use yule_core::moments::{
    integrand, mean_and_variance, moment, moment2_explicit_bm, truncation_radius, QuadratureConfig, Scheme,
};
use yule_core::{Mgf, ProcessSpec};

fn fast() -> QuadratureConfig {
    QuadratureConfig {
        scheme: Scheme::TanhSinh2d,
        ..Default::default()
    }
}

fn m(spec: &ProcessSpec, k: usize) -> f64 {
    moment(spec, k, &fast()).unwrap().value
}

#[test]
fn bm_table_values() {
    let bm = ProcessSpec::bm(1.0).unwrap();
    let printed = [0.240523, 0.109177, 0.060862, 0.037788, 0.025114, 0.017504, 0.012641, 0.009385];
    for (j, want) in printed.iter().enumerate() {
        let k = 2 * (j + 1);
        let got = m(&bm, k);
        assert!((got - want).abs() < 2e-6, "k={k}: {got} vs {want}");
    }
}

#[test]
fn even_moments_decrease_and_odd_vanish() {
    for spec in [ProcessSpec::bm(1.0).unwrap(), ProcessSpec::bb(), ProcessSpec::ou(3.0, 1.0).unwrap()] {
        let even: Vec<f64> = (1..=8).map(|j| m(&spec, 2 * j)).collect();
        assert!(even[0] < 1.0 && even.iter().all(|&x| x > 0.0));
        for w in even.windows(2) {
            assert!(w[1] < w[0], "{}: {even:?}", spec.label());
        }
        for k in [1, 3, 5] {
            assert_eq!(m(&spec, k), 0.0);
        }
    }
    let cbm = ProcessSpec::correlated_bm(0.5, 1.0).unwrap();
    let even: Vec<f64> = (1..=4).map(|j| m(&cbm, 2 * j)).collect();
    for w in even.windows(2) {
        assert!(w[1] < w[0], "{even:?}");
    }
}

#[test]
fn brownian_moments_do_not_depend_on_the_horizon() {
    for k in [2, 4, 6] {
        let a = m(&ProcessSpec::bm(1.0).unwrap(), k);
        let b = m(&ProcessSpec::bm(5.0).unwrap(), k);
        assert!((a - b).abs() < 1e-9, "k={k}: {a} vs {b}");
    }
    let a = m(&ProcessSpec::correlated_bm(0.3, 1.0).unwrap(), 1);
    let b = m(&ProcessSpec::correlated_bm(0.3, 4.0).unwrap(), 1);
    assert!((a - b).abs() < 1e-9);
}

#[test]
fn ou_interpolates_between_brownian_motion_and_zero() {
    let bm = m(&ProcessSpec::bm(1.0).unwrap(), 2);
    let rates = [0.01, 0.1, 1.0, 10.0, 100.0];
    let ou: Vec<f64> = rates.iter().map(|&r| m(&ProcessSpec::ou(r, 1.0).unwrap(), 2)).collect();
    assert!(bm > ou[0] && bm - ou[0] < 2e-3, "slow reversion stays near bm: {} vs {bm}", ou[0]);
    for w in ou.windows(2) {
        assert!(w[1] < w[0], "{ou:?}");
    }
    // E ρ² ~ 1/r for large r: 0.0762710 at r = 10 against 0.0097709 at r = 100
    assert!((ou[3] / ou[4] - 7.806).abs() < 0.01);
}

#[test]
fn correlation_sign_symmetry_and_reduction() {
    for c in [0.2, 0.7] {
        let p = m(&ProcessSpec::correlated_bm(c, 1.0).unwrap(), 1);
        let n = m(&ProcessSpec::correlated_bm(-c, 1.0).unwrap(), 1);
        assert!((p + n).abs() < 1e-10, "{p} {n}");
        assert!(p > 0.0 && p < c);
    }
    let zero = ProcessSpec::correlated_bm(0.0, 1.0).unwrap();
    assert!(m(&zero, 1).abs() < 1e-12);
    assert!((m(&zero, 2) - m(&ProcessSpec::bm(1.0).unwrap(), 2)).abs() < 1e-10);
}

#[test]
fn bridge_variance_is_smaller_than_brownian() {
    assert!(m(&ProcessSpec::bb(), 2) < m(&ProcessSpec::bm(1.0).unwrap(), 2));
}

#[test]
fn quadrature_schemes_agree() {
    let gl = QuadratureConfig::default();
    for (spec, k) in [
        (ProcessSpec::bm(1.0).unwrap(), 2),
        (ProcessSpec::ou(2.0, 1.0).unwrap(), 4),
        (ProcessSpec::bb(), 6),
        (ProcessSpec::correlated_bm(-0.8, 1.0).unwrap(), 3),
    ] {
        let a = moment(&spec, k, &gl).unwrap().value;
        let b = m(&spec, k);
        assert!((a - b).abs() < 1e-8, "{} k={k}: {a} vs {b}", spec.label());
    }
}

#[test]
fn explicit_second_moment_matches_the_jet_route() {
    let explicit = moment2_explicit_bm(&QuadratureConfig::default()).unwrap().value;
    let jet = m(&ProcessSpec::bm(1.0).unwrap(), 2);
    assert!((explicit - jet).abs() < 1e-10, "{explicit} vs {jet}");
}

#[test]
fn correlated_variance() {
    let mv = mean_and_variance(&ProcessSpec::correlated_bm(0.8, 1.0).unwrap(), &fast()).unwrap();
    assert!((mv.variance - 0.0621).abs() < 2e-4, "{}", mv.variance);
    assert!((mv.variance - (mv.second.value - mv.mean.value.powi(2))).abs() < 1e-15);
}

#[test]
fn integrand_is_negligible_at_the_truncation_radius() {
    for spec in [
        ProcessSpec::bm(1.0).unwrap(),
        ProcessSpec::ou(50.0, 1.0).unwrap(),
        ProcessSpec::bb(),
        ProcessSpec::correlated_bm(0.9, 1.0).unwrap(),
    ] {
        let mgf = Mgf::new(spec);
        let u = truncation_radius(&spec);
        for k in [1, 2, 8].into_iter().filter(|k| k % 2 == 0 || !spec.is_symmetric()) {
            let peak = (1..40)
                .map(|i| integrand(&mgf, k, 0.25 * i as f64, 0.25 * i as f64).unwrap().abs())
                .fold(0.0, f64::max);
            for (a, b) in [(u, u), (u, 0.5), (0.5, u)] {
                let tail = integrand(&mgf, k, a, b).unwrap().abs();
                assert!(peak > 0.0 && tail < 1e-30 * peak, "{} k={k} at ({a}, {b}): {tail:e} vs {peak:e}", spec.label());
            }
        }
    }
}
