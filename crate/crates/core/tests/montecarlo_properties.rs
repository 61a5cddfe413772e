use yule_core::moments::{moment, QuadratureConfig, Scheme};
use yule_core::montecarlo::{
    estimate_moments, path_rng, rho_of_path, sample_paths, simulate_path, variance_with_se, Path, SimConfig,
};
use yule_core::ProcessSpec;

fn exact(spec: &ProcessSpec, k: usize) -> f64 {
    let cfg = QuadratureConfig {
        scheme: Scheme::TanhSinh2d,
        ..Default::default()
    };
    moment(spec, k, &cfg).unwrap().value
}

#[test]
fn ou_transition_has_the_exact_marginal_variance() {
    let (r, t) = (1.3, 2.0);
    let spec = ProcessSpec::ou(r, t).unwrap();
    let n = 100_000;
    let ends: Vec<f64> = (0..n)
        .map(|i| {
            let p = simulate_path(&spec, 4, &mut path_rng(17, i));
            p.x1[4]
        })
        .collect();
    let (v, se) = variance_with_se(&ends);
    let want = -(-2.0 * r * t).exp_m1() / (2.0 * r);
    assert!((v - want).abs() < 3.0 * se, "{v} ± {se} vs {want}");
}

#[test]
fn correlated_increments() {
    let c = -0.45;
    let n = 100_000;
    let p = simulate_path(&ProcessSpec::correlated_bm(c, 1.0).unwrap(), n, &mut path_rng(3, 0));
    let d1: Vec<f64> = p.x1.windows(2).map(|w| w[1] - w[0]).collect();
    let d2: Vec<f64> = p.x2.windows(2).map(|w| w[1] - w[0]).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let corr = dot(&d1, &d2) / (dot(&d1, &d1) * dot(&d2, &d2)).sqrt();
    let se = (1.0 - c * c) / (n as f64).sqrt();
    assert!((corr - c).abs() < 3.0 * se, "{corr} vs {c}");
}

#[test]
fn sample_correlation_is_bounded() {
    let specs = [
        ProcessSpec::bm(1.0).unwrap(),
        ProcessSpec::ou(25.0, 1.0).unwrap(),
        ProcessSpec::bb(),
        ProcessSpec::correlated_bm(0.99, 1.0).unwrap(),
        ProcessSpec::correlated_bm(-0.99, 3.0).unwrap(),
    ];
    let mut total = 0;
    for (i, spec) in specs.iter().enumerate() {
        let cfg = SimConfig {
            n_paths: 20_000,
            n_steps: 32,
            seed: 100 + i as u64,
            spec: *spec,
        };
        let (samples, rejected) = sample_paths(&cfg).unwrap();
        assert_eq!(rejected, 0);
        for s in &samples {
            assert!(s.rho.abs() <= 1.0);
            assert!(s.y11 > 0.0 && s.y22 > 0.0);
            assert!(s.y12 * s.y12 <= s.y11 * s.y22 * (1.0 + 1e-12));
        }
        total += samples.len();
    }
    assert_eq!(total, 100_000);
}

#[test]
fn identical_results_for_any_thread_count() {
    let cfg = SimConfig {
        n_paths: 3_000,
        n_steps: 64,
        seed: 8,
        spec: ProcessSpec::ou(2.0, 1.0).unwrap(),
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_moments(&cfg, &[1, 2, 4]).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(1));
    let other = estimate_moments(&SimConfig { seed: 9, ..cfg }, &[1, 2, 4]).unwrap();
    assert_ne!(one, other);
}

#[test]
fn brownian_scale_invariance_is_exact_pathwise() {
    let base = SimConfig {
        n_paths: 2_000,
        n_steps: 128,
        seed: 4,
        spec: ProcessSpec::bm(1.0).unwrap(),
    };
    let a = sample_paths(&base).unwrap().0;
    let b = sample_paths(&SimConfig {
        spec: ProcessSpec::bm(7.0).unwrap(),
        ..base
    })
    .unwrap()
    .0;
    for (x, y) in a.iter().zip(&b) {
        assert!((x.rho - y.rho).abs() < 1e-12);
    }
}

#[test]
fn estimates_cover_exact_moments() {
    for (spec, k, seed) in [
        (ProcessSpec::bm(1.0).unwrap(), 2, 21),
        (ProcessSpec::bb(), 2, 22),
        (ProcessSpec::correlated_bm(0.3, 1.0).unwrap(), 1, 23),
        (ProcessSpec::ou(5.0, 1.0).unwrap(), 2, 24),
    ] {
        let cfg = SimConfig {
            n_paths: 50_000,
            n_steps: 512,
            seed,
            spec,
        };
        let est = estimate_moments(&cfg, &[k]).unwrap().estimates[0];
        let want = exact(&spec, k);
        assert!(
            (est.estimate - want).abs() < 3.0 * est.std_error,
            "{} k={k}: {} ± {} vs {want}",
            spec.label(),
            est.estimate,
            est.std_error
        );
    }
}

fn coarsen(p: &Path, every: usize) -> Path {
    Path {
        dt: p.dt * every as f64,
        x1: p.x1.iter().step_by(every).copied().collect(),
        x2: p.x2.iter().step_by(every).copied().collect(),
    }
}

#[test]
fn discretization_bias_shrinks_with_the_grid() {
    // Coarser grids are exact subsamples of one fine path, so the differences
    // between levels carry little Monte Carlo noise.
    let spec = ProcessSpec::bm(1.0).unwrap();
    let n = 20_000;
    let levels = [16usize, 32, 64, 128, 256, 512];
    let mut sums = vec![0.0; levels.len()];
    for i in 0..n {
        let fine = simulate_path(&spec, 512, &mut path_rng(31, i));
        for (j, &m) in levels.iter().enumerate() {
            sums[j] += rho_of_path(&coarsen(&fine, 512 / m)).unwrap().rho.powi(2);
        }
    }
    let means: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    let diffs: Vec<f64> = means.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(diffs[0] > diffs[2] && diffs[2] > diffs[4], "{diffs:?}");
}
