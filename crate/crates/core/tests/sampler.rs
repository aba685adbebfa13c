use nalgebra::DMatrix;
use spdelab::covariance::CovMatrix;
use spdelab::model::ModelParams;
use spdelab::moduli::holder_fit;
use spdelab::sampler::*;
use spdelab::spectral::*;
use spdelab::Error;

fn points(grid: &[f64]) -> Vec<Vec<f64>> {
    grid.iter().map(|&x| vec![x]).collect()
}

fn empirical_cov(set: &SamplePathSet) -> DMatrix<f64> {
    let n = set.grid.len();
    let r = set.replicas() as f64;
    DMatrix::from_fn(n, n, |i, j| set.values.iter().map(|v| v[i] * v[j]).sum::<f64>() / r)
}

#[test]
fn identity_has_unit_variance() {
    let n = 6;
    let m = CovMatrix::from_matrix(points(&uniform_grid(0.0, 1.0, n)), DMatrix::identity(n, n)).unwrap();
    let reps = 4000;
    let set = sample_cholesky(&m, reps, 3).unwrap();
    let c = empirical_cov(&set);
    for i in 0..n {
        assert!((c[(i, i)] - 1.0).abs() < 3.0 / (reps as f64).sqrt() * 2f64.sqrt(), "{}", c[(i, i)]);
    }
}

#[test]
fn same_seed_same_bits() {
    let g = uniform_grid(0.1, 0.1, 10);
    let m = CovMatrix::build(points(&g), |a, b| Ok(a[0].min(b[0]))).unwrap();
    let a = sample_cholesky(&m, 7, 42).unwrap();
    let b = sample_cholesky(&m, 7, 42).unwrap();
    let c = sample_cholesky(&m, 7, 43).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.values, c.values);
    let fg = FrequencyGrid {
        tau_min: 1e-2,
        tau_max: 1e4,
        bins: 512,
    };
    let t = uniform_grid(0.0, 0.01, 101);
    let x = sample_stat_increments_fn(|s| Ok(1.0 / (s * s)), &t, 3, 5, fg).unwrap();
    let y = sample_stat_increments_fn(|s| Ok(1.0 / (s * s)), &t, 3, 5, fg).unwrap();
    assert_eq!(x, y);
    let z = sample_stationary_fn(|s| Ok((-s * s).exp()), 64, 0.1, 3, 9, StationaryOptions::default()).unwrap();
    let w = sample_stationary_fn(|s| Ok((-s * s).exp()), 64, 0.1, 3, 9, StationaryOptions::default()).unwrap();
    assert_eq!(z, w);
}

#[test]
fn cholesky_covariance_error_bound_and_rate() {
    let g = uniform_grid(0.125, 0.125, 8);
    let m = CovMatrix::build(points(&g), |a, b| Ok(a[0].min(b[0]))).unwrap();
    let err = |reps: usize, seed: u64| {
        let set = sample_cholesky(&m, reps, seed).unwrap();
        (empirical_cov(&set) - &m.entries).abs().max()
    };
    let bound = |reps: usize| 5.0 * 1.0 * ((8f64).ln() / reps as f64).sqrt();
    let (n1, n2) = (1000, 4000);
    let mut e1 = 0.0;
    let mut e2 = 0.0;
    for seed in 0..12 {
        let a = err(n1, seed);
        let b = err(n2, 100 + seed);
        assert!(a <= bound(n1) && b <= bound(n2));
        e1 += a;
        e2 += b;
    }
    let ratio = e1 / e2;
    assert!((1.2..=3.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn singular_matrix_still_samples() {
    let g = [0.5, 0.5, 1.0];
    let m = CovMatrix::build(points(&g), |a, b| Ok(a[0].min(b[0]))).unwrap();
    let set = sample_cholesky(&m, 200, 1).unwrap();
    for v in &set.values {
        assert!((v[0] - v[1]).abs() < 1e-6);
    }
}

#[test]
fn brownian_moments() {
    let n = 4000;
    let set = sample_brownian(65, 1.0 / 64.0, n, 2).unwrap();
    let x: Vec<f64> = set.values.iter().map(|v| v[64]).collect();
    let m2 = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let m3 = x.iter().map(|v| v.powi(3)).sum::<f64>() / n as f64;
    let m4 = x.iter().map(|v| v.powi(4)).sum::<f64>() / n as f64;
    let band = 5.0 / (n as f64).sqrt();
    assert!((m2 - 1.0).abs() < band);
    assert!((m3 / m2.powf(1.5)).abs() < band);
    assert!((m4 / (m2 * m2) - 3.0).abs() < 2.0 * band);
    assert!(set.values.iter().all(|v| v[0] == 0.0));
}

#[test]
fn inverse_square_density_gives_brownian_variogram() {
    // (1/π)∫(1 − cos hτ)τ^{−2}dτ = |h|
    let n = 1024;
    let sp = 1.0 / n as f64;
    let t = uniform_grid(0.0, sp, n + 1);
    let set = sample_stat_increments_fn(|s| Ok(1.0 / (s * s)), &t, 64, 7, FrequencyGrid::for_grid(1.0, sp)).unwrap();
    assert!(set.values.iter().all(|v| v[0] == 0.0));
    for (lag, m2) in empirical_variogram(&set, &[4, 16, 64]).unwrap() {
        assert!((m2 / lag - 1.0).abs() < 0.05, "lag {lag}: {}", m2 / lag);
    }
}

#[test]
fn lks_increments_match_variogram() {
    let p = ModelParams::lks(1.0, 0.0, 1).unwrap();
    let sd = SpectralDensity::temporal(p, FieldKind::Base).unwrap();
    let n = 1024;
    let sp = 1.0 / n as f64;
    let t = uniform_grid(0.0, sp, n + 1);
    let set = sample_spectral_stat_increments(&sd, &t, 48, 11, FrequencyGrid::for_grid(1.0, sp)).unwrap();
    let lags = log_lags(1, 128, 20);
    let v = empirical_variogram(&set, &lags).unwrap();
    for &(lag, m2) in v.iter().filter(|(l, _)| *l >= 4.0 * sp && *l <= 0.125) {
        let want = temporal_variogram(&sd, lag).unwrap();
        assert!((m2 / want - 1.0).abs() < 0.05, "lag {lag}: {}", m2 / want);
    }
    let (l, m): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
    let fit = holder_fit(&l, &m, (0.0, 1.0)).unwrap();
    assert!((fit.h - 0.375).abs() < 0.02, "{fit:?}");
}

#[test]
fn frequency_coverage_is_checked() {
    let t = uniform_grid(0.0, 0.01, 101);
    let narrow = FrequencyGrid {
        tau_min: 1.0,
        tau_max: 1e5,
        bins: 64,
    };
    let r = sample_stat_increments_fn(|s| Ok(1.0 / (s * s)), &t, 2, 1, narrow);
    assert!(matches!(r, Err(Error::Precondition(_))));
    let low = FrequencyGrid {
        tau_min: 1e-3,
        tau_max: 100.0,
        bins: 64,
    };
    let r = sample_stat_increments_fn(|s| Ok(1.0 / (s * s)), &t, 2, 1, low);
    assert!(matches!(r, Err(Error::Precondition(_))));
}

#[test]
fn band_limited_variance_is_band_mass() {
    let band = 5.0;
    let s = |x: f64| Ok(if x <= band { 1.0 } else { 0.0 });
    let set = sample_stationary_fn(s, 512, 0.05, 2000, 4, StationaryOptions::default()).unwrap();
    let var = set.values.iter().map(|v| v[100] * v[100]).sum::<f64>() / 2000.0;
    assert!((var / (2.0 * band) - 1.0).abs() < 0.08, "{var}");
}

#[test]
fn gradient_field_matches_spatial_variogram() {
    let p = ModelParams::lks(1.0, 0.0, 1).unwrap();
    let sd = SpectralDensity::spatial(p, FieldKind::Gradient, 1.0).unwrap();
    let (n, sp) = (1 << 14, 1e-3);
    let set = sample_spectral_stationary(&sd, n, sp, 128, 21).unwrap();
    let lags = log_lags(4, n / 8, 12);
    let v = empirical_variogram(&set, &lags).unwrap();
    for &(lag, m2) in &v {
        let want = spatial_variogram(&sd, lag).unwrap();
        assert!((m2 / want - 1.0).abs() < 0.05, "lag {lag}: {}", m2 / want);
    }
    let small = empirical_variogram(&set, &log_lags(1, 64, 16)).unwrap();
    let (l, m): (Vec<f64>, Vec<f64>) = small.into_iter().unzip();
    let fit = holder_fit(&l, &m, (0.0, 1.0)).unwrap();
    assert!((fit.h - 0.5).abs() < 0.05, "{fit:?}");
}

#[test]
fn base_field_is_smooth_in_one_dimension() {
    let p = ModelParams::lks(1.0, 0.0, 1).unwrap();
    let sd = SpectralDensity::spatial(p, FieldKind::Base, 1.0).unwrap();
    let set = sample_spectral_stationary(&sd, 4096, 1e-2, 32, 5).unwrap();
    let v = empirical_variogram(&set, &log_lags(1, 16, 12)).unwrap();
    let (l, m): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
    let fit = holder_fit(&l, &m, (0.0, 1.0)).unwrap();
    assert!(fit.h > 0.9, "{fit:?}");
}

#[test]
fn nyquist_violation_reports_cutoff() {
    let p = ModelParams::lks(1.0, 0.0, 1).unwrap();
    let sd = SpectralDensity::spatial(p, FieldKind::Gradient, 1.0).unwrap();
    match sample_spectral_stationary(&sd, 256, 0.1, 2, 1) {
        Err(Error::Precondition(msg)) => assert!(msg.contains("Nyquist")),
        other => panic!("expected a precondition error, got {other:?}"),
    }
    let tf = ModelParams::tf(0.25, 2).unwrap();
    let sd = SpectralDensity::spatial(tf, FieldKind::Base, 1.0).unwrap();
    assert!(matches!(sample_spectral_stationary(&sd, 256, 1e-3, 2, 1), Err(Error::Domain(_))));
}

#[test]
fn spectral_and_cholesky_agree() {
    // stationary-increment process with X(0) = 0: cov = (γ(t) + γ(s) − γ(|t−s|))/2
    let p = ModelParams::lks(1.0, 0.0, 1).unwrap();
    let sd = SpectralDensity::temporal(p, FieldKind::Base).unwrap();
    let n = 96;
    let sp = 1.0 / n as f64;
    let g = uniform_grid(sp, sp, n);
    let gam = |h: f64| if h == 0.0 { Ok(0.0) } else { temporal_variogram(&sd, h) };
    let m = CovMatrix::build(points(&g), |a, b| Ok(0.5 * (gam(a[0])? + gam(b[0])? - gam((a[0] - b[0]).abs())?))).unwrap();
    let chol = sample_cholesky(&m, 600, 8).unwrap();
    let spec = sample_spectral_stat_increments(&sd, &g, 600, 8, FrequencyGrid::for_grid(1.0, sp)).unwrap();
    let lags = [2, 4, 8, 16];
    let a = empirical_variogram(&chol, &lags).unwrap();
    let b = empirical_variogram(&spec, &lags).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x.1 / y.1 - 1.0).abs() < 0.07, "lag {}: {} vs {}", x.0, x.1, y.1);
    }
}
