//! Modulus-of-continuity statistics on replicated paths, Hölder-exponent
//! regression and log-factor detection.

use crate::error::{Error, Result};
use crate::sampler::SamplePathSet;
use rayon::prelude::*;
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulusMode {
    Uniform,
    Local,
    Chung,
}

/// How the iterated-logarithm factor of local and Chung normalizers is realised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterLog {
    /// log log(1/δ) along each path; replicas combined by mean (local) or minimum (Chung)
    Path,
    /// log(N/k) with the k-th most extreme of N replicas
    Ensemble { k: usize },
}

/// Normalizer δ^H·log(1/δ)^{log_power}·L^{loglog_power} (uniform, local) or
/// r^H·log(1/r)^{log_power}/L^{loglog_power} (Chung), with L the iterated-log factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusSpec {
    pub h: f64,
    pub log_power: f64,
    pub loglog_power: f64,
    pub mode: ModulusMode,
    pub iter_log: IterLog,
}

impl ModulusSpec {
    pub fn uniform(h: f64, log_power: f64) -> Self {
        ModulusSpec {
            h,
            log_power,
            loglog_power: 0.0,
            mode: ModulusMode::Uniform,
            iter_log: IterLog::Path,
        }
    }

    pub fn local(h: f64, log_power: f64, iter_log: IterLog) -> Self {
        ModulusSpec {
            h,
            log_power,
            loglog_power: 0.5,
            mode: ModulusMode::Local,
            iter_log,
        }
    }

    /// r^H/L^H.
    pub fn chung(h: f64, iter_log: IterLog) -> Self {
        ModulusSpec {
            h,
            log_power: 0.0,
            loglog_power: h,
            mode: ModulusMode::Chung,
            iter_log,
        }
    }

    /// Ensemble iterated log with k = max(1, N/64).
    pub fn default_ensemble(replicas: usize) -> IterLog {
        IterLog::Ensemble { k: (replicas / 64).max(1) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h < 1.0) {
            return Err(Error::Domain(format!("H must lie in (0,1), got {}", self.h)));
        }
        if !(self.log_power >= 0.0) {
            return Err(Error::Domain("log power must be nonnegative".into()));
        }
        if self.mode != ModulusMode::Chung && !(self.loglog_power >= 0.0) {
            return Err(Error::Domain("loglog power must be nonnegative".into()));
        }
        if let IterLog::Ensemble { k } = self.iter_log {
            if k == 0 {
                return Err(Error::Domain("order statistic k must be at least 1".into()));
            }
        }
        Ok(())
    }

    fn normalizer(&self, delta: f64, replicas: usize) -> f64 {
        let lg = (1.0 / delta).ln();
        let it = match self.iter_log {
            IterLog::Path => lg.ln(),
            IterLog::Ensemble { k } => (replicas as f64 / k as f64).ln(),
        };
        let base = delta.powf(self.h) * lg.powf(self.log_power);
        match self.mode {
            ModulusMode::Chung => base / it.powf(self.loglog_power),
            _ => base * it.powf(self.loglog_power),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusReport {
    pub delta_grid: Vec<f64>,
    pub statistic: Vec<f64>,
    /// mean of the statistic over the last five δ
    pub plateau_estimate: f64,
    pub plateau_cv: f64,
    /// slope of log(aggregated increment) against log δ
    pub fitted_h: f64,
    pub fitted_h_stderr: f64,
}

/// δ_j = δ_max·2^{−j}, j < levels.
pub fn dyadic_deltas(delta_max: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|j| delta_max * 0.5f64.powi(j as i32)).collect()
}

fn check_iter_log(spec: &ModulusSpec, deltas: &[f64], replicas: usize) -> Result<()> {
    match spec.iter_log {
        IterLog::Path if spec.loglog_power != 0.0 && deltas[0] >= (-1.0f64).exp() => Err(Error::Precondition(
            "log log(1/δ) needs δ < 1/e".into(),
        )),
        IterLog::Ensemble { k } if k >= replicas => Err(Error::Precondition(format!(
            "order statistic k = {k} needs more than k replicas, got {replicas}"
        ))),
        _ => Ok(()),
    }
}

fn check_deltas(deltas: &[f64], spacing: f64) -> Result<()> {
    if deltas.len() < 5 {
        return Err(Error::Precondition("need at least five δ values".into()));
    }
    if deltas.iter().any(|d| !(*d > 0.0 && *d < 1.0)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("δ grid must be strictly decreasing inside (0,1)".into()));
    }
    let dmin = deltas[deltas.len() - 1];
    if spacing > dmin / 10.0 + 1e-12 * dmin {
        return Err(Error::Precondition(format!(
            "grid spacing {spacing:.3e} exceeds δ_min/10 = {:.3e}; refine the grid by a factor {:.1}",
            dmin / 10.0,
            spacing * 10.0 / dmin
        )));
    }
    Ok(())
}

/// Ordinary least squares: (slope, intercept, standard error of the slope).
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return Err(Error::Precondition("regression needs at least three matched points".into()));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Numeric("regressor has no spread".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    let se = (rss / (n as f64 - 2.0) / sxx).sqrt();
    Ok((slope, icpt, se))
}

fn report(deltas: &[f64], raw: Vec<f64>, norm: Vec<f64>) -> Result<ModulusReport> {
    if raw.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Numeric("modulus statistic must be positive and finite".into()));
    }
    let statistic: Vec<f64> = raw.iter().zip(&norm).map(|(r, n)| r / n).collect();
    let tail = &statistic[statistic.len() - 5..];
    let mean = tail.iter().sum::<f64>() / 5.0;
    let var = tail.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
    let lx: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = raw.iter().map(|v| v.ln()).collect();
    let (slope, _, se) = ols(&lx, &ly)?;
    Ok(ModulusReport {
        delta_grid: deltas.to_vec(),
        statistic,
        plateau_estimate: mean,
        plateau_cv: var.sqrt() / mean,
        fitted_h: slope,
        fitted_h_stderr: se,
    })
}

/// Largest max − min over all windows of `w + 1` consecutive samples.
pub fn max_window_range(x: &[f64], w: usize) -> f64 {
    if x.len() < 2 || w == 0 {
        return 0.0;
    }
    let w = w.min(x.len() - 1);
    let mut hi: VecDeque<usize> = VecDeque::new();
    let mut lo: VecDeque<usize> = VecDeque::new();
    let mut best: f64 = 0.0;
    for i in 0..x.len() {
        while hi.back().is_some_and(|&j| x[j] <= x[i]) {
            hi.pop_back();
        }
        hi.push_back(i);
        while lo.back().is_some_and(|&j| x[j] >= x[i]) {
            lo.pop_back();
        }
        lo.push_back(i);
        while *hi.front().unwrap() + w < i {
            hi.pop_front();
        }
        while *lo.front().unwrap() + w < i {
            lo.pop_front();
        }
        if i >= w {
            best = best.max(x[*hi.front().unwrap()] - x[*lo.front().unwrap()]);
        }
    }
    best
}

fn steps(delta: f64, h: f64) -> usize {
    (delta / h * (1.0 + 1e-9)).floor() as usize
}

fn index_range(grid: &[f64], a: f64, b: f64) -> Result<(usize, usize)> {
    let lo = grid.iter().position(|&t| t >= a - 1e-12 * a.abs().max(1.0));
    let hi = grid.iter().rposition(|&t| t <= b + 1e-12 * b.abs().max(1.0));
    match (lo, hi) {
        (Some(l), Some(h)) if h > l => Ok((l, h)),
        _ => Err(Error::Precondition(format!("interval [{a}, {b}] holds fewer than two grid points"))),
    }
}

/// Replica mean of sup_{|t−s|≤δ, s,t∈I}|U(t) − U(s)| divided by the normalizer at δ.
pub fn uniform_modulus_stat(paths: &SamplePathSet, spec: &ModulusSpec, interval: (f64, f64), deltas: &[f64]) -> Result<ModulusReport> {
    spec.validate()?;
    if spec.mode != ModulusMode::Uniform {
        return Err(Error::Precondition("uniform_modulus_stat needs a uniform spec".into()));
    }
    let h = paths.spacing()?;
    check_deltas(deltas, h)?;
    let (i0, i1) = index_range(&paths.grid, interval.0, interval.1)?;
    let per: Vec<Vec<f64>> = paths
        .values
        .par_iter()
        .map(|row| deltas.iter().map(|&d| max_window_range(&row[i0..=i1], steps(d, h))).collect())
        .collect();
    let n = paths.replicas();
    let raw: Vec<f64> = (0..deltas.len()).map(|j| per.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let norm = deltas.iter().map(|&d| spec.normalizer(d, n)).collect();
    report(deltas, raw, norm)
}

fn kth(values: &mut [f64], k: usize, largest: bool) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let k = k.min(values.len()).max(1);
    if largest {
        values[values.len() - k]
    } else {
        values[k - 1]
    }
}

/// sup_{|s−t₀|≤δ}|U(s) − U(t₀)| aggregated over replicas, divided by the normalizer.
pub fn local_modulus_stat(paths: &SamplePathSet, spec: &ModulusSpec, t0: f64, deltas: &[f64]) -> Result<ModulusReport> {
    spec.validate()?;
    if spec.mode != ModulusMode::Local {
        return Err(Error::Precondition("local_modulus_stat needs a local spec".into()));
    }
    let h = paths.spacing()?;
    check_deltas(deltas, h)?;
    check_iter_log(spec, deltas, paths.replicas())?;
    let g = &paths.grid;
    if t0 - deltas[0] < g[0] - 1e-12 || t0 + deltas[0] > g[g.len() - 1] + 1e-12 {
        return Err(Error::Precondition(format!(
            "t0 = {t0} must be at least δ_max = {} from the ends of the grid",
            deltas[0]
        )));
    }
    let c = ((t0 - g[0]) / h).round() as usize;
    let per: Vec<Vec<f64>> = paths
        .values
        .par_iter()
        .map(|row| {
            let mut out = Vec::with_capacity(deltas.len());
            // running sup over growing symmetric windows
            let mut sup: f64 = 0.0;
            let mut reach = 0usize;
            for &d in deltas.iter().rev() {
                let s = steps(d, h);
                while reach < s {
                    reach += 1;
                    sup = sup.max((row[c + reach] - row[c]).abs()).max((row[c - reach] - row[c]).abs());
                }
                out.push(sup);
            }
            out.reverse();
            out
        })
        .collect();
    let n = paths.replicas();
    let raw: Vec<f64> = (0..deltas.len())
        .map(|j| {
            let mut col: Vec<f64> = per.iter().map(|r| r[j]).collect();
            match spec.iter_log {
                IterLog::Path => col.iter().sum::<f64>() / n as f64,
                IterLog::Ensemble { k } => kth(&mut col, k, true),
            }
        })
        .collect();
    let norm = deltas.iter().map(|&d| spec.normalizer(d, n)).collect();
    report(deltas, raw, norm)
}

/// max_{[0,r]}|U − U(0)| aggregated over replicas (minimum, or k-th smallest), divided by the normalizer.
pub fn chung_stat(paths: &SamplePathSet, spec: &ModulusSpec, r_grid: &[f64]) -> Result<ModulusReport> {
    spec.validate()?;
    if spec.mode != ModulusMode::Chung {
        return Err(Error::Precondition("chung_stat needs a Chung spec".into()));
    }
    let h = paths.spacing()?;
    check_deltas(r_grid, h)?;
    check_iter_log(spec, r_grid, paths.replicas())?;
    if paths.grid[0].abs() > 1e-12 {
        return Err(Error::Precondition("Chung statistics need paths starting at t = 0".into()));
    }
    if r_grid[0] > paths.grid[paths.grid.len() - 1] + 1e-12 {
        return Err(Error::Precondition("r grid exceeds the simulated horizon".into()));
    }
    let per: Vec<Vec<f64>> = paths
        .values
        .par_iter()
        .map(|row| {
            let mut out = Vec::with_capacity(r_grid.len());
            let mut m: f64 = 0.0;
            let mut reach = 0usize;
            for &r in r_grid.iter().rev() {
                let s = steps(r, h);
                while reach < s {
                    reach += 1;
                    m = m.max((row[reach] - row[0]).abs());
                }
                out.push(m);
            }
            out.reverse();
            out
        })
        .collect();
    let n = paths.replicas();
    let k = match spec.iter_log {
        IterLog::Path => 1,
        IterLog::Ensemble { k } => k,
    };
    let raw: Vec<f64> = (0..r_grid.len())
        .map(|j| {
            let mut col: Vec<f64> = per.iter().map(|r| r[j]).collect();
            kth(&mut col, k, false)
        })
        .collect();
    let norm = r_grid.iter().map(|&r| spec.normalizer(r, n)).collect();
    report(r_grid, raw, norm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderFit {
    pub h: f64,
    pub stderr: f64,
    pub points: usize,
}

/// Half the slope of log second moment against log lag, over lags inside the window.
pub fn holder_fit(lags: &[f64], second_moments: &[f64], window: (f64, f64)) -> Result<HolderFit> {
    if lags.len() != second_moments.len() {
        return Err(Error::Precondition("lags and moments differ in length".into()));
    }
    if lags.iter().chain(second_moments).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Precondition("lags and second moments must be positive".into()));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = lags
        .iter()
        .zip(second_moments)
        .filter(|(l, _)| **l >= window.0 && **l <= window.1)
        .map(|(l, m)| (l.ln(), m.ln()))
        .unzip();
    if x.len() < 10 {
        return Err(Error::Precondition(format!("need at least 10 lags in the window, got {}", x.len())));
    }
    let (s, _, se) = ols(&x, &y)?;
    Ok(HolderFit {
        h: s / 2.0,
        stderr: se / 2.0,
        points: x.len(),
    })
}

/// Fit p in m₂(r) ≈ c·r^{2H}·log(1/r)^p with H fixed: (p, stderr).
pub fn log_factor_detect(lags: &[f64], second_moments: &[f64], h_fixed: f64) -> Result<(f64, f64)> {
    if lags.len() != second_moments.len() || lags.len() < 5 {
        return Err(Error::Precondition("need at least five matched lags and moments".into()));
    }
    if lags.iter().chain(second_moments).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Precondition("lags and second moments must be positive".into()));
    }
    if lags.iter().any(|&r| r >= 1.0) {
        return Err(Error::Precondition("lags must lie below 1".into()));
    }
    let (lo, hi) = lags.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    if hi / lo < 1e3 {
        return Err(Error::Precondition(format!(
            "lags span {:.2} decades; at least 3 are needed to separate the log factor",
            (hi / lo).log10()
        )));
    }
    let x: Vec<f64> = lags.iter().map(|r| (1.0 / r).ln().ln()).collect();
    let y: Vec<f64> = lags
        .iter()
        .zip(second_moments)
        .map(|(r, m)| m.ln() - 2.0 * h_fixed * r.ln())
        .collect();
    let (p, _, se) = ols(&x, &y)?;
    Ok((p, se))
}
