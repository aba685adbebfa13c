//! Replicated Gaussian paths: exact sampling from a covariance matrix,
//! FFT synthesis of stationary fields, and random-phase synthesis of
//! stationary-increment processes.

use crate::covariance::{BifBMParams, CovMatrix};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rng::{fill_normals, stream, Role};
use crate::spectral::{eval_sd, Axis, FieldKind, SpectralDensity};
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use rustfft::{num_complex::Complex64, FftPlanner};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Cholesky,
    Spectral,
    /// cumulative sums of independent Gaussian increments (Brownian motion only)
    Increments,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cholesky => "cholesky",
            Method::Spectral => "spectral",
            Method::Increments => "increments",
        }
    }
}

/// What the paths were drawn from.
#[derive(Debug, Clone, PartialEq)]
pub enum PathTarget {
    Model {
        params: ModelParams,
        axis: Axis,
        field: FieldKind,
    },
    Bifbm(BifBMParams),
    Brownian,
    Matrix,
    Density(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePathSet {
    pub grid: Vec<f64>,
    /// one row per replica
    pub values: Vec<Vec<f64>>,
    pub seed: u64,
    pub method: Method,
    pub target: PathTarget,
}

impl SamplePathSet {
    pub fn replicas(&self) -> usize {
        self.values.len()
    }

    /// Spacing of a uniform grid, or an error if the grid is not uniform.
    pub fn spacing(&self) -> Result<f64> {
        uniform_spacing(&self.grid)
    }
}

pub(crate) fn uniform_spacing(grid: &[f64]) -> Result<f64> {
    if grid.len() < 2 {
        return Err(Error::Precondition("grid needs at least two points".into()));
    }
    let h = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::Precondition("grid must be increasing".into()));
    }
    for (i, w) in grid.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(grid[i].abs() * 1e-6) {
            return Err(Error::Precondition("grid must be uniform".into()));
        }
    }
    Ok(h)
}

/// Uniform grid {start + j·spacing : j < n}.
pub fn uniform_grid(start: f64, spacing: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| start + spacing * j as f64).collect()
}

/// Square root factor of a PSD matrix: Cholesky, falling back to the
/// symmetric eigen-decomposition when the matrix is singular.
fn psd_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(ch) = m.clone().cholesky() {
        return Ok(ch.l());
    }
    let maxd = m.diagonal().max();
    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.min() < -1e-8 * maxd.max(f64::MIN_POSITIVE) {
        return Err(Error::Numeric(format!(
            "cannot factor matrix with eigenvalue {:e}",
            eig.eigenvalues.min()
        )));
    }
    let mut v = eig.eigenvectors;
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let s = l.max(0.0).sqrt();
        v.column_mut(j).scale_mut(s);
    }
    Ok(v)
}

/// Exact Gaussian vectors with covariance `m` (one-dimensional points).
pub fn sample_cholesky(m: &CovMatrix, replicas: usize, seed: u64) -> Result<SamplePathSet> {
    if replicas == 0 {
        return Err(Error::Precondition("need at least one replica".into()));
    }
    if m.points.iter().any(|p| p.len() != 1) {
        return Err(Error::Precondition("sample_cholesky stores one-dimensional coordinates".into()));
    }
    let l = psd_factor(&m.entries)?;
    let n = m.len();
    let values: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64, Role::Cholesky);
            let mut z = vec![0.0; n];
            fill_normals(&mut rng, &mut z);
            (0..n)
                .map(|i| (0..l.ncols()).map(|j| l[(i, j)] * z[j]).sum())
                .collect()
        })
        .collect();
    Ok(SamplePathSet {
        grid: m.points.iter().map(|p| p[0]).collect(),
        values,
        seed,
        method: Method::Cholesky,
        target: PathTarget::Matrix,
    })
}

/// Brownian motion on {0, h, …, (n−1)h} from cumulative sums of N(0, h) increments.
pub fn sample_brownian(n: usize, spacing: f64, replicas: usize, seed: u64) -> Result<SamplePathSet> {
    if n < 2 || replicas == 0 || !(spacing > 0.0) {
        return Err(Error::Precondition("need n ≥ 2, replicas ≥ 1 and positive spacing".into()));
    }
    let sd = spacing.sqrt();
    let values = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64, Role::Brownian);
            let mut z = vec![0.0; n - 1];
            fill_normals(&mut rng, &mut z);
            let mut path = Vec::with_capacity(n);
            let mut acc = 0.0;
            path.push(0.0);
            for x in z {
                acc += sd * x;
                path.push(acc);
            }
            path
        })
        .collect();
    Ok(SamplePathSet {
        grid: uniform_grid(0.0, spacing, n),
        values,
        seed,
        method: Method::Increments,
        target: PathTarget::Brownian,
    })
}

/// Options for periodic FFT synthesis of a stationary field on a line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryOptions {
    /// the periodic box is `padding` times the grid span
    pub padding: usize,
    /// largest admissible density at the Nyquist frequency, relative to the peak
    pub nyquist_ratio: f64,
    /// fold the power-law tail above Nyquist back onto the grid frequencies
    pub alias_tail: bool,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        StationaryOptions {
            padding: 4,
            nyquist_ratio: 1e-6,
            alias_tail: true,
        }
    }
}

/// Stationary field X(x_j) = Re Σ_k √(S(ξ_k)w_k Δξ) Z_k e^{iξ_k x_j} with complex
/// standard normals Z_k, w_0 = 1 and w_k = 2 otherwise; the density S is
/// two-sided with variance ∫_R S.
pub fn sample_stationary_fn<S>(
    density: S,
    n: usize,
    spacing: f64,
    replicas: usize,
    seed: u64,
    opts: StationaryOptions,
) -> Result<SamplePathSet>
where
    S: Fn(f64) -> Result<f64> + Sync,
{
    if n < 2 || replicas == 0 || !(spacing > 0.0) || opts.padding == 0 {
        return Err(Error::Precondition("need n ≥ 2, replicas ≥ 1, positive spacing and padding".into()));
    }
    let m = (n * opts.padding).next_power_of_two();
    let dxi = 2.0 * PI / (m as f64 * spacing);
    let half = m / 2;
    let dens: Vec<f64> = (0..=half)
        .into_par_iter()
        .map(|k| {
            let xi = k as f64 * dxi;
            // the zero frequency is evaluated a quarter bin in to avoid 0/0 forms
            density(if k == 0 { 0.25 * dxi } else { xi })
        })
        .collect::<Result<Vec<_>>>()?;
    if dens.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::Numeric("density must be finite and nonnegative".into()));
    }
    let peak = dens.iter().cloned().fold(0.0, f64::max);
    let nyq = dens[half];
    if nyq > opts.nyquist_ratio * peak {
        return Err(Error::Precondition(format!(
            "density at the Nyquist frequency {:.4e} is {:.3e} of its peak; \
             refine the spacing below {:.4e} or raise the cutoff",
            half as f64 * dxi,
            nyq / peak,
            spacing
        )));
    }
    let folded = if opts.alias_tail {
        fold_tail(&dens, dxi)?
    } else {
        dens.clone()
    };
    let amp: Vec<f64> = (0..half)
        .map(|k| {
            let w = if k == 0 { 1.0 } else { 2.0 };
            (folded[k] * w * dxi).sqrt()
        })
        .collect();
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(m);
    let values = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64, Role::StationaryField);
            let mut z = vec![0.0; 2 * half];
            fill_normals(&mut rng, &mut z);
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            for k in 0..half {
                buf[k] = Complex64::new(amp[k] * z[2 * k], amp[k] * z[2 * k + 1]);
            }
            fft.process(&mut buf);
            buf[..n].iter().map(|c| c.re).collect::<Vec<f64>>()
        })
        .collect();
    Ok(SamplePathSet {
        grid: uniform_grid(0.0, spacing, n),
        values,
        seed,
        method: Method::Spectral,
        target: PathTarget::Density("custom".into()),
    })
}

/// Add Σ_{m≥1} S(2mξ_N ± ξ) to each grid frequency, with S continued above
/// the Nyquist frequency ξ_N by the power law through S(ξ_N/2) and S(ξ_N).
fn fold_tail(dens: &[f64], dxi: f64) -> Result<Vec<f64>> {
    let half = dens.len() - 1;
    let xn = half as f64 * dxi;
    let (s1, s2) = (dens[half / 2], dens[half]);
    if s2 == 0.0 {
        return Ok(dens.to_vec());
    }
    let a = (s1 / s2).ln() / 2f64.ln();
    if !(a > 1.0) {
        return Err(Error::Numeric(format!(
            "density tail exponent {a:.3} above Nyquist is not integrable"
        )));
    }
    let c = s2 * xn.powf(a);
    const TERMS: usize = 2000;
    let out = (0..=half)
        .into_par_iter()
        .map(|k| {
            let xi = k as f64 * dxi;
            let mut add = 0.0;
            for m in 1..=TERMS {
                let base = 2.0 * m as f64 * xn;
                add += (base - xi).powf(-a) + (base + xi).powf(-a);
            }
            // remaining terms by the integral of 2(2mξ_N)^{−a} over m > TERMS + 1/2
            let m0 = TERMS as f64 + 0.5;
            add += 2.0 * (2.0 * xn).powf(-a) * m0.powf(1.0 - a) / (a - 1.0);
            dens[k] + c * add
        })
        .collect();
    Ok(out)
}

/// Spatial field at fixed time along a line, from its spectral density (d = 1).
pub fn sample_spectral_stationary(
    sd: &SpectralDensity,
    n: usize,
    spacing: f64,
    replicas: usize,
    seed: u64,
) -> Result<SamplePathSet> {
    sample_spectral_stationary_with(sd, n, spacing, replicas, seed, StationaryOptions::default())
}

pub fn sample_spectral_stationary_with(
    sd: &SpectralDensity,
    n: usize,
    spacing: f64,
    replicas: usize,
    seed: u64,
    opts: StationaryOptions,
) -> Result<SamplePathSet> {
    if sd.axis != Axis::Spatial {
        return Err(Error::Precondition("stationary synthesis needs a spatial density".into()));
    }
    if sd.params.dim != 1 {
        return Err(Error::Domain("stationary synthesis is implemented for d = 1".into()));
    }
    let mut set = sample_stationary_fn(|xi| eval_sd(sd, xi), n, spacing, replicas, seed, opts)?;
    set.target = PathTarget::Model {
        params: sd.params,
        axis: sd.axis,
        field: sd.field,
    };
    Ok(set)
}

/// Log-uniform frequency bins for stationary-increment synthesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub tau_min: f64,
    pub tau_max: f64,
    pub bins: usize,
}

impl FrequencyGrid {
    /// τ_min = 1/(100·span), τ_max = 10⁶/spacing, 2¹⁴ bins.
    pub fn for_grid(span: f64, spacing: f64) -> Self {
        FrequencyGrid {
            tau_min: 1.0 / (100.0 * span),
            tau_max: 1e6 / spacing,
            bins: 1 << 14,
        }
    }

    /// Geometric bin centres and widths.
    pub fn bins(&self) -> Vec<(f64, f64)> {
        let r = (self.tau_max / self.tau_min).ln() / self.bins as f64;
        (0..self.bins)
            .map(|k| {
                let lo = self.tau_min * (r * k as f64).exp();
                let hi = self.tau_min * (r * (k + 1) as f64).exp();
                ((lo * hi).sqrt(), hi - lo)
            })
            .collect()
    }
}

const CHUNK: usize = 256;

/// Stationary-increment process
/// X(t) = Σ_k a_k[(cos tτ_k − 1)ξ_k + sin(tτ_k)η_k], a_k² = Δ(τ_k)Δτ_k/π,
/// so that E[X(t) − X(s)]² ≈ (1/π)∫_R(1 − cos((t−s)τ))Δ(τ)dτ. X(0) = 0.
pub fn sample_stat_increments_fn<D>(
    density: D,
    times: &[f64],
    replicas: usize,
    seed: u64,
    freq: FrequencyGrid,
) -> Result<SamplePathSet>
where
    D: Fn(f64) -> Result<f64> + Sync,
{
    if replicas == 0 || times.is_empty() {
        return Err(Error::Precondition("need at least one replica and one time".into()));
    }
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::Precondition("times must be nonnegative".into()));
    }
    let span = times.iter().cloned().fold(0.0, f64::max);
    let mut sorted = times.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let spacing = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let spacing = if spacing.is_finite() { spacing } else { span.max(1.0) };
    if !(freq.tau_min > 0.0 && freq.bins >= 1) {
        return Err(Error::Precondition("frequency grid needs τ_min > 0 and at least one bin".into()));
    }
    if freq.tau_min > 1.0 / (10.0 * span.max(f64::MIN_POSITIVE)) || freq.tau_max < 10.0 / spacing {
        return Err(Error::Precondition(format!(
            "frequency grid [{:.3e}, {:.3e}] must cover [{:.3e}, {:.3e}]",
            freq.tau_min,
            freq.tau_max,
            1.0 / (10.0 * span),
            10.0 / spacing
        )));
    }
    let bins = freq.bins();
    let amp: Vec<f64> = bins
        .par_iter()
        .map(|&(tau, w)| density(tau).map(|v| (v * w / PI).sqrt()))
        .collect::<Result<Vec<_>>>()?;
    if amp.iter().any(|a| !a.is_finite()) {
        return Err(Error::Numeric("density must be finite and nonnegative on the bins".into()));
    }
    let n = times.len();
    let k = bins.len();
    // coefficients: column r holds (a_k ξ_k, a_k η_k) of replica r
    let mut coef = DMatrix::<f64>::zeros(2 * k, replicas);
    let cols: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64, Role::Increments);
            let mut z = vec![0.0; 2 * k];
            fill_normals(&mut rng, &mut z);
            for j in 0..k {
                z[2 * j] *= amp[j];
                z[2 * j + 1] *= amp[j];
            }
            z
        })
        .collect();
    for (r, c) in cols.iter().enumerate() {
        coef.column_mut(r).copy_from_slice(c);
    }
    let mut out = DMatrix::<f64>::zeros(n, replicas);
    for start in (0..k).step_by(CHUNK) {
        let end = (start + CHUNK).min(k);
        let width = end - start;
        let rows: Vec<Vec<f64>> = times
            .par_iter()
            .map(|&t| {
                let mut row = vec![0.0; 2 * width];
                for j in 0..width {
                    let x = t * bins[start + j].0;
                    // cos − 1 = −2 sin²(x/2) keeps small phases accurate
                    let h = (0.5 * x).sin();
                    row[2 * j] = -2.0 * h * h;
                    row[2 * j + 1] = x.sin();
                }
                row
            })
            .collect();
        let basis = DMatrix::from_fn(n, 2 * width, |i, j| rows[i][j]);
        let block = coef.rows(2 * start, 2 * width);
        out.gemm(1.0, &basis, &block, 1.0);
    }
    let values = (0..replicas).map(|r| out.column(r).iter().cloned().collect()).collect();
    Ok(SamplePathSet {
        grid: times.to_vec(),
        values,
        seed,
        method: Method::Spectral,
        target: PathTarget::Density("custom".into()),
    })
}

/// Temporal stationary-increment process X (base field or d = 1 gradient).
pub fn sample_spectral_stat_increments(
    sd: &SpectralDensity,
    times: &[f64],
    replicas: usize,
    seed: u64,
    freq: FrequencyGrid,
) -> Result<SamplePathSet> {
    if sd.axis != Axis::Temporal {
        return Err(Error::Precondition("increment synthesis needs a temporal density".into()));
    }
    let mut set = sample_stat_increments_fn(|tau| eval_sd(sd, tau), times, replicas, seed, freq)?;
    set.target = PathTarget::Model {
        params: sd.params,
        axis: sd.axis,
        field: sd.field,
    };
    Ok(set)
}

/// Replica-averaged empirical second moment of increments at integer lags of a uniform grid.
pub fn empirical_variogram(paths: &SamplePathSet, lags: &[usize]) -> Result<Vec<(f64, f64)>> {
    let h = paths.spacing()?;
    let n = paths.grid.len();
    lags.iter()
        .map(|&l| {
            if l == 0 || l >= n {
                return Err(Error::Precondition(format!("lag {l} outside 1..{n}")));
            }
            let mut acc = 0.0;
            for row in &paths.values {
                let mut s = 0.0;
                for i in 0..n - l {
                    let d = row[i + l] - row[i];
                    s += d * d;
                }
                acc += s / (n - l) as f64;
            }
            Ok((l as f64 * h, acc / paths.values.len() as f64))
        })
        .collect()
}

/// Integer lags, log-spaced between lo and hi steps, deduplicated.
pub fn log_lags(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..count)
        .map(|i| {
            let x = (lo as f64).ln() + ((hi as f64).ln() - (lo as f64).ln()) * i as f64 / (count.max(2) - 1) as f64;
            x.exp().round() as usize
        })
        .collect();
    v.dedup();
    v
}
