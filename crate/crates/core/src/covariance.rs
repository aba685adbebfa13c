//! Two-point covariances, the bifractional Brownian motion identification,
//! covariance matrices, conditional variances and SLND checks.

use crate::error::{Error, Result};
use crate::model::{Family, ModelParams};
use crate::quad::{integrate_breaks, integrate_breaks_to_inf, QuadOpts};
use crate::radial::sphere_area;
use crate::specfun::{gamma_fn, hyp2f1_with, MittagLefflerTable};
use crate::spectral::{spatial_covariance, SpectralDensity};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use crate::rng::{stream, uniform, Role};
use rayon::prelude::*;
use std::f64::consts::{LN_2, PI};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifBMParams {
    pub h: f64,
    pub k: f64,
    pub scale: f64,
}

impl BifBMParams {
    pub fn new(h: f64, k: f64, scale: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::Domain(format!("H must lie in (0,1), got {h}")));
        }
        if !(k > 0.0 && k <= 1.0) {
            return Err(Error::Domain(format!("K must lie in (0,1], got {k}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!("scale must be positive, got {scale}")));
        }
        Ok(BifBMParams { h, k, scale })
    }
}

/// scale²·2^{−K}((t^{2H} + s^{2H})^K − |t−s|^{2HK}).
pub fn bifbm_cov(p: &BifBMParams, t: f64, s: f64) -> f64 {
    let (t, s) = (t.abs(), s.abs());
    let a = t.powf(2.0 * p.h) + s.powf(2.0 * p.h);
    let d = (t - s).abs().powf(2.0 * p.h * p.k);
    p.scale * p.scale * (-p.k * LN_2).exp() * (a.powf(p.k) - d)
}

/// ∫_{R^d} e^{−|ξ|⁴} dξ by radial quadrature.
pub fn quartic_gaussian_integral(d: usize) -> Result<f64> {
    let f = |r: f64| r.powi(d as i32 - 1) * (-r.powi(4)).exp();
    let v = integrate_breaks(f, &[0.0, 0.5, 1.0, 1.5, 2.5, 4.0], QuadOpts::new(0.0, 1e-14))?;
    Ok(sphere_area(d) * v.value)
}

/// (2π)^{−d/2}(8/ε)^{d/8}·2^{e}/√(2 − d/2)·√(∫e^{−|ξ|⁴}dξ) with a free power-of-two exponent e.
pub fn lks_bifbm_constant_with_exponent(epsilon: f64, d: usize, two_exponent: f64) -> Result<f64> {
    if !(1..=3).contains(&d) {
        return Err(Error::Domain(format!("dim must be 1, 2 or 3, got {d}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let dd = d as f64;
    let j = quartic_gaussian_integral(d)?;
    Ok((2.0 * PI).powf(-dd / 2.0) * (8.0 / epsilon).powf(dd / 8.0) * 2f64.powf(two_exponent) / (2.0 - dd / 2.0).sqrt() * j.sqrt())
}

/// Scale c_d with lks_temporal_cov(ϑ = 0) = c_d²·R^{1/2,(4−d)/4}; the power of two is 2^{(4−d)/8}.
pub fn lks_bifbm_constant(epsilon: f64, d: usize) -> Result<f64> {
    lks_bifbm_constant_with_exponent(epsilon, d, (4.0 - d as f64) / 8.0)
}

/// Bifractional parameters of the L-KS temporal law at ϑ = 0.
pub fn lks_bifbm_params(epsilon: f64, d: usize) -> Result<BifBMParams> {
    BifBMParams::new(0.5, (4.0 - d as f64) / 4.0, lks_bifbm_constant(epsilon, d)?)
}

fn ordered(t: f64, s: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0 && s >= 0.0 && t.is_finite() && s.is_finite()) {
        return Err(Error::Precondition(format!("times must be nonnegative, got ({t}, {s})")));
    }
    Ok(if s <= t { (t, s) } else { (s, t) })
}

/// E[U(t,x)U(s,x)] for L-KS: (2π)^{−d}∫ (4/(εq))(e^{−ε(t−s)q/8} − e^{−ε(t+s)q/8}) dξ, q = (|ξ|² − 2ϑ)².
pub fn lks_temporal_cov(p: &ModelParams, t: f64, s: f64) -> Result<f64> {
    p.validate()?;
    if p.family != Family::Lks {
        return Err(Error::Domain("lks_temporal_cov needs L-KS parameters".into()));
    }
    let (t, s) = ordered(t, s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let d = p.dim;
    let e = p.epsilon;
    let f = |r: f64| {
        let w = r * r - 2.0 * p.theta;
        let q = w * w;
        let x = e * s * q / 4.0;
        let inner = if x < 1e-10 { s * (1.0 - x / 2.0) } else { -(-x).exp_m1() * 4.0 / (e * q) };
        r.powi(d as i32 - 1) * (-e * (t - s) * q / 8.0).exp() * inner
    };
    let mut knees = Vec::new();
    let th2 = 2.0 * p.theta;
    for scale in [t + s, s, t - s] {
        if scale <= 0.0 {
            continue;
        }
        let w = (8.0 / (e * scale)).sqrt();
        for r2 in [th2 + w, th2 - w, th2 + 0.1 * w, th2 + 10.0 * w, th2 + 100.0 * w] {
            if r2 > 0.0 {
                knees.push(r2.sqrt());
            }
        }
    }
    if th2 > 0.0 {
        knees.push(th2.sqrt());
    }
    knees.sort_by(|a, b| a.total_cmp(b));
    knees.dedup();
    let v = integrate_breaks_to_inf(f, 0.0, &knees, QuadOpts::new(1e-300, 1e-12))?;
    Ok((2.0 * PI).powi(-(d as i32)) * sphere_area(d) * v.value)
}

/// Temporal covariance of the time-fractional field, reduced to
/// (2π)^{−d}ω_d 2^{d/2}∫_0^s u^{−βd/2} G((t−s+u)/u) du with
/// G(λ) = ∫_0^∞ y^{d−1}E_β(−y²λ^β)E_β(−y²) dy.
#[derive(Debug, Clone)]
pub struct TfTemporalCov {
    params: ModelParams,
    table: MittagLefflerTable,
    g1: f64,
}

impl TfTemporalCov {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        if params.family != Family::Tf {
            return Err(Error::Domain("TfTemporalCov needs time-fractional parameters".into()));
        }
        let table = MittagLefflerTable::new(params.beta)?;
        let mut c = TfTemporalCov { params, table, g1: 0.0 };
        c.g1 = c.g(1.0)?;
        Ok(c)
    }

    fn g(&self, lambda: f64) -> Result<f64> {
        let b = self.params.beta;
        let d = self.params.dim as i32;
        let lb = lambda.powf(b);
        let f = |v: f64| {
            let y2 = (2.0 * v).exp();
            (d as f64 * v).exp() * self.table.eval_neg(y2 * lb) * self.table.eval_neg(y2)
        };
        let v1 = -0.5 * lb.ln();
        let mut pts = vec![-35.0, 40.0, 0.0, -2.0, 2.0, v1, v1 - 2.0, v1 + 2.0];
        pts.retain(|x| *x >= -35.0 && *x <= 40.0);
        pts.sort_by(|a, c| a.total_cmp(c));
        pts.dedup();
        Ok(integrate_breaks(f, &pts, QuadOpts::new(1e-300, 1e-12))?.value)
    }

    fn prefactor(&self) -> f64 {
        let d = self.params.dim;
        (2.0 * PI).powi(-(d as i32)) * sphere_area(d) * 2f64.powf(d as f64 / 2.0)
    }

    pub fn cov(&self, t: f64, s: f64) -> Result<f64> {
        let (t, s) = ordered(t, s)?;
        if s == 0.0 {
            return Ok(0.0);
        }
        let a = 1.0 - self.params.beta * self.params.dim as f64 / 2.0;
        if t == s {
            return Ok(self.prefactor() * self.g1 * s.powf(a) / a);
        }
        let gap = t - s;
        // u = e^w, integrand u^{a} G((gap + u)/u) in w
        let f = |w: f64| {
            let u = w.exp();
            u.powf(a) * self.g((gap + u) / u).unwrap_or(f64::NAN)
        };
        let top = s.ln();
        let lo = top - 45.0 / a;
        let lg = gap.ln();
        let mut pts = vec![lo, top];
        for k in [-6.0, -3.0, -1.0, 0.0, 1.0, 3.0] {
            let x = lg + k;
            if x > lo && x < top {
                pts.push(x);
            }
        }
        pts.sort_by(|x, y| x.total_cmp(y));
        let v = integrate_breaks(f, &pts, QuadOpts::new(1e-300, 1e-10))?;
        if !v.value.is_finite() {
            return Err(Error::Numeric("time-fractional covariance quadrature failed".into()));
        }
        Ok(self.prefactor() * v.value)
    }
}

pub fn tf_temporal_cov(p: &ModelParams, t: f64, s: f64) -> Result<f64> {
    TfTemporalCov::new(*p)?.cov(t, s)
}

/// Temporal covariance for either family.
pub fn temporal_cov_fn(p: &ModelParams) -> Result<Box<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>> {
    match p.family {
        Family::Lks => {
            let q = *p;
            Ok(Box::new(move |t, s| lks_temporal_cov(&q, t, s)))
        }
        Family::Tf => {
            let c = TfTemporalCov::new(*p)?;
            Ok(Box::new(move |t, s| c.cov(t, s)))
        }
    }
}

/// Fixed-ξ double series for ∫_0^s E_β(−a(t−r)^β)E_β(−a(s−r)^β) dr:
/// Σ_k (−a)^k Σ_j t^{βj}s^{β(k−j)+1}₂F₁(1, −βj; 2+β(k−j); s/t) / ((β(k−j)+1)Γ(1+βj)Γ(1+β(k−j))).
pub fn tf_inner_series(beta: f64, a: f64, t: f64, s: f64, k_max: usize) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!("beta must lie in (0,1], got {beta}")));
    }
    if !(a >= 0.0 && s > 0.0 && s <= t) {
        return Err(Error::Precondition(format!("need a ≥ 0 and 0 < s ≤ t, got a={a}, s={s}, t={t}")));
    }
    if k_max > 200 {
        return Err(Error::Precondition(format!("k_max must be at most 200, got {k_max}")));
    }
    let z = s / t;
    let rg: Vec<f64> = (0..=k_max).map(|j| 1.0 / gamma_fn(1.0 + beta * j as f64).unwrap_or(f64::INFINITY)).collect();
    let mut sum = 0.0;
    let mut biggest: f64 = 0.0;
    let mut small = 0;
    for k in 0..=k_max {
        let mut inner = 0.0;
        for j in 0..=k {
            let m = (k - j) as f64;
            let jb = beta * j as f64;
            let f = hyp2f1_with(1.0, -jb, 2.0 + beta * m, z, 1e-16, 100_000)?;
            inner += t.powf(jb) * s.powf(beta * m + 1.0) * f / (beta * m + 1.0) * rg[j] * rg[k - j];
        }
        let term = (-a).powi(k as i32) * inner;
        if !term.is_finite() {
            return Err(Error::Range(format!("series term {k} overflowed")));
        }
        sum += term;
        biggest = biggest.max(term.abs());
        if term.abs() <= 1e-17 * sum.abs() {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
        if k == k_max && small == 0 {
            return Err(Error::Range(format!("series not converged after {k_max} terms")));
        }
    }
    if biggest * 1e-16 > 1e-8 * sum.abs() {
        return Err(Error::Range(format!(
            "series lost precision: largest term {biggest:e} against sum {sum:e}"
        )));
    }
    Ok(sum)
}

/// Spatial covariance at distance h.
pub fn spatial_cov(sd: &SpectralDensity, h: f64) -> Result<f64> {
    if !(h >= 0.0) {
        return Err(Error::Precondition(format!("h must be nonnegative, got {h}")));
    }
    spatial_covariance(sd, h)
}

/// Symmetric covariance matrix on a point set with a diagonal jitter.
#[derive(Debug, Clone)]
pub struct CovMatrix {
    pub points: Vec<Vec<f64>>,
    pub entries: DMatrix<f64>,
    pub jitter: f64,
}

const JITTER_LADDER: [f64; 8] = [0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8];

impl CovMatrix {
    /// Build from a covariance function, choosing the smallest jitter from
    /// {0, 1e-14, …, 1e-8}·max diagonal that leaves no negative eigenvalue.
    pub fn build<F>(points: Vec<Vec<f64>>, f: F) -> Result<Self>
    where
        F: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
    {
        let n = points.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (0..=i).map(|j| f(&points[i], &points[j])).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                m[(i, j)] = rows[i][j];
                m[(j, i)] = rows[i][j];
            }
        }
        Self::from_matrix(points, m)
    }

    pub fn from_matrix(points: Vec<Vec<f64>>, mut m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n || points.len() != n {
            return Err(Error::Precondition("matrix must be square and match the points".into()));
        }
        for i in 0..n {
            for j in 0..i {
                let a = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = a;
                m[(j, i)] = a;
            }
        }
        let maxd = (0..n).map(|i| m[(i, i)]).fold(0.0, f64::max);
        if n == 0 {
            return Ok(CovMatrix {
                points,
                entries: m,
                jitter: 0.0,
            });
        }
        let lmin = SymmetricEigen::new(m.clone()).eigenvalues.min();
        for &j in JITTER_LADDER.iter() {
            if lmin + j * maxd >= 0.0 {
                let jit = j * maxd;
                for i in 0..n {
                    m[(i, i)] += jit;
                }
                return Ok(CovMatrix {
                    points,
                    entries: m,
                    jitter: jit,
                });
            }
        }
        Err(Error::Numeric(format!(
            "matrix is not positive semidefinite: smallest eigenvalue {lmin:e} against max diagonal {maxd:e}"
        )))
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.entries.clone()).eigenvalues.min()
    }
}

/// Var(target | cond) = σ² − kᵀC⁻¹k, computed through a Cholesky factor of C.
pub fn conditional_variance(m: &CovMatrix, target: usize, cond: &[usize]) -> Result<f64> {
    let n = m.len();
    if target >= n || cond.iter().any(|&c| c >= n) {
        return Err(Error::Precondition("index out of range".into()));
    }
    if cond.contains(&target) {
        return Err(Error::Precondition("target must not be among the conditioning indices".into()));
    }
    let var = m.entries[(target, target)];
    if cond.is_empty() {
        return Ok(var);
    }
    let c = DMatrix::from_fn(cond.len(), cond.len(), |i, j| m.entries[(cond[i], cond[j])]);
    let k = DVector::from_fn(cond.len(), |i, _| m.entries[(cond[i], target)]);
    let ch = c
        .cholesky()
        .ok_or_else(|| Error::Numeric("conditioning block is singular beyond jitter".into()))?;
    let l = ch.l();
    let w = l
        .solve_lower_triangular(&k)
        .ok_or_else(|| Error::Numeric("conditioning block is singular beyond jitter".into()))?;
    Ok((var - w.norm_squared()).max(0.0))
}

/// Settings for the finite-instance strong local nondeterminism check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlndConfig {
    pub n_max: usize,
    pub trials: usize,
    pub dim: usize,
    /// side of the cube [0, side]^dim the points are drawn from
    pub side: f64,
    pub exponent: f64,
    pub phi_log: bool,
    pub min_separation: f64,
    pub seed: u64,
}

impl Default for SlndConfig {
    fn default() -> Self {
        SlndConfig {
            n_max: 8,
            trials: 1000,
            dim: 3,
            side: 0.25,
            exponent: 1.0,
            phi_log: false,
            min_separation: 1e-4,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlndReport {
    pub c_min: f64,
    pub median_ratio: f64,
    /// c_min above 1% of the median ratio
    pub pass: bool,
    pub worst_n: usize,
}

/// φ(r) = r^e, times |log r| when requested.
pub fn slnd_phi(r: f64, exponent: f64, phi_log: bool) -> f64 {
    let p = r.powf(exponent);
    if phi_log {
        p * r.ln().abs()
    } else {
        p
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Minimum over random configurations of Var(U(x) | U(y₁..yₙ)) / min_j φ(|x − y_j|),
/// where the minimum also runs over the anchor y₀ = 0.
pub fn slnd_check<F>(cov: F, cfg: &SlndConfig) -> Result<SlndReport>
where
    F: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    if cfg.n_max > 8 {
        return Err(Error::Precondition(format!("n must be at most 8, got {}", cfg.n_max)));
    }
    if cfg.trials == 0 || cfg.dim == 0 {
        return Err(Error::Precondition("need at least one trial and one dimension".into()));
    }
    let results: Vec<Result<(f64, usize)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(cfg.seed, trial as u64, Role::Slnd);
            let n = ((uniform(&mut rng) * (cfg.n_max + 1) as f64) as usize).min(cfg.n_max);
            let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
            let mut guard = 0;
            while pts.len() < n + 1 {
                let p: Vec<f64> = (0..cfg.dim).map(|_| uniform(&mut rng) * cfg.side).collect();
                let ok = dist(&p, &vec![0.0; cfg.dim]) >= cfg.min_separation
                    && pts.iter().all(|q| dist(&p, q) >= cfg.min_separation);
                if ok {
                    pts.push(p);
                }
                guard += 1;
                if guard > 10_000 {
                    return Err(Error::Numeric("could not place separated points".into()));
                }
            }
            let origin = vec![0.0; cfg.dim];
            let mut dmin = dist(&pts[0], &origin);
            for q in &pts[1..] {
                dmin = dmin.min(dist(&pts[0], q));
            }
            let m = CovMatrix::build(pts, &cov)?;
            let cond: Vec<usize> = (1..=n).collect();
            let v = conditional_variance(&m, 0, &cond)?;
            Ok((v / slnd_phi(dmin, cfg.exponent, cfg.phi_log), n))
        })
        .collect();
    let mut ratios = Vec::with_capacity(cfg.trials);
    let mut c_min = f64::INFINITY;
    let mut worst_n = 0;
    for r in results {
        let (v, n) = r?;
        if v < c_min {
            c_min = v;
            worst_n = n;
        }
        ratios.push(v);
    }
    ratios.sort_by(|a, b| a.total_cmp(b));
    let median = ratios[ratios.len() / 2];
    Ok(SlndReport {
        c_min,
        median_ratio: median,
        pass: c_min > 0.01 * median,
        worst_n,
    })
}

/// Isotropic covariance tabulated through the variogram on a log grid:
/// C(h) = C(0) − γ(h)/2, with log-log interpolation of γ.
#[derive(Debug, Clone)]
pub struct TabulatedIsotropicCov {
    c0: f64,
    log_h: Vec<f64>,
    log_g: Vec<f64>,
}

impl TabulatedIsotropicCov {
    pub fn new<G: Fn(f64) -> Result<f64> + Sync>(c0: f64, variogram: G, h_min: f64, h_max: f64, n: usize) -> Result<Self> {
        if !(h_min > 0.0 && h_max > h_min && n >= 4) {
            return Err(Error::Precondition("need 0 < h_min < h_max and n ≥ 4".into()));
        }
        let log_h: Vec<f64> = (0..n)
            .map(|i| h_min.ln() + (h_max / h_min).ln() * i as f64 / (n - 1) as f64)
            .collect();
        let g: Vec<f64> = log_h.par_iter().map(|&l| variogram(l.exp())).collect::<Result<Vec<_>>>()?;
        if g.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Numeric("variogram must be positive on the table".into()));
        }
        Ok(TabulatedIsotropicCov {
            c0,
            log_h,
            log_g: g.iter().map(|v| v.ln()).collect(),
        })
    }

    /// γ(h) by cubic interpolation in (ln h, ln γ); power-law extrapolation at the ends.
    pub fn variogram(&self, h: f64) -> f64 {
        if h == 0.0 {
            return 0.0;
        }
        let x = h.ln();
        let n = self.log_h.len();
        let step = self.log_h[1] - self.log_h[0];
        let pos = (x - self.log_h[0]) / step;
        if pos <= 0.0 {
            let slope = (self.log_g[1] - self.log_g[0]) / step;
            return (self.log_g[0] + slope * (x - self.log_h[0])).exp();
        }
        if pos >= (n - 1) as f64 {
            let slope = (self.log_g[n - 1] - self.log_g[n - 2]) / step;
            return (self.log_g[n - 1] + slope * (x - self.log_h[n - 1])).exp();
        }
        let i = (pos.floor() as usize).clamp(1, n - 3);
        let u = pos - i as f64;
        let (p0, p1, p2, p3) = (self.log_g[i - 1], self.log_g[i], self.log_g[i + 1], self.log_g[i + 2]);
        // Catmull-Rom on a uniform grid
        let v = p1 + 0.5 * u * (p2 - p0 + u * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + u * (3.0 * (p1 - p2) + p3 - p0)));
        v.exp()
    }

    pub fn cov(&self, h: f64) -> f64 {
        self.c0 - 0.5 * self.variogram(h)
    }
}

/// Result of a bifractional Brownian motion fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifbmFit {
    pub params: BifBMParams,
    /// ‖C − R‖_F / ‖C‖_F at the optimum
    pub residual: f64,
    pub start_index: usize,
}

struct FitData {
    t: Vec<f64>,
    s: Vec<f64>,
    c: Vec<f64>,
    norm: f64,
}

fn bif_terms(h: f64, k: f64, t: f64, s: f64) -> (f64, f64, f64) {
    // value without scale, ∂/∂H, ∂/∂K
    let a = t.powf(2.0 * h) + s.powf(2.0 * h);
    let ak = a.powf(k);
    let g = (t - s).abs();
    let (dk, lg) = if g > 0.0 { (g.powf(2.0 * h * k), g.ln()) } else { (0.0, 0.0) };
    let c = (-k * LN_2).exp();
    let val = c * (ak - dk);
    let da_dh = {
        let lt = if t > 0.0 { 2.0 * t.powf(2.0 * h) * t.ln() } else { 0.0 };
        let ls = if s > 0.0 { 2.0 * s.powf(2.0 * h) * s.ln() } else { 0.0 };
        lt + ls
    };
    let d_h = c * (k * a.powf(k - 1.0) * da_dh - dk * 2.0 * k * lg);
    let d_k = -LN_2 * val + c * (ak * a.ln() - dk * 2.0 * h * lg);
    (val, d_h, d_k)
}

fn fit_residual(data: &FitData, h: f64, k: f64, s2: f64) -> f64 {
    let mut ss = 0.0;
    for i in 0..data.c.len() {
        let (v, _, _) = bif_terms(h, k, data.t[i], data.s[i]);
        ss += (data.c[i] - s2 * v).powi(2);
    }
    ss.sqrt() / data.norm
}

fn best_scale(data: &FitData, h: f64, k: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..data.c.len() {
        let (v, _, _) = bif_terms(h, k, data.t[i], data.s[i]);
        num += v * data.c[i];
        den += v * v;
    }
    (num / den).max(1e-300)
}

fn clamp_hk(h: f64, k: f64) -> (f64, f64) {
    (h.clamp(1e-4, 1.0 - 1e-4), k.clamp(1e-4, 1.0))
}

/// Levenberg–Marquardt on (H, K, scale²) from one start.
fn lm_fit(data: &FitData, h0: f64, k0: f64) -> (f64, f64, f64, f64) {
    let (mut h, mut k) = (h0, k0);
    let mut s2 = best_scale(data, h, k);
    let mut cur = fit_residual(data, h, k, s2);
    let mut mu = 1e-3;
    let n = data.c.len();
    for _ in 0..500 {
        let mut jtj = DMatrix::<f64>::zeros(3, 3);
        let mut jtr = DVector::<f64>::zeros(3);
        for i in 0..n {
            let (v, dh, dk) = bif_terms(h, k, data.t[i], data.s[i]);
            let r = (data.c[i] - s2 * v) / data.norm;
            let j = [s2 * dh / data.norm, s2 * dk / data.norm, v / data.norm];
            for a in 0..3 {
                jtr[a] += j[a] * r;
                for b in 0..3 {
                    jtj[(a, b)] += j[a] * j[b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut m = jtj.clone();
            for a in 0..3 {
                m[(a, a)] += mu * jtj[(a, a)].max(1e-30);
            }
            let step = match m.lu().solve(&jtr) {
                Some(x) => x,
                None => break,
            };
            let (nh, nk) = clamp_hk(h + step[0], k + step[1]);
            let ns2 = (s2 + step[2]).max(1e-300);
            let nr = fit_residual(data, nh, nk, ns2);
            if nr.is_finite() && nr < cur {
                let rel_change = (cur - nr) / cur.max(1e-300);
                h = nh;
                k = nk;
                s2 = ns2;
                cur = nr;
                mu = (mu * 0.3).max(1e-12);
                improved = true;
                if rel_change < 1e-12 && step.norm() < 1e-14 {
                    return (h, k, s2, cur);
                }
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (h, k, s2, cur)
}

/// Least-squares bifractional fit of a covariance function on grid × grid,
/// multi-start over a 5×5 (H, K) grid with LM refinement.
pub fn bifbm_fit<F>(cov: F, grid: &[f64]) -> Result<BifbmFit>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    if grid.len() < 20 {
        return Err(Error::Precondition(format!("need at least 20 grid points, got {}", grid.len())));
    }
    if grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::Precondition("grid points must lie in (0, T]".into()));
    }
    let pairs: Vec<(f64, f64)> = (0..grid.len())
        .flat_map(|i| (0..=i).map(move |j| (i, j)))
        .map(|(i, j)| (grid[i], grid[j]))
        .collect();
    let vals: Vec<f64> = pairs.par_iter().map(|&(t, s)| cov(t, s)).collect::<Result<Vec<_>>>()?;
    // off-diagonal pairs count twice in the Frobenius norm
    let mut t = Vec::new();
    let mut s = Vec::new();
    let mut c = Vec::new();
    for (&(a, b), &v) in pairs.iter().zip(&vals) {
        let reps = if a == b { 1 } else { 2 };
        for _ in 0..reps {
            t.push(a);
            s.push(b);
            c.push(v);
        }
    }
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::Numeric("covariance vanishes on the grid".into()));
    }
    let data = FitData { t, s, c, norm };
    let starts: Vec<(f64, f64)> = [0.1, 0.3, 0.5, 0.7, 0.9]
        .iter()
        .flat_map(|&h| [0.2, 0.4, 0.6, 0.8, 1.0].iter().map(move |&k| (h, k)))
        .collect();
    let fits: Vec<(f64, f64, f64, f64)> = starts.par_iter().map(|&(h, k)| lm_fit(&data, h, k)).collect();
    let mut best: Option<(usize, (f64, f64, f64, f64))> = None;
    for (i, f) in fits.iter().enumerate() {
        if !f.3.is_finite() {
            continue;
        }
        if best.map_or(true, |(_, b)| f.3 < b.3) {
            best = Some((i, *f));
        }
    }
    let (idx, (h, k, s2, r)) = best.ok_or_else(|| Error::Numeric("all 25 fit starts failed".into()))?;
    Ok(BifbmFit {
        params: BifBMParams::new(h, k, s2.sqrt())?,
        residual: r,
        start_index: idx,
    })
}
