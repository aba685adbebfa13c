//! Temporal and spatial spectral densities, variograms and asymptotic fits.

use crate::error::{Error, Result};
use crate::model::{Family, ModelParams};
use crate::quad::{integrate_breaks, integrate_breaks_to_inf, QuadOpts};
use crate::radial::{radial_integral, radial_one_minus, sphere_area, RadialProfile};
use crate::specfun::{gamma_fn, MittagLefflerTable};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Temporal,
    Spatial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Base,
    Gradient,
}

/// A spectral density of the auxiliary temporal process or of the spatial
/// field at a fixed time.
#[derive(Debug, Clone)]
pub struct SpectralDensity {
    pub axis: Axis,
    pub field: FieldKind,
    pub params: ModelParams,
    pub t_fixed: f64,
    table: Option<Arc<MittagLefflerTable>>,
}

fn opts() -> QuadOpts {
    QuadOpts {
        abs_tol: 1e-300,
        rel_tol: 1e-11,
        max_intervals: 20_000,
    }
}

impl SpectralDensity {
    pub fn new(axis: Axis, field: FieldKind, params: ModelParams, t_fixed: f64) -> Result<Self> {
        params.validate()?;
        if field == FieldKind::Gradient && params.dim != 1 {
            return Err(Error::Domain("gradient densities are defined for dim = 1 only".into()));
        }
        if axis == Axis::Spatial && !(t_fixed > 0.0 && t_fixed.is_finite()) {
            return Err(Error::Precondition(format!("spatial densities need t > 0, got {t_fixed}")));
        }
        let table = match (axis, params.family) {
            (Axis::Spatial, Family::Tf) => Some(Arc::new(MittagLefflerTable::new(params.beta)?)),
            _ => None,
        };
        Ok(SpectralDensity {
            axis,
            field,
            params,
            t_fixed,
            table,
        })
    }

    pub fn temporal(params: ModelParams, field: FieldKind) -> Result<Self> {
        Self::new(Axis::Temporal, field, params, f64::NAN)
    }

    pub fn spatial(params: ModelParams, field: FieldKind, t: f64) -> Result<Self> {
        Self::new(Axis::Spatial, field, params, t)
    }

    /// True for time-fractional temporal densities at a β that is not 1/2^k,
    /// where the closed temporal form is used beyond its proven range.
    pub fn extended_regime(&self) -> bool {
        self.axis == Axis::Temporal && !self.params.dyadic_beta()
    }

    fn weight(&self) -> i32 {
        match self.field {
            FieldKind::Base => 0,
            FieldKind::Gradient => 2,
        }
    }

    /// Hölder exponent 2H of the variogram near zero lag.
    pub fn variogram_exponent(&self) -> f64 {
        let p = &self.params;
        match (self.axis, self.field) {
            (Axis::Temporal, FieldKind::Base) => 2.0 * p.temporal_h(),
            (Axis::Temporal, FieldKind::Gradient) => 2.0 * p.gradient_temporal_h(),
            // 2∫(1−cos)ρ^{d−1+w}ρ^{−4}: exponent 4 − d − w, capped at 2
            (Axis::Spatial, f) => {
                let w = if f == FieldKind::Gradient { 2.0 } else { 0.0 };
                (4.0 - p.dim as f64 - w).min(2.0)
            }
        }
    }
}

fn norm_d(d: usize) -> f64 {
    (2.0 * PI).powi(-(d as i32))
}

fn lks_lambda(p: &ModelParams, rho: f64) -> f64 {
    let w = rho * rho - 2.0 * p.theta;
    p.epsilon * w * w / 8.0
}

/// Radii where λ(ρ) = ε(ρ² − 2ϑ)²/8 crosses the given levels, plus the ring.
fn lks_knees(p: &ModelParams, levels: &[f64]) -> Vec<f64> {
    let mut k = Vec::new();
    let th2 = 2.0 * p.theta;
    if th2 > 0.0 {
        k.push(th2.sqrt());
    }
    for &l in levels {
        let s = (8.0 * l / p.epsilon).sqrt();
        for r2 in [th2 - s, th2 + s, th2 - 0.1 * s, th2 + 0.1 * s, th2 + 10.0 * s] {
            if r2 > 0.0 {
                k.push(r2.sqrt());
            }
        }
    }
    k.sort_by(|a, b| a.total_cmp(b));
    k.dedup();
    k
}

/// ∫_{R^d} |ξ|^w dξ / (1 + |ξ|² cos(πβ/2) + |ξ|⁴/4).
pub fn tf_temporal_integral(beta: f64, d: usize, w: i32) -> Result<f64> {
    let c = (PI * beta / 2.0).cos();
    let f = |r: f64| r.powi(d as i32 - 1 + w) / (1.0 + r * r * c + r.powi(4) / 4.0);
    let v = integrate_breaks_to_inf(f, 0.0, &[0.5, 1.0, 2.0, 4.0], opts())?;
    Ok(sphere_area(d) * v.value)
}

/// Spectral density at a radial frequency. Temporal densities are in the
/// 2∫(1−cos)Δ normalization; the matching variogram is (1/π)∫(1−cos hτ)Δ(τ)dτ.
pub fn eval_sd(sd: &SpectralDensity, freq: f64) -> Result<f64> {
    let ok = match sd.axis {
        Axis::Temporal => freq.is_finite(),
        Axis::Spatial => freq >= 0.0 && freq.is_finite(),
    };
    if !ok {
        return Err(Error::Precondition(format!("invalid frequency {freq}")));
    }
    match sd.axis {
        Axis::Temporal => temporal_sd(sd, freq),
        Axis::Spatial => {
            let base = spatial_sd_base(sd, freq)?;
            Ok(match sd.field {
                FieldKind::Base => base,
                FieldKind::Gradient => freq * freq * base,
            })
        }
    }
}

fn temporal_sd(sd: &SpectralDensity, tau: f64) -> Result<f64> {
    let tau = tau.abs();
    if tau == 0.0 {
        return Err(Error::Precondition("temporal densities need τ ≠ 0".into()));
    }
    let p = &sd.params;
    let d = p.dim;
    let w = sd.weight();
    match p.family {
        Family::Lks => {
            let f = |r: f64| {
                let l = lks_lambda(p, r);
                r.powi(d as i32 - 1 + w) / (tau * tau + l * l)
            };
            let knees = lks_knees(p, &[tau]);
            let v = integrate_breaks_to_inf(f, 0.0, &knees, opts())?;
            Ok(norm_d(d) * sphere_area(d) * v.value)
        }
        Family::Tf => {
            let alpha = tf_temporal_alpha(sd);
            Ok(norm_d(d) * tau.powf(-alpha) * tf_temporal_integral(p.beta, d, w)?)
        }
    }
}

fn tf_temporal_alpha(sd: &SpectralDensity) -> f64 {
    let b = sd.params.beta;
    match sd.field {
        FieldKind::Base => 2.0 - b * sd.params.dim as f64 / 2.0,
        FieldKind::Gradient => 2.0 - 1.5 * b,
    }
}

/// ∫_0^1 E_β(−y v^β)² dv, integrated in ln v.
fn tf_time_average(table: &MittagLefflerTable, y: f64) -> Result<f64> {
    if y == 0.0 {
        return Ok(1.0);
    }
    let b = table.beta();
    let s_star = -y.ln() / b;
    let lo = s_star.min(0.0) - 60.0;
    let f = |s: f64| {
        let e = table.eval_neg(y * (b * s).exp());
        e * e * s.exp()
    };
    let mut pts = vec![lo];
    for k in [-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0, 20.0] {
        let x = s_star + k / b;
        if x > lo && x < 0.0 {
            pts.push(x);
        }
    }
    pts.push(0.0);
    pts.sort_by(|a, c| a.total_cmp(c));
    pts.dedup();
    Ok(integrate_breaks(f, &pts, opts())?.value)
}

fn spatial_sd_base(sd: &SpectralDensity, rho: f64) -> Result<f64> {
    let p = &sd.params;
    let t = sd.t_fixed;
    let n = norm_d(p.dim);
    match p.family {
        Family::Lks => {
            let l2 = 2.0 * lks_lambda(p, rho);
            if l2 * t < 1e-12 {
                return Ok(n * t * (1.0 - l2 * t / 2.0));
            }
            Ok(n * (-(-l2 * t).exp_m1()) / l2)
        }
        Family::Tf => {
            let table = sd.table.as_ref().expect("spatial TF density carries a table");
            let y = rho * rho * t.powf(p.beta) / 2.0;
            Ok(n * t * tf_time_average(table, y)?)
        }
    }
}

/// Second moment of temporal increments at the given lag, computed without
/// the τ-integral: (2π)^{−d}∫|ξ|^w (1 − e^{−λh})/λ dξ for L-KS and the
/// closed power law for the time-fractional family.
pub fn temporal_variogram(sd: &SpectralDensity, lag: f64) -> Result<f64> {
    if sd.axis != Axis::Temporal {
        return Err(Error::Precondition("temporal_variogram needs a temporal density".into()));
    }
    let h = lag.abs();
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Precondition(format!("lag must be nonzero, got {lag}")));
    }
    let p = &sd.params;
    let d = p.dim;
    let w = sd.weight();
    match p.family {
        Family::Lks => {
            let f = |r: f64| {
                let l = lks_lambda(p, r);
                let x = l * h;
                let q = if x < 1e-8 { h * (1.0 - x / 2.0) } else { -(-x).exp_m1() / l };
                r.powi(d as i32 - 1 + w) * q
            };
            let knees = lks_knees(p, &[1.0 / h]);
            let v = integrate_breaks_to_inf(f, 0.0, &knees, opts())?;
            Ok(norm_d(d) * sphere_area(d) * v.value)
        }
        Family::Tf => {
            let a = tf_temporal_alpha(sd);
            let c = norm_d(d) * tf_temporal_integral(p.beta, d, w)?;
            Ok(c * h.powf(a - 1.0) / (gamma_fn(a)? * (PI * (a - 1.0) / 2.0).sin()))
        }
    }
}

/// The same variogram through the spectral representation (1/π)∫_R (1−cos hτ)Δ(τ)dτ.
pub fn temporal_variogram_spectral(sd: &SpectralDensity, lag: f64) -> Result<f64> {
    if sd.axis != Axis::Temporal {
        return Err(Error::Precondition("needs a temporal density".into()));
    }
    let h = lag.abs();
    if !(h > 0.0) {
        return Err(Error::Precondition(format!("lag must be nonzero, got {lag}")));
    }
    let mut knees = vec![0.1 / h, 1.0 / h, 10.0 / h];
    if sd.params.family == Family::Lks && sd.params.theta != 0.0 {
        knees.push(1e-4);
        knees.push(1e-2);
        knees.sort_by(|a, b| a.total_cmp(b));
    }
    let delta = |tau: f64| temporal_sd(sd, tau).unwrap_or(f64::NAN);
    let prof = RadialProfile {
        knees,
        cutoff: None,
        tail_start: 10.0 / h,
    };
    let o = QuadOpts {
        abs_tol: 1e-300,
        rel_tol: 1e-9,
        max_intervals: 20_000,
    };
    // (1 − cos hτ) over the half line, doubled by evenness
    let v = radial_one_minus(1, h, delta, &prof, o)?;
    Ok(2.0 * v.value / PI)
}

fn spatial_profile(sd: &SpectralDensity) -> RadialProfile {
    let p = &sd.params;
    let mut knees = match p.family {
        Family::Lks => lks_knees(p, &[1.0 / sd.t_fixed, 100.0 / sd.t_fixed]),
        Family::Tf => {
            let s = (2.0 / sd.t_fixed.powf(p.beta)).sqrt();
            vec![0.3 * s, s, 3.0 * s, 10.0 * s]
        }
    };
    knees.sort_by(|a, b| a.total_cmp(b));
    let tail = knees.last().copied().unwrap_or(1.0).max(1.0);
    RadialProfile {
        knees,
        cutoff: None,
        tail_start: tail,
    }
}

/// E[U(x) − U(y)]² at |x − y| = h: 2∫(1 − cos⟨h, ξ⟩) S(ξ) dξ.
pub fn spatial_variogram(sd: &SpectralDensity, h: f64) -> Result<f64> {
    if sd.axis != Axis::Spatial {
        return Err(Error::Precondition("spatial_variogram needs a spatial density".into()));
    }
    let h = h.abs();
    if h == 0.0 {
        return Ok(0.0);
    }
    let d = sd.params.dim;
    let prof = spatial_profile(sd);
    let s = |r: f64| eval_sd(sd, r).unwrap_or(f64::NAN);
    let v = radial_one_minus(d, h, s, &prof, opts())?;
    Ok(2.0 * sphere_area(d) * v.value)
}

/// Spatial covariance E[U(x)U(y)] at |x − y| = h: ∫cos⟨h, ξ⟩ S(ξ) dξ.
pub fn spatial_covariance(sd: &SpectralDensity, h: f64) -> Result<f64> {
    if sd.axis != Axis::Spatial {
        return Err(Error::Precondition("spatial_covariance needs a spatial density".into()));
    }
    let d = sd.params.dim;
    let prof = spatial_profile(sd);
    let s = |r: f64| eval_sd(sd, r).unwrap_or(f64::NAN);
    let v = radial_integral(d, h.abs(), s, &prof, opts())?;
    Ok(sphere_area(d) * v.value)
}

/// Leading constant of the L-KS temporal density at high frequency:
/// (2π)^{−d}∫|ξ|^w dξ/(1 + ε²|ξ|⁸/64).
pub fn lks_temporal_constant(p: &ModelParams, field: FieldKind) -> Result<f64> {
    let w = if field == FieldKind::Gradient { 2 } else { 0 };
    let d = p.dim;
    let e2 = p.epsilon * p.epsilon / 64.0;
    let f = |r: f64| r.powi(d as i32 - 1 + w) / (1.0 + e2 * r.powi(8));
    let k = (8.0 / p.epsilon).sqrt().sqrt();
    let v = integrate_breaks_to_inf(f, 0.0, &[0.5 * k, k, 2.0 * k], opts())?;
    Ok(norm_d(d) * sphere_area(d) * v.value)
}

/// Leading constant of the spatial time-fractional density for β < 1/2:
/// S_β(ξ) ~ C|ξ|^{−4}, C = 4t^{1−2β}/((2π)^d Γ(1−β)²(1−2β)).
pub fn tf_spatial_constant(beta: f64, d: usize, t: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::Domain(format!("needs β in (0, 1/2), got {beta}")));
    }
    let g = gamma_fn(1.0 - beta)?;
    Ok(4.0 * t.powf(1.0 - 2.0 * beta) * norm_d(d) / (g * g * (1.0 - 2.0 * beta)))
}

/// Leading constant of S_{1/2}(ξ) ~ C|ξ|^{−4} log|ξ|: 16/(π(2π)^d).
pub fn tf_half_log_constant(d: usize) -> f64 {
    16.0 / PI * norm_d(d)
}

/// L-KS spatial density leading constant: S(ξ) ~ 4/(ε(2π)^d)|ξ|^{−4}.
pub fn lks_spatial_constant(p: &ModelParams) -> f64 {
    4.0 / p.epsilon * norm_d(p.dim)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoteReport {
    pub fitted_exponent: f64,
    pub fitted_log_power: f64,
    pub fitted_constant: f64,
    pub fit_window: (f64, f64),
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogPowerTerm {
    /// include the log-log regressor only for β = 1/2
    Auto,
    Include,
    Exclude,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub window: (f64, f64),
    pub points: usize,
    pub log_power: LogPowerTerm,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            window: (1e2, 1e6),
            points: 40,
            log_power: LogPowerTerm::Auto,
        }
    }
}

/// Coefficients of a least-squares fit of ln y on [1, ln x] and optionally
/// ln ln x. Returns (exponent, log power, ln constant, rms residual).
pub fn power_law_fit(xs: &[f64], ys: &[f64], log_power: bool) -> Result<(f64, f64, f64, f64)> {
    let n = xs.len();
    if n != ys.len() || n < 3 {
        return Err(Error::Precondition("need at least 3 matching points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Numeric("power-law fit needs positive finite data".into()));
    }
    if log_power && xs.iter().any(|x| *x <= 1.0) {
        return Err(Error::Precondition("log-power fit needs abscissae above 1".into()));
    }
    let m = if log_power { 3 } else { 2 };
    let mut a = DMatrix::zeros(n, m);
    let mut b = DVector::zeros(n);
    for i in 0..n {
        let lx = xs[i].ln();
        a[(i, 0)] = 1.0;
        a[(i, 1)] = lx;
        if log_power {
            a[(i, 2)] = lx.ln();
        }
        b[i] = ys[i].ln();
    }
    // column scaling before judging conditioning
    let mut scaled = a.clone();
    let mut scales = vec![0.0; m];
    for j in 0..m {
        let s = scaled.column(j).norm();
        scales[j] = s;
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = scaled.clone().svd(true, true);
    let sv = &svd.singular_values;
    let cond = sv.max() / sv.min();
    if !(cond < 1e10) {
        return Err(Error::Numeric(format!("ill-conditioned fit: condition number {cond:.3e}")));
    }
    let coef = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Numeric(format!("least squares failed: {e}")))?;
    let coef: Vec<f64> = (0..m).map(|j| coef[j] / scales[j]).collect();
    let mut ss = 0.0;
    for i in 0..n {
        let mut pred = 0.0;
        for j in 0..m {
            pred += a[(i, j)] * coef[j];
        }
        ss += (b[i] - pred).powi(2);
    }
    let lp = if log_power { coef[2] } else { 0.0 };
    Ok((coef[1], lp, coef[0], (ss / n as f64).sqrt()))
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

pub fn fit_asymptote(sd: &SpectralDensity, window: (f64, f64)) -> Result<AsymptoteReport> {
    fit_asymptote_with(
        sd,
        FitOptions {
            window,
            ..FitOptions::default()
        },
    )
}

/// Least-squares fit of ln sd against ln freq (and ln ln freq) on a log grid.
pub fn fit_asymptote_with(sd: &SpectralDensity, o: FitOptions) -> Result<AsymptoteReport> {
    let (lo, hi) = o.window;
    if !(lo >= 10.0 && hi <= 1e8 && lo < hi) {
        return Err(Error::Precondition(format!("fit window must lie in [10, 1e8], got [{lo}, {hi}]")));
    }
    if o.points < 20 {
        return Err(Error::Precondition(format!("need at least 20 fit points, got {}", o.points)));
    }
    let include = match o.log_power {
        LogPowerTerm::Include => true,
        LogPowerTerm::Exclude => false,
        LogPowerTerm::Auto => sd.params.family == Family::Tf && sd.params.beta == 0.5,
    };
    let xs = log_spaced(lo, hi, o.points);
    let ys = xs.iter().map(|&x| eval_sd(sd, x)).collect::<Result<Vec<_>>>()?;
    let (e, p, c, r) = power_law_fit(&xs, &ys, include)?;
    Ok(AsymptoteReport {
        fitted_exponent: e,
        fitted_log_power: p,
        fitted_constant: c.exp(),
        fit_window: o.window,
        residual: r,
    })
}
