//! L-KS and time-fractional kernels, their spatial Fourier transforms, and
//! convolution of initial data.

use crate::error::{Error, Result};
use crate::model::{Family, ModelParams};
use crate::quad::{integrate_breaks_to_inf, QuadOpts};
use crate::radial::{inverse_ft, RadialProfile};
use crate::specfun::{erfcx, mittag_leffler, MittagLefflerTable};
use rustfft::{num_complex::Complex64, FftPlanner};
use std::f64::consts::PI;

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("t must be positive, got {t}")))
    }
}

fn check_family(p: &ModelParams, f: Family) -> Result<()> {
    p.validate()?;
    if p.family != f {
        return Err(Error::Domain(format!("expected {f:?} parameters, got {:?}", p.family)));
    }
    Ok(())
}

fn sym_norm(d: usize) -> f64 {
    (2.0 * PI).powf(-(d as f64) / 2.0)
}

/// exp(−(εt/8)(|ξ|² − 2ϑ)²), the L-KS Fourier multiplier.
pub fn lks_multiplier(p: &ModelParams, t: f64, xi: f64) -> f64 {
    let w = xi * xi - 2.0 * p.theta;
    (-(p.epsilon * t / 8.0) * w * w).exp()
}

/// Spatial Fourier transform of the L-KS kernel.
pub fn lks_kernel_ft(p: &ModelParams, t: f64, xi_norm: f64) -> Result<f64> {
    check_family(p, Family::Lks)?;
    check_t(t)?;
    Ok(sym_norm(p.dim) * lks_multiplier(p, t, xi_norm.abs()))
}

/// Spatial Fourier transform of the β-time-fractional kernel.
pub fn tf_kernel_ft(p: &ModelParams, t: f64, xi_norm: f64) -> Result<f64> {
    check_family(p, Family::Tf)?;
    check_t(t)?;
    let x = xi_norm * xi_norm * t.powf(p.beta) / 2.0;
    Ok(sym_norm(p.dim) * mittag_leffler(p.beta, -x)?)
}

/// Normalization of the Brownian-time Brownian motion transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BtbmConvention {
    /// e^{t|ξ|⁴/4} erfc(√t|ξ|²/2), consistent with E_{1/2}(−|ξ|²√t/2)
    #[default]
    Scaled,
    /// standard inner Brownian motion: e^{t|ξ|⁴/8} erfc(√(2t)|ξ|²/4)
    Standard,
}

/// Fourier transform of the BTBM density, evaluated through erfcx.
pub fn btbm_ft(t: f64, xi_norm: f64, d: usize) -> Result<f64> {
    btbm_ft_with(t, xi_norm, d, BtbmConvention::Scaled)
}

pub fn btbm_ft_with(t: f64, xi_norm: f64, d: usize, conv: BtbmConvention) -> Result<f64> {
    check_t(t)?;
    if !(1..=3).contains(&d) {
        return Err(Error::Domain(format!("dim must be 1, 2 or 3, got {d}")));
    }
    let x2 = xi_norm * xi_norm;
    let z = match conv {
        BtbmConvention::Scaled => t.sqrt() * x2 / 2.0,
        BtbmConvention::Standard => (2.0 * t).sqrt() * x2 / 4.0,
    };
    Ok(sym_norm(d) * erfcx(z))
}

fn quad_opts() -> QuadOpts {
    QuadOpts {
        abs_tol: 1e-15,
        rel_tol: 1e-11,
        max_intervals: 20_000,
    }
}

/// L-KS kernel K(t, r), by radial inverse Fourier transform.
pub fn lks_kernel(p: &ModelParams, t: f64, r: f64) -> Result<f64> {
    check_family(p, Family::Lks)?;
    check_t(t)?;
    let c = p.epsilon * t / 8.0;
    let th = p.theta;
    // multiplier below e^{-60} once (ρ² − 2ϑ)² > 60/c
    let w_max = (60.0 / c).sqrt();
    let cutoff = (2.0 * th.max(0.0) + w_max).sqrt();
    let mut knees = vec![c.powf(-0.25)];
    if th > 0.0 {
        knees.push((2.0 * th).sqrt());
    }
    let prof = RadialProfile {
        knees,
        cutoff: Some(cutoff),
        tail_start: cutoff,
    };
    inverse_ft(p.dim, r.abs(), |rho| lks_multiplier(p, t, rho), &prof, quad_opts())
}

/// β-time-fractional kernel K_β(t, r) by radial inverse Fourier transform of
/// E_β(−ρ²t^β/2). Infinite at r = 0 for d ≥ 2.
pub fn tf_kernel(p: &ModelParams, t: f64, r: f64) -> Result<f64> {
    check_family(p, Family::Tf)?;
    check_t(t)?;
    let table = MittagLefflerTable::new(p.beta)?;
    tf_kernel_with(&table, p, t, r)
}

pub fn tf_kernel_with(table: &MittagLefflerTable, p: &ModelParams, t: f64, r: f64) -> Result<f64> {
    check_family(p, Family::Tf)?;
    check_t(t)?;
    let r = r.abs();
    if r == 0.0 && p.dim >= 2 {
        return Ok(f64::INFINITY);
    }
    let a = t.powf(p.beta) / 2.0;
    // scale where the argument reaches the asymptotic regime
    let rho1 = (1.0 / a).sqrt();
    let prof = RadialProfile {
        knees: vec![rho1, 10.0 * rho1],
        cutoff: None,
        tail_start: 10.0 * rho1,
    };
    let opts = QuadOpts {
        abs_tol: 1e-13,
        rel_tol: 1e-10,
        max_intervals: 20_000,
    };
    inverse_ft(p.dim, r, |rho| table.eval_neg(a * rho * rho), &prof, opts)
}

/// β = 1/2 kernel through subordination of Brownian motion to a
/// reflected-Brownian clock: ∫_0^∞ (2πs)^{−d/2} e^{−r²/(2s)} e^{−s²/(4t)}/√(πt) ds.
pub fn btbm_kernel_subordination(t: f64, r: f64, d: usize) -> Result<f64> {
    check_t(t)?;
    if !(1..=3).contains(&d) {
        return Err(Error::Domain(format!("dim must be 1, 2 or 3, got {d}")));
    }
    if r == 0.0 && d >= 2 {
        return Ok(f64::INFINITY);
    }
    let dd = d as f64;
    let pre = (2.0 * PI).powf(-dd / 2.0) / (PI * t).sqrt();
    // s = u² removes the s^{−1/2} endpoint behavior
    let f = |u: f64| {
        if u == 0.0 {
            return if d == 1 && r == 0.0 { 2.0 * pre } else { 0.0 };
        }
        let s = u * u;
        2.0 * pre * u.powi(1 - d as i32) * (-r * r / (2.0 * s) - s * s / (4.0 * t)).exp()
    };
    let mut k = vec![t.powf(0.25), 3.0 * t.powf(0.25)];
    if r > 0.0 {
        k.push(r.sqrt());
    }
    k.sort_by(|a, b| a.total_cmp(b));
    let v = integrate_breaks_to_inf(f, 0.0, &k, QuadOpts::new(1e-15, 1e-12))?;
    Ok(v.value)
}

/// Kernel transform for either family.
pub fn kernel_ft(p: &ModelParams, t: f64, xi_norm: f64) -> Result<f64> {
    match p.family {
        Family::Lks => lks_kernel_ft(p, t, xi_norm),
        Family::Tf => tf_kernel_ft(p, t, xi_norm),
    }
}

/// Kernel for either family.
pub fn kernel(p: &ModelParams, t: f64, r: f64) -> Result<f64> {
    match p.family {
        Family::Lks => lks_kernel(p, t, r),
        Family::Tf => tf_kernel(p, t, r),
    }
}

/// Field sampled on a uniform d-dimensional grid, row-major, equal spacing on every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub shape: Vec<usize>,
    pub spacing: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Convolved {
    pub field: GridField,
    pub warnings: Vec<String>,
}

fn fft_axis(data: &mut [Complex64], shape: &[usize], axis: usize, inverse: bool, planner: &mut FftPlanner<f64>) {
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let total = data.len();
    let block = n * stride;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for outer in (0..total).step_by(block) {
        for inner in 0..stride {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = data[outer + inner + k * stride];
            }
            fft.process(&mut buf);
            for (k, b) in buf.iter().enumerate() {
                data[outer + inner + k * stride] = *b;
            }
        }
    }
}

/// Convolve initial data with the kernel at time t: ∫K(t, x−y)u₀(y)dy, computed
/// with the exact multiplier at the grid frequencies (periodic extension).
pub fn apply_initial_data(p: &ModelParams, t: f64, u0: &GridField) -> Result<Convolved> {
    p.validate()?;
    check_t(t)?;
    let d = u0.shape.len();
    if d != p.dim {
        return Err(Error::Precondition(format!(
            "grid has {d} axes but the model has dim {}",
            p.dim
        )));
    }
    let total: usize = u0.shape.iter().product();
    if total != u0.values.len() || total == 0 {
        return Err(Error::Precondition("grid shape does not match the number of values".into()));
    }
    if !(u0.spacing > 0.0) {
        return Err(Error::Precondition("grid spacing must be positive".into()));
    }
    let table = match p.family {
        Family::Tf => Some(MittagLefflerTable::new(p.beta)?),
        Family::Lks => None,
    };
    let multiplier = |xi: f64| match &table {
        Some(tb) => tb.eval_neg(xi * xi * t.powf(p.beta) / 2.0),
        None => lks_multiplier(p, t, xi),
    };
    let mut data: Vec<Complex64> = u0.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    for axis in 0..d {
        fft_axis(&mut data, &u0.shape, axis, false, &mut planner);
    }
    let freq = |k: usize, n: usize| {
        let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        2.0 * PI * kk / (n as f64 * u0.spacing)
    };
    let mut idx = vec![0usize; d];
    for c in data.iter_mut() {
        let mut xi2 = 0.0;
        for a in 0..d {
            let f = freq(idx[a], u0.shape[a]);
            xi2 += f * f;
        }
        *c *= multiplier(xi2.sqrt());
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < u0.shape[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    for axis in 0..d {
        fft_axis(&mut data, &u0.shape, axis, true, &mut planner);
    }
    let norm = 1.0 / total as f64;
    let values = data.iter().map(|c| c.re * norm).collect();
    let mut warnings = Vec::new();
    let nyq = PI / u0.spacing;
    let m_nyq = multiplier(nyq);
    if m_nyq > 1e-3 && m_nyq < 1.0 - 1e-9 {
        warnings.push(format!(
            "kernel is under-resolved: multiplier at the Nyquist frequency is {m_nyq:.3e}"
        ));
    }
    Ok(Convolved {
        field: GridField {
            shape: u0.shape.clone(),
            spacing: u0.spacing,
            values,
        },
        warnings,
    })
}
