//! Radial reductions of d-dimensional Fourier integrals of isotropic functions.

use crate::error::{Error, Result};
use crate::quad::{integrate_breaks, integrate_breaks_to_inf, integrate_oscillatory_tail, QuadOpts, QuadResult};
use crate::specfun::bessel_j0;
use std::f64::consts::PI;

/// Surface measure of the unit sphere in R^d (ω₁ = 2 counts both half-lines).
pub fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => 2.0 * PI.powf(d as f64 / 2.0) / crate::specfun::gamma_fn(d as f64 / 2.0).unwrap_or(f64::NAN),
    }
}

/// Angular average of e^{i⟨ξ,x⟩} over |ξ|=ρ, |x|=r, as a function of u = rρ.
pub fn angular_kernel(d: usize, u: f64) -> f64 {
    match d {
        1 => u.cos(),
        2 => bessel_j0(u),
        _ => {
            if u.abs() < 1e-4 {
                1.0 - u * u / 6.0
            } else {
                u.sin() / u
            }
        }
    }
}

/// 1 − angular kernel, accurate for small u.
pub fn one_minus_angular(d: usize, u: f64) -> f64 {
    if u.abs() < 1e-3 {
        // leading Taylor terms: u²/(2d) − u⁴/(8d(d+2))
        let d = d as f64;
        return u * u / (2.0 * d) - u.powi(4) / (8.0 * d * (d + 2.0));
    }
    match d {
        1 => 2.0 * (0.5 * u).sin().powi(2),
        _ => 1.0 - angular_kernel(d, u),
    }
}

/// Where the angular kernel of dimension d has zeros, approximately, at index k ≥ 1.
fn zero_near(d: usize, k: f64) -> f64 {
    match d {
        1 => (k - 0.5) * PI,
        2 => (k - 0.25) * PI,
        _ => k * PI,
    }
}

/// Hints describing the radial profile φ(ρ).
#[derive(Debug, Clone)]
pub struct RadialProfile {
    /// break points where φ changes character
    pub knees: Vec<f64>,
    /// beyond this radius φ is negligible (rapid decay), or None for slow decay
    pub cutoff: Option<f64>,
    /// beyond this radius φ is smooth and monotone, safe for the oscillatory tail
    pub tail_start: f64,
}

/// ∫_0^∞ φ(ρ) ρ^{d−1} j_d(rρ) dρ (no prefactor).
pub fn radial_integral<F: Fn(f64) -> f64>(d: usize, r: f64, phi: F, prof: &RadialProfile, opts: QuadOpts) -> Result<QuadResult> {
    let dm1 = (d - 1) as i32;
    let mut knees: Vec<f64> = prof.knees.iter().copied().filter(|k| *k > 0.0 && k.is_finite()).collect();
    knees.sort_by(|a, b| a.total_cmp(b));
    if r == 0.0 {
        let g = |rho: f64| phi(rho) * rho.powi(dm1);
        return match prof.cutoff {
            Some(c) => {
                let mut pts = vec![0.0];
                pts.extend(knees.iter().copied().filter(|k| *k < c));
                pts.push(c);
                integrate_breaks(g, &pts, opts)
            }
            None => integrate_breaks_to_inf(g, 0.0, &knees, opts),
        };
    }
    // cancellation limits the attainable absolute accuracy to the scale of ∫|φ|ρ^{d−1}
    let scale = {
        let g0 = |rho: f64| phi(rho).abs() * rho.powi(dm1);
        let loose = QuadOpts::new(0.0, 1e-4);
        let c = prof.cutoff.unwrap_or(prof.tail_start);
        let mut pts = vec![0.0];
        pts.extend(knees.iter().copied().filter(|k| *k < c));
        pts.push(c);
        integrate_breaks(g0, &pts, loose).map(|v| v.value).unwrap_or(0.0)
    };
    let opts = QuadOpts {
        abs_tol: opts.abs_tol.max(1e-14 * scale),
        ..opts
    };
    let g = |rho: f64| phi(rho) * rho.powi(dm1) * angular_kernel(d, r * rho);
    let half = PI / r;
    match prof.cutoff {
        Some(c) => {
            // finite range: break at the knees and at every half period
            let mut pts = vec![0.0];
            let n_half = (c / half).ceil() as usize;
            if n_half > 200_000 {
                return Err(Error::Numeric(format!(
                    "radial integral needs {n_half} oscillation panels (r = {r}, cutoff = {c})"
                )));
            }
            for k in 1..n_half {
                pts.push(k as f64 * half);
            }
            pts.extend(knees.iter().copied().filter(|k| *k < c));
            pts.push(c);
            pts.sort_by(|a, b| a.total_cmp(b));
            pts.dedup();
            integrate_breaks(g, &pts, opts)
        }
        None => {
            let a0 = prof.tail_start.max(4.0 * half);
            let k = (a0 * r / PI).ceil() + 1.0;
            let a = zero_near(d, k) / r;
            let mut pts = vec![0.0];
            pts.extend(knees.iter().copied().filter(|k| *k < a));
            let n_half = (a / half).ceil() as usize;
            for k in 1..n_half.min(20_000) {
                pts.push(k as f64 * half);
            }
            pts.push(a);
            pts.sort_by(|a, b| a.total_cmp(b));
            pts.dedup();
            let head = integrate_breaks(&g, &pts, opts)?;
            let tail = integrate_oscillatory_tail(&g, a, half, opts)?;
            Ok(QuadResult {
                value: head.value + tail.value,
                abs_err: head.abs_err + tail.abs_err,
                evals: head.evals + tail.evals,
            })
        }
    }
}

/// Inverse symmetric Fourier transform of an isotropic multiplier:
/// (2π)^{−d} ∫_{R^d} φ(|ξ|) e^{i⟨ξ,x⟩} dξ at |x| = r.
pub fn inverse_ft<F: Fn(f64) -> f64>(d: usize, r: f64, phi: F, prof: &RadialProfile, opts: QuadOpts) -> Result<f64> {
    let v = radial_integral(d, r, phi, prof, opts)?;
    Ok((2.0 * PI).powi(-(d as i32)) * sphere_area(d) * v.value)
}

/// ∫_0^∞ φ(ρ) ρ^{d−1} (1 − j_d(hρ)) dρ for a profile with an integrable tail.
pub fn radial_one_minus<F: Fn(f64) -> f64>(d: usize, h: f64, phi: F, prof: &RadialProfile, opts: QuadOpts) -> Result<QuadResult> {
    if h == 0.0 {
        return Ok(QuadResult {
            value: 0.0,
            abs_err: 0.0,
            evals: 0,
        });
    }
    let dm1 = (d - 1) as i32;
    let mut knees: Vec<f64> = prof.knees.iter().copied().filter(|k| *k > 0.0 && k.is_finite()).collect();
    knees.sort_by(|a, b| a.total_cmp(b));
    let half = PI / h;
    let a0 = prof.tail_start.max(4.0 * half);
    let k = (a0 * h / PI).ceil() + 1.0;
    let a = zero_near(d, k) / h;
    let n_half = (a / half).ceil() as usize;
    if n_half > 200_000 {
        return Err(Error::Numeric(format!("variogram integral needs {n_half} oscillation panels (h = {h})")));
    }
    let mut pts = vec![0.0];
    pts.extend(knees.iter().copied().filter(|k| *k < a));
    for j in 1..n_half {
        pts.push(j as f64 * half);
    }
    pts.push(a);
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup();
    let g1 = |rho: f64| phi(rho) * rho.powi(dm1) * one_minus_angular(d, h * rho);
    let head = integrate_breaks(g1, &pts, opts)?;
    let g0 = |rho: f64| phi(rho) * rho.powi(dm1);
    let tail_knees: Vec<f64> = knees.iter().copied().filter(|k| *k > a).collect();
    let plain = integrate_breaks_to_inf(g0, a, &tail_knees, opts)?;
    let g2 = |rho: f64| phi(rho) * rho.powi(dm1) * angular_kernel(d, h * rho);
    let osc = integrate_oscillatory_tail(g2, a, half, opts)?;
    Ok(QuadResult {
        value: head.value + plain.value - osc.value,
        abs_err: head.abs_err + plain.abs_err + osc.abs_err,
        evals: head.evals + plain.evals + osc.evals,
    })
}
