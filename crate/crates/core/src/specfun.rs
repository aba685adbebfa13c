//! Scalar special functions: Γ, erfc/erfcx, Mittag-Leffler E_β, ₂F₁, Mills ratio, J₀.

use crate::error::{Error, Result};
use crate::quad::{integrate_breaks, QuadOpts};
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// sin(πx) with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    if r == r.floor() {
        return 0.0;
    }
    // r in [-1, 1]
    if r.abs() <= 0.25 {
        (PI * r).sin()
    } else if r > 0.75 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.75 {
        -(PI * (1.0 + r)).sin()
    } else if r > 0.0 {
        (PI * (0.5 - r)).cos()
    } else {
        -(PI * (0.5 + r)).cos()
    }
}

fn lanczos_sum(z: f64) -> f64 {
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    a
}

// Stirling correction ln Γ(x) − [(x−½)ln x − x + ½ln 2π], x ≥ 10
fn stirling_tail(x: f64) -> f64 {
    const B: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let r = 1.0 / x;
    let r2 = r * r;
    let mut acc = 0.0;
    for b in B.iter().rev() {
        acc = acc * r2 + b;
    }
    acc * r
}

/// Γ(x) for x ≥ 0.5 without reflection.
fn gamma_pos(x: f64) -> f64 {
    if x >= 10.0 {
        // x is exact, so the split power x^{(x-1/2)/2} keeps full accuracy
        let p = x.powf(0.5 * (x - 0.5));
        return (2.0 * PI).sqrt() * p * (p * (-x).exp()) * stirling_tail(x).exp();
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let half = 0.5 * (z + 0.5);
    // split the power to stay finite up to x ≈ 171.6
    let p = t.powf(half);
    (2.0 * PI).sqrt() * p * (p * (-t).exp()) * lanczos_sum(z)
}

/// Gamma function. Poles are a domain error.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma of non-finite {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Domain(format!("gamma pole at {x}")));
    }
    if x >= 0.5 {
        if x == x.floor() && x <= 23.0 {
            let mut f = 1.0;
            let mut k = 2.0;
            while k < x {
                f *= k;
                k += 1.0;
            }
            return Ok(f);
        }
        Ok(gamma_pos(x))
    } else {
        Ok(PI / (sin_pi(x) * gamma_pos(1.0 - x)))
    }
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma needs x > 0, got {x}")));
    }
    if x < 0.5 {
        return Ok((PI / sin_pi(x)).ln() - ln_gamma(1.0 - x)?);
    }
    if x >= 10.0 {
        return Ok((x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + stirling_tail(x));
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// 1/Γ(x), zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x >= 0.5 {
        if x > 171.0 {
            return 0.0;
        }
        1.0 / gamma_pos(x)
    } else {
        let g = 1.0 - x;
        if g > 171.0 {
            // 1/Γ(x) = sin(πx)Γ(1-x)/π overflows: report the signed infinity
            return sin_pi(x).signum() * f64::INFINITY;
        }
        sin_pi(x) * gamma_pos(g) / PI
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function e^{x²} erfc(x).
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        if x < -26.7 {
            return f64::INFINITY;
        }
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x <= 5.0 {
        return (x * x).exp() * libm::erfc(x);
    }
    // continued fraction e^{x²}erfc(x) = (1/√π)/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut f = x;
    for k in (1..=60).rev() {
        f = x + 0.5 * k as f64 / f;
    }
    1.0 / (PI.sqrt() * f)
}

/// Evaluation regimes for E_β(−x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLEvalPolicy {
    pub series_cutoff: f64,
    pub series_terms_max: usize,
    pub asymptotic_cutoff: f64,
    pub target_rel_tol: f64,
}

impl Default for MLEvalPolicy {
    fn default() -> Self {
        MLEvalPolicy {
            series_cutoff: 1.0,
            series_terms_max: 10_000,
            asymptotic_cutoff: 50.0,
            target_rel_tol: 1e-13,
        }
    }
}

impl MLEvalPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_cutoff > 0.0 && self.series_cutoff < self.asymptotic_cutoff) {
            return Err(Error::Domain("series_cutoff must be positive and below asymptotic_cutoff".into()));
        }
        if !(self.target_rel_tol > 0.0 && self.target_rel_tol <= 1e-3) {
            return Err(Error::Domain("target_rel_tol must lie in (0, 1e-3]".into()));
        }
        if self.series_terms_max == 0 {
            return Err(Error::Domain("series_terms_max must be positive".into()));
        }
        Ok(())
    }
}

/// Series stopping rule: |term| < tol·|sum| three times in a row.
struct SeriesStop {
    run: u32,
}

impl SeriesStop {
    fn new() -> Self {
        SeriesStop { run: 0 }
    }
    fn done(&mut self, term: f64, sum: f64, tol: f64) -> bool {
        if term.abs() < tol * sum.abs() || term == 0.0 && sum == 0.0 {
            self.run += 1;
        } else {
            self.run = 0;
        }
        self.run >= 3
    }
}

fn ml_series(beta: f64, x: f64, pol: &MLEvalPolicy) -> Result<f64> {
    let mut sum = 1.0;
    let mut xp = 1.0;
    let mut stop = SeriesStop::new();
    for k in 1..pol.series_terms_max {
        xp *= x;
        let term = xp * rgamma(1.0 + beta * k as f64);
        if !term.is_finite() {
            return Err(Error::Range(format!("E_{beta}({x}) series overflow")));
        }
        sum += term;
        if stop.done(term, sum, pol.target_rel_tol * 0.1) {
            return Ok(sum);
        }
    }
    Err(Error::Range(format!(
        "E_{beta}({x}) series hit the {} term cap",
        pol.series_terms_max
    )))
}

fn ml_asymptotic(beta: f64, y: f64, pol: &MLEvalPolicy) -> Result<f64> {
    let mut sum = 0.0;
    let mut yp = 1.0;
    let mut min_term = f64::INFINITY;
    let mut stop = SeriesStop::new();
    for m in 1..400 {
        yp /= y;
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * yp * rgamma(1.0 - beta * m as f64);
        if term != 0.0 {
            if term.abs() > 1e6 * min_term {
                // past the smallest term of a divergent asymptotic series
                break;
            }
            min_term = min_term.min(term.abs());
        }
        sum += term;
        if stop.done(term, sum, pol.target_rel_tol * 0.1) {
            return Ok(sum);
        }
    }
    if min_term < pol.target_rel_tol * sum.abs() {
        Ok(sum)
    } else {
        Err(Error::Numeric(format!(
            "E_{beta}(-{y}) asymptotic series did not reach tolerance"
        )))
    }
}

fn ml_integral(beta: f64, y: f64, pol: &MLEvalPolicy) -> Result<f64> {
    let c = (beta * PI).cos();
    let inv_b = 1.0 / beta;
    let f = |u: f64| {
        let den = u * u + 2.0 * u * y * c + y * y;
        (-u.powf(inv_b)).exp() * y / den
    };
    let upper = 45f64.powf(beta);
    let mut pts = vec![0.0];
    for p in [0.5 * y, y, 2.0 * y, 1.0] {
        if p > 0.0 && p < upper {
            pts.push(p);
        }
    }
    pts.push(upper);
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    let r = integrate_breaks(
        f,
        &pts,
        QuadOpts {
            abs_tol: 0.0,
            rel_tol: pol.target_rel_tol,
            max_intervals: 4000,
        },
    )?;
    Ok((beta * PI).sin() / (beta * PI) * r.value)
}

/// Closed bounds 1/(1+Γ(1−β)x) ≤ E_β(−x) ≤ 1/(1+x/Γ(1+β)).
pub fn ml_bounds(beta: f64, x: f64) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!("ml_bounds needs beta in (0,1), got {beta}")));
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!("ml_bounds needs x > 0, got {x}")));
    }
    let lower = 1.0 / (1.0 + gamma_fn(1.0 - beta)? * x);
    let upper = 1.0 / (1.0 + x / gamma_fn(1.0 + beta)?);
    Ok((lower, upper))
}

/// E_β(x) with the default policy.
pub fn mittag_leffler(beta: f64, x: f64) -> Result<f64> {
    mittag_leffler_with(beta, x, &MLEvalPolicy::default())
}

/// E_β(x) with an explicit evaluation policy, clamped into the closed bounds for x < 0.
pub fn mittag_leffler_with(beta: f64, x: f64, pol: &MLEvalPolicy) -> Result<f64> {
    let v = mittag_leffler_unclamped(beta, x, pol)?;
    if x < 0.0 && x.is_finite() && beta < 1.0 {
        let (lo, hi) = ml_bounds(beta, -x)?;
        return Ok(v.clamp(lo, hi));
    }
    Ok(v)
}

/// E_β(x) straight from the series, integral or asymptotic regime, without clamping.
pub fn mittag_leffler_unclamped(beta: f64, x: f64, pol: &MLEvalPolicy) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("beta must lie in (0,1], got {beta}")));
    }
    if x.is_nan() {
        return Err(Error::Domain("E_beta of NaN".into()));
    }
    pol.validate()?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if beta == 1.0 {
        let v = x.exp();
        if !v.is_finite() {
            return Err(Error::Range(format!("E_1({x}) overflows")));
        }
        return Ok(v);
    }
    if x > 0.0 {
        // E_β(x) ~ e^{x^{1/β}}/β
        if x.powf(1.0 / beta) - beta.ln() > 700.0 {
            return Err(Error::Range(format!("E_{beta}({x}) overflows")));
        }
        return ml_series(beta, x, pol);
    }
    let y = -x;
    if y.is_infinite() {
        return Ok(0.0);
    }
    if y <= pol.series_cutoff {
        ml_series(beta, x, pol)
    } else if y >= pol.asymptotic_cutoff {
        ml_asymptotic(beta, y, pol)
    } else {
        ml_integral(beta, y, pol)
    }
}

/// Piecewise Chebyshev interpolant of ln E_β(−e^s) over the integral regime,
/// with series and asymptotic evaluation outside it.
#[derive(Debug, Clone)]
pub struct MittagLefflerTable {
    beta: f64,
    policy: MLEvalPolicy,
    s0: f64,
    width: f64,
    coeffs: Vec<Vec<f64>>,
    gamma_lo: f64,
    gamma_hi: f64,
}

const TABLE_DEG: usize = 18;
const TABLE_WIDTH: f64 = 0.25;

impl MittagLefflerTable {
    pub fn new(beta: f64) -> Result<Self> {
        Self::with_policy(beta, MLEvalPolicy::default())
    }

    pub fn with_policy(beta: f64, policy: MLEvalPolicy) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Domain(format!("beta must lie in (0,1], got {beta}")));
        }
        policy.validate()?;
        let s0 = policy.series_cutoff.ln();
        let s1 = policy.asymptotic_cutoff.ln();
        let panels = ((s1 - s0) / TABLE_WIDTH).ceil().max(1.0) as usize;
        let width = (s1 - s0) / panels as f64;
        let n = TABLE_DEG + 1;
        let mut coeffs = Vec::with_capacity(panels);
        if beta < 1.0 {
            for p in 0..panels {
                let a = s0 + p as f64 * width;
                let mut vals = vec![0.0; n];
                for (j, v) in vals.iter_mut().enumerate() {
                    let t = (PI * (j as f64 + 0.5) / n as f64).cos();
                    let s = a + 0.5 * width * (t + 1.0);
                    *v = mittag_leffler_with(beta, -s.exp(), &policy)?.ln();
                }
                let mut c = vec![0.0; n];
                for (k, ck) in c.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (j, v) in vals.iter().enumerate() {
                        acc += v * (PI * k as f64 * (j as f64 + 0.5) / n as f64).cos();
                    }
                    *ck = 2.0 * acc / n as f64;
                }
                c[0] *= 0.5;
                coeffs.push(c);
            }
        }
        let (gamma_lo, gamma_hi) = if beta < 1.0 {
            (gamma_fn(1.0 - beta)?, gamma_fn(1.0 + beta)?)
        } else {
            (f64::NAN, f64::NAN)
        };
        Ok(MittagLefflerTable {
            beta,
            policy,
            s0,
            width,
            coeffs,
            gamma_lo,
            gamma_hi,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// E_β(−y) for y ≥ 0.
    pub fn eval_neg(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        if self.beta == 1.0 {
            return (-y).exp();
        }
        let v = if y <= self.policy.series_cutoff {
            ml_series(self.beta, -y, &self.policy).unwrap_or(f64::NAN)
        } else if y >= self.policy.asymptotic_cutoff {
            ml_asymptotic(self.beta, y, &self.policy).unwrap_or(f64::NAN)
        } else {
            let s = y.ln();
            let p = (((s - self.s0) / self.width) as usize).min(self.coeffs.len() - 1);
            let a = self.s0 + p as f64 * self.width;
            let t = 2.0 * (s - a) / self.width - 1.0;
            let c = &self.coeffs[p];
            let (mut b1, mut b2) = (0.0, 0.0);
            for &ck in c.iter().rev().take(c.len() - 1) {
                let b0 = 2.0 * t * b1 - b2 + ck;
                b2 = b1;
                b1 = b0;
            }
            (t * b1 - b2 + c[0]).exp()
        };
        let lo = 1.0 / (1.0 + self.gamma_lo * y);
        let hi = 1.0 / (1.0 + y / self.gamma_hi);
        v.clamp(lo, hi)
    }
}

/// Gauss hypergeometric series ₂F₁(a, b; c; z) for |z| < 1.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    hyp2f1_with(a, b, c, z, 1e-15, 10_000)
}

pub fn hyp2f1_with(a: f64, b: f64, c: f64, z: f64, rel_tol: f64, terms_max: usize) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::Domain(format!("2F1 with c = {c} a nonpositive integer")));
    }
    if !(z.abs() < 1.0) {
        return Err(Error::Domain(format!("2F1 series needs |z| < 1, got {z}")));
    }
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut stop = SeriesStop::new();
    for n in 0..terms_max {
        let nf = n as f64;
        // the product (a+n)(b+n) is formed first so the result is symmetric in (a, b)
        let ab = (a + nf) * (b + nf);
        term *= ab / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if !sum.is_finite() {
            return Err(Error::Domain("2F1 series diverged".into()));
        }
        if stop.done(term, sum, rel_tol) {
            return Ok(sum);
        }
    }
    Err(Error::Domain(format!(
        "2F1({a},{b};{c};{z}) did not converge in {terms_max} terms"
    )))
}

/// Mills ratio m(x) = e^{x²/2}∫_x^∞ e^{−u²/2} du.
pub fn mills_ratio(x: f64) -> f64 {
    (PI / 2.0).sqrt() * erfcx(x / std::f64::consts::SQRT_2)
}

/// Bessel function J₀.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 60.0 {
        j0_trapezoid(x)
    } else {
        j0_hankel(x)
    }
}

// trapezoid rule on (1/π)∫_0^π cos(x sin θ) dθ, exponentially accurate for n > x
fn j0_trapezoid(x: f64) -> f64 {
    {
        let n = (x as usize + 40) | 1;
        let h = PI / n as f64;
        let mut s = 0.5 * (1.0 + 1.0);
        for k in 1..n {
            s += (x * (k as f64 * h).sin()).cos();
        }
        s / n as f64
    }
}

fn j0_hankel(x: f64) -> f64 {
    let mu = 0.0;
    let z8 = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut tp = 1.0;
    let mut k = 1;
    loop {
        let a = (mu - ((2 * k - 1) * (2 * k - 1)) as f64) / (k as f64 * z8);
        tp *= a;
        if k % 2 == 1 {
            q += tp * if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        } else {
            p += tp * if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        }
        if tp.abs() < 1e-17 || k > 40 {
            break;
        }
        k += 1;
    }
    let chi = x - PI / 4.0;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert_eq!(gamma_fn(5.0).unwrap(), 24.0);
        assert!((gamma_fn(0.5).unwrap() - PI.sqrt()).abs() < 1e-15);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-3.0).is_err());
    }

    #[test]
    fn erfcx_branches_agree() {
        for &x in &[4.9f64, 5.0, 5.0001, 5.1, 8.0, 20.0] {
            let a = (x * x).exp() * libm::erfc(x);
            assert!((erfcx(x) / a - 1.0).abs() < 1e-13, "{x}");
        }
    }

    #[test]
    fn j0_branches_agree() {
        // J₀ at its first zero and across the branch switch
        assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-15);
        for &x in &[45.0, 60.0, 80.0] {
            assert!((j0_trapezoid(x) - j0_hankel(x)).abs() < 1e-14, "{x}");
        }
        // scipy.special.j0(100.0)
        assert!((bessel_j0(100.0) - 0.019_985_850_304_223_33).abs() < 1e-15);
    }
}
