//! Adaptive Gauss–Kronrod quadrature, semi-infinite maps and oscillatory tails.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts {
            abs_tol: 1e-14,
            rel_tol: 1e-11,
            max_intervals: 2000,
        }
    }
}

impl QuadOpts {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        QuadOpts {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
}

/// One 15-point Kronrod panel: (integral, error estimate).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * h;
    resabs *= h.abs();
    resasc *= h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

struct Seg {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Seg {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Seg {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive integration over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOpts) -> Result<QuadResult> {
    integrate_breaks(f, &[a, b], opts)
}

/// Globally adaptive integration over consecutive segments between `points`.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, points: &[f64], opts: QuadOpts) -> Result<QuadResult> {
    if points.len() < 2 {
        return Ok(QuadResult {
            value: 0.0,
            abs_err: 0.0,
            evals: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let (mut total, mut total_err) = (0.0, 0.0);
    let mut evals = 0;
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (v, e) = gk15(&f, w[0], w[1]);
        evals += 15;
        total += v;
        total_err += e;
        heap.push(Seg {
            a: w[0],
            b: w[1],
            val: v,
            err: e,
        });
    }
    let tol = |t: f64| opts.abs_tol.max(opts.rel_tol * t.abs());
    while total_err > tol(total) && heap.len() < opts.max_intervals {
        let s = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let m = 0.5 * (s.a + s.b);
        if m <= s.a.min(s.b) || m >= s.a.max(s.b) || (s.b - s.a).abs() < 1e-15 * s.a.abs().max(s.b.abs()) {
            // cannot split further; keep it and stop refining
            heap.push(s);
            break;
        }
        let (v1, e1) = gk15(&f, s.a, m);
        let (v2, e2) = gk15(&f, m, s.b);
        evals += 30;
        total += v1 + v2 - s.val;
        total_err += e1 + e2 - s.err;
        heap.push(Seg {
            a: s.a,
            b: m,
            val: v1,
            err: e1,
        });
        heap.push(Seg {
            a: m,
            b: s.b,
            val: v2,
            err: e2,
        });
    }
    // re-sum to shed accumulated cancellation in the running totals
    let (mut v, mut e) = (0.0, 0.0);
    for s in heap.iter() {
        v += s.val;
        e += s.err;
    }
    if !v.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite integral on [{}, {}]",
            points[0],
            points[points.len() - 1]
        )));
    }
    if e > tol(v) && e > 1e3 * tol(v) {
        return Err(Error::Quadrature {
            a: points[0],
            b: points[points.len() - 1],
            value: v,
            abs_err: e,
            intervals: heap.len(),
        });
    }
    Ok(QuadResult {
        value: v,
        abs_err: e,
        evals,
    })
}

/// `∫_a^∞ f` through the map `x = a + (1-u)/u`.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, opts: QuadOpts) -> Result<QuadResult> {
    let g = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let x = a + (1.0 - u) / u;
        let v = f(x) / (u * u);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, opts)
}

/// `∫_a^∞ f` with the finite part split at `breaks` (all > a) and the tail mapped.
pub fn integrate_breaks_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, breaks: &[f64], opts: QuadOpts) -> Result<QuadResult> {
    let mut pts = vec![a];
    for &b in breaks {
        if b > *pts.last().unwrap() && b.is_finite() {
            pts.push(b);
        }
    }
    let last = *pts.last().unwrap();
    let head = integrate_breaks(&f, &pts, opts)?;
    let tail = integrate_to_inf(&f, last, opts)?;
    Ok(QuadResult {
        value: head.value + tail.value,
        abs_err: head.abs_err + tail.abs_err,
        evals: head.evals + tail.evals,
    })
}

/// Wynn epsilon extrapolation of a sequence of partial sums.
/// Returns (limit estimate, error estimate).
pub fn wynn_epsilon(s: &[f64]) -> (f64, f64) {
    let n = s.len();
    if n == 0 {
        return (0.0, f64::INFINITY);
    }
    if n < 3 {
        let e = if n == 2 { (s[1] - s[0]).abs() } else { f64::INFINITY };
        return (s[n - 1], e);
    }
    // e[k] holds column k of the epsilon table for the current diagonal
    let mut prev2: Vec<f64> = vec![0.0; n + 1];
    let mut prev: Vec<f64> = s.to_vec();
    let mut best = s[n - 1];
    let mut best_err = (s[n - 1] - s[n - 2]).abs();
    let mut col = 1;
    let mut cur_even: Vec<f64>;
    while prev.len() > 1 {
        let m = prev.len() - 1;
        let mut cur = vec![0.0; m];
        let mut ok = true;
        for i in 0..m {
            let d = prev[i + 1] - prev[i];
            let base = if col == 1 { 0.0 } else { prev2[i + 1] };
            if d == 0.0 || !d.is_finite() {
                ok = false;
                break;
            }
            cur[i] = base + 1.0 / d;
        }
        if !ok {
            break;
        }
        if col % 2 == 0 {
            cur_even = cur.clone();
            let k = cur_even.len();
            if k >= 2 {
                let est = cur_even[k - 1];
                let err = (cur_even[k - 1] - cur_even[k - 2]).abs();
                if err.is_finite() && err < best_err {
                    best = est;
                    best_err = err;
                }
            }
        }
        prev2 = prev;
        prev = cur;
        col += 1;
    }
    (best, best_err)
}

/// `∫_a^∞ g` for an oscillatory integrand, summing panels of width
/// `half_period` and accelerating the partial sums.
pub fn integrate_oscillatory_tail<F: Fn(f64) -> f64>(
    g: F,
    a: f64,
    half_period: f64,
    opts: QuadOpts,
) -> Result<QuadResult> {
    let max_panels = 400;
    let mut partial = Vec::with_capacity(64);
    let mut sum = 0.0;
    let mut evals = 0;
    let mut abs_sum = 0.0;
    let mut last_est = f64::NAN;
    let mut small_run = 0;
    let panel_opts = QuadOpts {
        abs_tol: opts.abs_tol * 0.1,
        rel_tol: opts.rel_tol * 0.1,
        max_intervals: opts.max_intervals,
    };
    for k in 0..max_panels {
        let lo = a + k as f64 * half_period;
        let hi = lo + half_period;
        let r = integrate(&g, lo, hi, panel_opts)?;
        evals += r.evals;
        sum += r.value;
        abs_sum += r.value.abs();
        partial.push(sum);
        let tol = opts.abs_tol.max(opts.rel_tol * sum.abs());
        if r.value.abs() < 0.05 * tol {
            small_run += 1;
            if small_run >= 3 {
                return Ok(QuadResult {
                    value: sum,
                    abs_err: tol,
                    evals,
                });
            }
        } else {
            small_run = 0;
        }
        if partial.len() >= 8 {
            let start = partial.len().saturating_sub(40);
            let (est, err) = wynn_epsilon(&partial[start..]);
            let tol = opts.abs_tol.max(opts.rel_tol * est.abs());
            if err < tol && (est - last_est).abs() < tol {
                return Ok(QuadResult {
                    value: est,
                    abs_err: err.max((est - last_est).abs()),
                    evals,
                });
            }
            last_est = est;
        }
    }
    let start = partial.len().saturating_sub(40);
    let (est, err) = wynn_epsilon(&partial[start..]);
    let tol = opts.abs_tol.max(opts.rel_tol * est.abs());
    if err <= 1e3 * tol {
        Ok(QuadResult {
            value: est,
            abs_err: err,
            evals,
        })
    } else {
        Err(Error::Quadrature {
            a,
            b: f64::INFINITY,
            value: est,
            abs_err: err.max(abs_sum * f64::EPSILON),
            intervals: max_panels,
        })
    }
}

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, QuadOpts::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, QuadOpts::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn semi_infinite_power_tail() {
        let r = integrate_to_inf(|x| 1.0 / (1.0 + x * x), 0.0, QuadOpts::default()).unwrap();
        assert!((r.value - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn oscillatory_dirichlet() {
        // ∫_0^∞ sin x / x dx = π/2
        let head = integrate(|x: f64| if x == 0.0 { 1.0 } else { x.sin() / x }, 0.0, std::f64::consts::PI, QuadOpts::default())
            .unwrap()
            .value;
        let tail = integrate_oscillatory_tail(|x: f64| x.sin() / x, std::f64::consts::PI, std::f64::consts::PI, QuadOpts::default())
            .unwrap()
            .value;
        assert!((head + tail - std::f64::consts::FRAC_PI_2).abs() < 1e-10, "{}", head + tail);
    }

    #[test]
    fn wynn_accelerates_log2() {
        let mut s = 0.0;
        let v: Vec<f64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        let (est, _) = wynn_epsilon(&v);
        assert!((est - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_moments() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
    }
}
