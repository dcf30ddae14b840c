//! Bessel functions of the first kind for real order and their zeros.
//!
//! `J_s(x)` is evaluated from the ascending series for small arguments and
//! from Schläfli's integral
//!
//! ```text
//! J_s(x) = 1/π ∫_0^π cos(sτ − x sin τ) dτ − sin(sπ)/π ∫_0^∞ exp(−x sinh t − s t) dt
//! ```
//! otherwise, integrated with composite Gauss–Legendre rules. The integral
//! keeps the absolute error near machine precision for every order, where
//! large-argument asymptotics lose accuracy once the order is comparable to
//! the argument.

use std::f64::consts::PI;
use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Arguments below this use the ascending series.
const SERIES_LIMIT: f64 = 8.0;
const GL_POINTS: usize = 20;
const MAX_ITER: usize = 200;

fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_POINTS;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            acc += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * acc;
    }
    total
}

fn series(s: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = (s * half.ln() - ln_gamma(s + 1.0)).exp();
    let mut sum = term;
    for m in 1..500 {
        let m = m as f64;
        term *= q / (m * (m + s));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn schlafli(s: f64, x: f64) -> f64 {
    let panels = ((x + s) / 4.0).ceil() as usize + 2;
    let oscillatory = integrate(|t| (s * t - x * t.sin()).cos(), 0.0, PI, panels) / PI;
    let sin_spi = (s * PI).sin();
    if sin_spi.abs() < 1e-300 || s.fract() == 0.0 {
        return oscillatory;
    }
    // exp(-40) is far below the target accuracy.
    let tail_end = (40.0 / x).asinh().min(if s > 0.0 { 40.0 / s } else { f64::INFINITY });
    let tail_panels = (tail_end / 0.25).ceil() as usize + 1;
    let tail = integrate(|t| (-x * t.sinh() - s * t).exp(), 0.0, tail_end, tail_panels);
    oscillatory - sin_spi / PI * tail
}

/// `J_s(x)` for `s ≥ 0`, `x ≥ 0`.
pub fn bessel_j(s: f64, x: f64) -> f64 {
    debug_assert!(s >= 0.0 && x >= 0.0);
    if x == 0.0 {
        return if s == 0.0 { 1.0 } else { 0.0 };
    }
    if x < SERIES_LIMIT {
        series(s, x)
    } else {
        schlafli(s, x)
    }
}

/// `J_s'(x) = (s/x) J_s(x) − J_{s+1}(x)`.
pub fn bessel_j_prime(s: f64, x: f64) -> f64 {
    s / x * bessel_j(s, x) - bessel_j(s + 1.0, x)
}

/// McMahon's large-zero expansion, used as the Newton starting point.
pub fn mcmahon_estimate(s: f64, k: usize) -> f64 {
    let mu = 4.0 * s * s;
    let beta = (k as f64 + 0.5 * s - 0.25) * PI;
    let b8 = 8.0 * beta;
    beta - (mu - 1.0) / b8
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8.powi(3))
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * b8.powi(5))
}

/// `k`-th positive zero `j_{s,k}` of `J_s`, to about 1e-14 relative.
///
/// The zero is bracketed by scanning sign changes upward from `x = s`
/// (`J_s` has no zero in `(0, s]`), then polished by safeguarded Newton.
pub fn bessel_zero(s: f64, k: usize) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) || k == 0 {
        return Err(Error::OutOfRange(format!("bessel_zero needs s ≥ 0 and k ≥ 1, got ({s}, {k})")));
    }
    // Consecutive zeros are more than 2.5 apart for s ≥ 0.
    let step = 0.3;
    let start = s.max(1e-3);
    let mut lo = start;
    let mut f_lo = bessel_j(s, lo);
    let mut found = 0;
    let mut hi = lo;
    let limit = s + (k as f64 + 2.0) * PI + 10.0;
    while found < k {
        hi = lo + step;
        if hi > limit {
            return Err(Error::ConvergenceFailure(format!("no sign change found for j_({s},{k})")));
        }
        let f_hi = bessel_j(s, hi);
        if f_hi == 0.0 {
            found += 1;
            if found == k {
                return Ok(hi);
            }
            lo = hi + 1e-9;
            f_lo = bessel_j(s, lo);
            continue;
        }
        if (f_lo > 0.0) != (f_hi > 0.0) {
            found += 1;
            if found == k {
                break;
            }
        }
        lo = hi;
        f_lo = f_hi;
    }
    polish(s, lo, hi, f_lo)
}

fn polish(s: f64, mut lo: f64, mut hi: f64, f_lo: f64) -> Result<f64> {
    let lo_positive = f_lo > 0.0;
    let guess = (1..=200).map(|k| mcmahon_estimate(s, k)).find(|z| *z > lo && *z < hi);
    let mut x = guess.unwrap_or(0.5 * (lo + hi));
    for _ in 0..MAX_ITER {
        let f = bessel_j(s, x);
        if f == 0.0 {
            return Ok(x);
        }
        if (f > 0.0) == lo_positive {
            lo = x;
        } else {
            hi = x;
        }
        let df = bessel_j_prime(s, x);
        let newton = x - f / df;
        let next = if newton.is_finite() && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * x || hi - lo <= 4.0 * f64::EPSILON * x {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::ConvergenceFailure(format!("Newton iteration for a zero of J_{s} hit the cap")))
}

/// Lower bound for `j_{s,k}`: `s + kπ − 1/2` (valid for `s > 1/2`) and
/// `s + kπ − π/2 + 1/2` (valid for `s > −1/2`), whichever is larger.
pub fn bessel_zero_lower_bound(s: f64, k: usize) -> Result<f64> {
    if !(s > -0.5) || k == 0 {
        return Err(Error::OutOfRange(format!("zero lower bound needs s > -1/2 and k ≥ 1, got ({s}, {k})")));
    }
    let kpi = k as f64 * PI;
    let second = s + kpi - PI / 2.0 + 0.5;
    if s > 0.5 {
        Ok(second.max(s + kpi - 0.5))
    } else {
        Ok(second)
    }
}
