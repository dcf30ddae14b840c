//! Angle sweeps over the broken and `Y_α` families and the certified region
//! of the rectangle family.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::presets::y_alpha_case;
use super::{broken_plan, certify, CertificationPlan, Counting, Verdict};
use crate::error::{Error, Result};
use crate::exact::{y_alpha_threshold, Formula};
use crate::geom::{broken_waveguide, rectangle_family, ValidatedConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub nu: f64,
    /// Deciding lower bound `L_{n+1}`.
    pub lower: f64,
    pub margin: f64,
    pub certified: bool,
}

/// `lo, lo + step, ...` up to `hi` inclusive (within a hundredth of a step).
pub fn sweep_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) {
        return Err(Error::OutOfRange(format!("bad grid [{lo}, {hi}] with step {step}")));
    }
    let n = ((hi - lo) / step + 0.01).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

fn point(alpha: f64, v: &Verdict) -> SweepPoint {
    let m = v.lower_margin().expect("a verdict carries its lower margin");
    SweepPoint { alpha, nu: v.nu(), lower: v.nu() + m.value, margin: m.value, certified: v.is_certified() }
}

fn sweep(
    grid: &[f64],
    case: impl Fn(f64) -> Result<(ValidatedConfig, CertificationPlan)> + Sync,
) -> Result<Vec<SweepPoint>> {
    grid.par_iter()
        .map(|&alpha| {
            let (cfg, plan) = case(alpha)?;
            Ok(point(alpha, &certify(&cfg, &plan)?))
        })
        .collect()
}

pub fn sweep_broken(grid: &[f64]) -> Result<Vec<SweepPoint>> {
    sweep(grid, |alpha| Ok((broken_waveguide(alpha)?, broken_plan(alpha))))
}

pub fn sweep_y_alpha(grid: &[f64]) -> Result<Vec<SweepPoint>> {
    sweep(grid, y_alpha_case)
}

/// First and last certified angle.
pub fn certified_range(points: &[SweepPoint]) -> Option<(f64, f64)> {
    let mut it = points.iter().filter(|p| p.certified).map(|p| p.alpha);
    let first = it.next()?;
    Some((first, it.next_back().unwrap_or(first)))
}

/// Root of `f` in `[lo, hi]` by bisection, to `tol` in the argument.
fn bisect(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo)?;
    if flo.signum() == f(hi)?.signum() {
        return Err(Error::ConvergenceFailure(format!("no sign change on [{lo}, {hi}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest angle above which the broken-waveguide chain certifies.
pub fn broken_critical_angle() -> Result<f64> {
    let margin = |alpha: f64| -> Result<f64> {
        let v = certify(&broken_waveguide(alpha)?, &broken_plan(alpha))?;
        Ok(v.lower_margin().map_or(f64::NAN, |m| m.value))
    };
    bisect(margin, 0.2, PI / 4.0, 1e-12)
}

/// The two angles where the `Y_α` bound crosses the threshold.
pub fn y_alpha_critical_angles() -> Result<(f64, f64)> {
    let margin = |alpha: f64| Ok(y_alpha_threshold(alpha)?.value - PI * PI);
    Ok((bisect(margin, 0.3, PI / 3.0, 1e-12)?, bisect(margin, PI / 3.0, 1.5, 1e-12)?))
}

/// Sufficient conditions, in `x = 1/a`, `y = 1/b`, for the rectangle with
/// two strips to have exactly two discrete eigenvalues and no embedded one.
pub fn rectangle_conditions(x: f64, y: f64) -> bool {
    x > 0.0
        && y > 0.0
        && y < 0.5
        && 4.0 * x * x + y * y < 1.0
        && 1.0 < 6.25 * x * x + y * y
        && 1.0 < x * x / 4.0 + 4.0 * y * y
}

pub fn certify_rectangle(x: f64, y: f64) -> Result<Verdict> {
    let cfg = rectangle_family(1.0 / x, 1.0 / y)?;
    certify(&cfg, &CertificationPlan { counting: Counting::DirichletBox, ..CertificationPlan::default() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub x: f64,
    pub y: f64,
    pub inside: bool,
    pub certified: bool,
    pub n: Option<usize>,
}

/// Cell-centered `nx × ny` grid over `(0, 1) × (0, 1/2)`.
pub fn rectangle_region(nx: usize, ny: usize) -> Result<Vec<RegionCell>> {
    if nx == 0 || ny == 0 {
        return Err(Error::OutOfRange("region grid needs at least one cell per axis".into()));
    }
    let cells: Vec<(f64, f64)> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| ((i as f64 + 0.5) / nx as f64, 0.5 * (j as f64 + 0.5) / ny as f64)))
        .collect();
    cells
        .par_iter()
        .map(|&(x, y)| {
            let v = certify_rectangle(x, y)?;
            Ok(RegionCell { x, y, inside: rectangle_conditions(x, y), certified: v.is_certified(), n: v.n_discrete() })
        })
        .collect()
}

/// `j_{s,k}` lower bounds for every sector mode `(n, k) ≠ (0, 1)` with
/// `n ≤ n_max`, `k ≤ k_max`, as `(n, k, bound)`.
pub fn sector_scan(alpha: f64, radius: f64, n_max: u32, k_max: u32) -> Result<Vec<(u32, u32, f64)>> {
    let mut out = Vec::new();
    for n in 0..=n_max {
        for k in 1..=k_max {
            if (n, k) != (0, 1) {
                let f = Formula::BesselZeroFloor { s: PI * n as f64 / alpha, k, radius };
                out.push((n, k, f.eval()?));
            }
        }
    }
    Ok(out)
}
