//! Lower bounds on the DN eigenvalues of a center.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::Rigor;
use crate::bounds::{
    box_comparison, direct_sum, neumann_enclosure_bounds, pad_lower, reflection, scale_bound, tag_relaxation,
    Direction, OperatorRef, Rule, SpectralBound, TraceStep,
};
use crate::error::{Error, Result};
use crate::exact::{
    box_eigs, equilateral_eigs, interval_eigs, right_triangle_dn_lower_bound, BCPair, Formula, TriangleBc,
};
use crate::fem::dn_spectrum;
use crate::geom::{
    symmetry_reduce, y_alpha_enclosure, BoundaryCondition, Center, CrossSection, EdgeRole, Parity, Polygon,
    ValidatedConfig,
};

use BoundaryCondition::{Dirichlet as D, Neumann as N};

/// How lower bounds on the DN center problem are obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum LowerMethod {
    /// Closed forms for rectangles, equilateral triangles, sectors and
    /// boxes, with tag relaxation where a side is only partly Neumann.
    #[default]
    Catalog,
    /// Reflection split of the broken-waveguide kite into two right
    /// triangles.
    BrokenChain { alpha: f64 },
    /// Neumann enclosure triangle of the `Y_α` center, rescaled to an
    /// equilateral one.
    YAlphaChain { alpha: f64 },
    /// Per-parity blocks of a doubly symmetric rectangle center; decided
    /// separately, see [`super::certify`].
    ParityBlocks,
    /// Extrapolated FEM eigenvalues of the DN problem. Not a bound.
    FemEstimate { levels: usize },
}

pub(crate) fn center_polygon(cfg: &ValidatedConfig) -> Result<&Polygon> {
    cfg.center()
        .as_polygon()
        .ok_or_else(|| Error::NoPipeline(format!("{} does not have a polygonal center", cfg.name())))
}

/// At least `k` lower bounds on the DN eigenvalues of the center, on `op`.
pub(crate) fn dn_lower_bounds(
    cfg: &ValidatedConfig,
    method: &LowerMethod,
    k: usize,
    op: &OperatorRef,
) -> Result<(Vec<SpectralBound>, Rigor)> {
    let bounds = match method {
        LowerMethod::Catalog => catalog(cfg, k, op)?,
        LowerMethod::BrokenChain { alpha } => broken_chain(cfg, *alpha, op)?,
        LowerMethod::YAlphaChain { alpha } => y_alpha_chain(cfg, *alpha, k, op)?,
        LowerMethod::ParityBlocks => {
            return Err(Error::NoPipeline("parity blocks do not produce a single lower-bound list".into()))
        }
        LowerMethod::FemEstimate { levels } => {
            let spectrum = dn_spectrum(center_polygon(cfg)?, k, *levels)?;
            return Ok((spectrum.estimates(op), Rigor::Heuristic));
        }
    };
    Ok((pad_lower(bounds, k)?, Rigor::Analytic))
}

fn catalog(cfg: &ValidatedConfig, k: usize, op: &OperatorRef) -> Result<Vec<SpectralBound>> {
    match cfg.center() {
        Center::Polygon(p) => {
            if p.axis_aligned_rectangle().is_some() {
                rectangle_bounds(p, k, op)
            } else if is_equilateral(p) {
                equilateral_bounds(p, k, op)
            } else {
                Err(Error::NoPipeline(format!(
                    "no closed form for the center of {}; use a family chain or fem_estimate",
                    cfg.name()
                )))
            }
        }
        Center::Sector { alpha, radius } => sector_bounds(*alpha, *radius, op),
        Center::Box3 { dims, face_tags } => box3_bounds(cfg, dims, face_tags, k, op),
    }
}

/// Per-side condition of an axis-aligned rectangle (left, right, bottom,
/// top), Neumann when any part of the side is Neumann, and whether any side
/// mixes conditions.
fn rectangle_sides(p: &Polygon) -> Option<([BoundaryCondition; 4], [f64; 2], bool)> {
    let (lo, hi) = p.axis_aligned_rectangle()?;
    let tol = 1e-9 * p.diameter();
    let mut has = [[false; 2]; 4];
    for i in 0..p.len() {
        let (a, b) = p.edge(i);
        let side = if (a[0] - lo[0]).abs() <= tol && (b[0] - lo[0]).abs() <= tol {
            0
        } else if (a[0] - hi[0]).abs() <= tol && (b[0] - hi[0]).abs() <= tol {
            1
        } else if (a[1] - lo[1]).abs() <= tol && (b[1] - lo[1]).abs() <= tol {
            2
        } else {
            3
        };
        has[side][usize::from(p.edge_tags()[i] == N)] = true;
    }
    let tags = has.map(|h| if h[1] { N } else { D });
    let mixed = has.iter().any(|h| h[0] && h[1]);
    Some((tags, [hi[0] - lo[0], hi[1] - lo[1]], mixed))
}

fn rectangle_bounds(p: &Polygon, k: usize, op: &OperatorRef) -> Result<Vec<SpectralBound>> {
    let (tags, dims, mixed) =
        rectangle_sides(p).ok_or_else(|| Error::NoPipeline("center is not an axis-aligned rectangle".into()))?;
    let bcs = [BCPair::new(tags[0], tags[1]), BCPair::new(tags[2], tags[3])];
    let eigs = box_eigs(&dims, &bcs, k)?;
    if mixed {
        let relaxed = OperatorRef::new(
            format!("rectangle_{}x{}", dims[0], dims[1]),
            format!("{}|{}", bcs[0].label(), bcs[1].label()),
        );
        tag_relaxation(&eigs.as_bounds(&relaxed, Direction::LowerBound, "separation of variables"), op)
    } else {
        Ok(eigs.as_bounds(op, Direction::LowerBound, "separation of variables"))
    }
}

fn is_equilateral(p: &Polygon) -> bool {
    p.len() == 3 && {
        let l: Vec<f64> = (0..3).map(|i| p.edge_length(i)).collect();
        let m = l.iter().cloned().fold(0.0, f64::max);
        l.iter().all(|x| (x - m).abs() <= 1e-12 * m)
    }
}

fn equilateral_bounds(p: &Polygon, k: usize, op: &OperatorRef) -> Result<Vec<SpectralBound>> {
    let side = p.edge_length(0);
    let tags = p.edge_tags();
    if tags.iter().all(|t| *t == D) {
        let eigs = equilateral_eigs(side, TriangleBc::AllDirichlet, k)?;
        return Ok(eigs.as_bounds(op, Direction::LowerBound, "equilateral triangle spectrum"));
    }
    let eigs = equilateral_eigs(side, TriangleBc::AllNeumann, k)?;
    if tags.iter().all(|t| *t == N) {
        Ok(eigs.as_bounds(op, Direction::LowerBound, "equilateral triangle spectrum"))
    } else {
        let relaxed = OperatorRef::new(format!("equilateral_{side}"), "N");
        tag_relaxation(&eigs.as_bounds(&relaxed, Direction::LowerBound, "equilateral triangle spectrum"), op)
    }
}

fn formula_bound(op: &OperatorRef, index: usize, f: Formula, citation: &str) -> Result<SpectralBound> {
    let value = f.eval()?;
    let tol = f.tolerance() * value;
    Ok(SpectralBound::new(
        op.clone(),
        index,
        Direction::LowerBound,
        TraceStep { rule: Rule::Formula(f), citation: citation.into(), value },
        tol,
    ))
}

/// Candidate floor `(j_{s,k} lower bound / radius)²` for every sector mode
/// other than the ground state. `j_{s,k}` grows in both `s` and `k`, so
/// the modes `(0, 2)` and `(1, 1)` bound all others.
pub fn sector_tail_floor(alpha: f64, radius: f64) -> [Formula; 2] {
    [Formula::BesselZeroFloor { s: 0.0, k: 2, radius }, Formula::BesselZeroFloor { s: PI / alpha, k: 1, radius }]
}

fn sector_bounds(alpha: f64, radius: f64, op: &OperatorRef) -> Result<Vec<SpectralBound>> {
    let ground =
        formula_bound(op, 1, Formula::Sector { alpha, radius, n: 0, k: 1 }, "Bessel separation in the sector")?;
    let [a, b] = sector_tail_floor(alpha, radius);
    let (fa, fb) = (a.eval()?, b.eval()?);
    let tail = if fa <= fb { a } else { b };
    let second = formula_bound(op, 2, tail, "Bessel zero lower bound, monotone in order and index")?;
    Ok(vec![ground, second])
}

fn box3_bounds(
    cfg: &ValidatedConfig,
    dims: &[f64; 3],
    face_tags: &[BoundaryCondition; 6],
    k: usize,
    op: &OperatorRef,
) -> Result<Vec<SpectralBound>> {
    let bcs: Vec<BCPair> = (0..3).map(|a| BCPair::new(face_tags[2 * a], face_tags[2 * a + 1])).collect();
    let eigs = box_eigs(dims, &bcs, k)?;
    let full_faces = cfg.branches().iter().all(|b| matches!(b.cross_section, CrossSection::Rectangle { .. }));
    if full_faces {
        return Ok(eigs.as_bounds(op, Direction::LowerBound, "separation of variables"));
    }
    let labels: Vec<String> = bcs.iter().map(BCPair::label).collect();
    let cube = OperatorRef::new(format!("box_{}x{}x{}", dims[0], dims[1], dims[2]), labels.join("|"));
    box_comparison(
        &eigs.as_bounds(&cube, Direction::LowerBound, "separation of variables"),
        op,
        "Neumann on the whole cut face relaxes the partial cut",
    )
}

fn broken_chain(cfg: &ValidatedConfig, alpha: f64, op: &OperatorRef) -> Result<Vec<SpectralBound>> {
    if !(alpha > 0.0 && alpha < PI / 2.0) {
        return Err(Error::OutOfRange(format!("broken chain needs α in (0, π/2), got {alpha}")));
    }
    let poly = center_polygon(cfg)?;
    let sym =
        cfg.symmetry().ok_or_else(|| Error::NoPipeline("broken chain needs the horizontal mirror symmetry".into()))?;
    let halves = symmetry_reduce(poly, sym)?;
    let cot = 1.0 / alpha.tan();
    for (half, _) in &halves {
        if half.len() != 3 || (half.area() - cot / 2.0).abs() > 1e-9 * cot {
            return Err(Error::InvalidGeometry(format!(
                "half of the center is not the right triangle with legs 1 and cot α for α = {alpha}"
            )));
        }
    }
    let odd = vec![right_triangle_dn_lower_bound(alpha)?];
    let tri = OperatorRef::new(format!("equilateral_{}", 2.0 * 3f64.sqrt()), "D");
    let eq = equilateral_eigs(2.0 * 3f64.sqrt(), TriangleBc::AllDirichlet, 4)?.as_bounds(
        &tri,
        Direction::LowerBound,
        "equilateral triangle spectrum",
    );
    let sixth = OperatorRef::new("right_triangle_pi/6", "N-cut D-wall N-axis");
    let even_sixth =
        reflection(&eq, &[1, 4], &sixth, "six reflected copies of the π/6 triangle tile the equilateral triangle")?;
    let even = OperatorRef::new(format!("right_triangle_{alpha}"), "N-cut D-wall N-axis");
    let coeffs = [(PI / 6.0).tan() / alpha.tan(), 1.0];
    let even_alpha = scale_bound(&even_sixth, &coeffs, true, &even)?;
    direct_sum(&[odd, even_alpha], op)
}

fn y_alpha_chain(cfg: &ValidatedConfig, alpha: f64, k: usize, op: &OperatorRef) -> Result<Vec<SpectralBound>> {
    let poly = center_polygon(cfg)?;
    let (enclosure, base, height) = y_alpha_enclosure(alpha)?;
    let tall = 3f64.sqrt() / 2.0;
    // Equilateral triangle of the enclosure's height (narrow case) or base
    // (wide case), and the axis stretch mapping it onto the enclosure.
    let (side, coeffs) = if alpha <= PI / 3.0 {
        let side = height / tall;
        (side, [base / side, 1.0])
    } else {
        (1.0, [1.0, height / tall])
    };
    let eq_op = OperatorRef::new(format!("equilateral_{side}"), "N");
    let eq = equilateral_eigs(side, TriangleBc::AllNeumann, k.max(3))?.as_bounds(
        &eq_op,
        Direction::LowerBound,
        "equilateral triangle spectrum",
    );
    let m_op = OperatorRef::new(format!("y_alpha_enclosure_{alpha}"), "N");
    let scaled = scale_bound(&eq, &coeffs, false, &m_op)?;
    neumann_enclosure_bounds(op, poly, &enclosure, &scaled)
}

/// One parity class of a doubly symmetric rectangle center: the quarter
/// square plus a half-strip for every cut of the quarter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityBlock {
    pub parity: Parity,
    /// Lower bounds on the quarter with Neumann cuts.
    pub quarter: Vec<SpectralBound>,
    /// Bottom of the spectrum of each attached half-strip.
    pub strips: Vec<SpectralBound>,
    /// Eigenvalues of the block strictly below `ν`.
    pub below: usize,
    /// Summand that carries the perturbation (`quarter` or `strip_<i>`).
    pub perturbed: String,
    /// First bound of the perturbed summand above the `below` eigenvalues, minus `ν`.
    pub margin: f64,
    pub required: f64,
}

pub(crate) fn parity_blocks(
    cfg: &ValidatedConfig,
    nu: &SpectralBound,
    required: impl Fn(&SpectralBound) -> f64,
) -> Result<Vec<ParityBlock>> {
    let poly = center_polygon(cfg)?;
    let sym = cfg.symmetry().ok_or_else(|| Error::NoPipeline(format!("{} declares no symmetry", cfg.name())))?;
    let mut out = Vec::new();
    for (quarter, parity) in symmetry_reduce(poly, sym)? {
        let name = format!("{}_quarter_{}{}", cfg.name(), parity.0, parity.1);
        let q_op = OperatorRef::new(&name, "parity");
        let q = rectangle_bounds(&quarter, 8, &q_op)?;
        let n = quarter.len();
        let mut strips = Vec::new();
        let mut strip_names = Vec::new();
        for i in (0..n).filter(|&i| quarter.edge_roles()[i] == EdgeRole::Cut) {
            // A strip side continues the neighbouring mirror line or wall;
            // next to another cut it is the strip's own Dirichlet wall.
            let side = |j: usize| if quarter.edge_roles()[j] == EdgeRole::Cut { D } else { quarter.edge_tags()[j] };
            let pair = BCPair::new(side((i + n - 1) % n), side((i + 1) % n));
            let s_op = OperatorRef::new(format!("{name}_strip_{i}"), pair.label());
            let floor = interval_eigs(quarter.edge_length(i), pair, 1);
            strips.extend(floor.as_bounds(&s_op, Direction::LowerBound, "transverse mode of the half-strip"));
            strip_names.push(format!("strip_{i}"));
        }
        let below_nu = |b: &SpectralBound| nu.value - b.value > required(b);
        let below = q.iter().filter(|b| below_nu(b)).count();
        if let Some(s) = strips.iter().find(|b| below_nu(b)) {
            return Err(Error::NoPipeline(format!("half-strip {} has spectrum below the threshold", s.operator)));
        }
        // The quarter carries the perturbation when it can; a strip can
        // only when the block has no eigenvalue below ν.
        let mut best = ("quarter".to_string(), q[below].value - nu.value, required(&q[below]));
        if below == 0 && best.1 <= best.2 {
            for (s, label) in strips.iter().zip(&strip_names) {
                let m = s.value - nu.value;
                if m - required(s) > best.1 - best.2 {
                    best = (label.clone(), m, required(s));
                }
            }
        }
        out.push(ParityBlock {
            parity,
            quarter: q,
            strips,
            below,
            perturbed: best.0,
            margin: best.1,
            required: best.2,
        });
    }
    Ok(out)
}
