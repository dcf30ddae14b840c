//! Closed-form spectra and analytic eigenvalue bounds.
//!
//! Every value produced here carries a [`Formula`] that recomputes it, so
//! bounds built on top of these lists can be replayed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_zero, bessel_zero_lower_bound};
use crate::bounds::{Direction, OperatorRef, Rule, SpectralBound, TraceStep};
use crate::error::{Error, Result};
pub use crate::geom::BCPair;
use crate::geom::{BoundaryCondition, CrossSection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriangleBc {
    AllDirichlet,
    AllNeumann,
}

/// A closed-form eigenvalue or analytic bound, reproducible from its data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "formula", rename_all = "snake_case")]
pub enum Formula {
    /// Separable sum of 1D modes. Mode numbers follow the per-axis
    /// convention: DD counts from 1, NN from 0, mixed from 1.
    Box { dims: Vec<f64>, bcs: Vec<BCPair>, modes: Vec<u32> },
    /// `16π²/(9 side²) (m² + mn + n²)`.
    Equilateral { side: f64, bc: TriangleBc, m: u32, n: u32 },
    /// `(j_{πn/α, k} / radius)²`.
    Sector { alpha: f64, radius: f64, n: u32, k: u32 },
    /// `(lb(s, k) / radius)²` with the Bessel-zero lower bound `lb`.
    BesselZeroFloor { s: f64, k: u32, radius: f64 },
    /// `π² (1 + tan² α / 4)`.
    RightTriangleFloor { alpha: f64 },
    /// Enclosure-and-scaling bound on the second DN eigenvalue of the Y_α center.
    YAlphaThreshold { alpha: f64 },
    /// First Dirichlet eigenvalue of a cross-section.
    CrossSectionThreshold { cross_section: CrossSection },
}

impl Formula {
    pub fn eval(&self) -> Result<f64> {
        Ok(match self {
            Formula::Box { dims, bcs, modes } => {
                dims.iter().zip(bcs).zip(modes).map(|((l, bc), n)| interval_mode(*l, *bc, *n)).sum()
            }
            Formula::Equilateral { side, m, n, .. } => equilateral_value(*side, *m, *n),
            Formula::Sector { alpha, radius, n, k } => {
                let j = bessel_zero(PI * *n as f64 / alpha, *k as usize)?;
                (j / radius).powi(2)
            }
            Formula::BesselZeroFloor { s, k, radius } => (bessel_zero_lower_bound(*s, *k as usize)? / radius).powi(2),
            Formula::RightTriangleFloor { alpha } => PI * PI * (1.0 + alpha.tan().powi(2) / 4.0),
            Formula::YAlphaThreshold { alpha } => y_alpha_value(*alpha)?,
            Formula::CrossSectionThreshold { cross_section } => threshold_value(cross_section)?,
        })
    }

    /// Relative floating-point tolerance attached to this formula.
    pub fn tolerance(&self) -> f64 {
        match self {
            Formula::Sector { .. } => 1e-12,
            Formula::CrossSectionThreshold { cross_section: CrossSection::Disk { .. } } => 1e-12,
            _ => 1e-14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact(Formula),
    Numerical { method: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigEntry {
    pub value: f64,
    pub provenance: Provenance,
}

/// Nondecreasing list of eigenvalues (with multiplicity).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EigList {
    entries: Vec<EigEntry>,
}

impl EigList {
    /// Sorts the entries; ties keep their input order.
    pub fn from_entries(mut entries: Vec<EigEntry>) -> Self {
        entries.sort_by(|a, b| a.value.total_cmp(&b.value));
        EigList { entries }
    }

    pub fn numerical(values: &[f64], method: &str) -> Self {
        EigList::from_entries(
            values
                .iter()
                .map(|&value| EigEntry { value, provenance: Provenance::Numerical { method: method.to_string() } })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[EigEntry] {
        &self.entries
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.entries.get(index).map(|e| e.value)
    }

    pub fn truncated(mut self, k: usize) -> Self {
        self.entries.truncate(k);
        self
    }

    /// Reads the list as exact eigenvalues of `operator` and emits each as
    /// a lower bound (index `j + 1` for entry `j`).
    pub fn as_bounds(&self, operator: &OperatorRef, direction: Direction, citation: &str) -> Vec<SpectralBound> {
        self.entries
            .iter()
            .enumerate()
            .map(|(j, e)| {
                let (rule, tol) = match &e.provenance {
                    Provenance::Exact(f) => (Rule::Formula(f.clone()), f.tolerance()),
                    Provenance::Numerical { method } => (Rule::Numerical { method: method.clone() }, 1e-9),
                };
                SpectralBound::new(
                    operator.clone(),
                    j + 1,
                    direction,
                    TraceStep { rule, citation: citation.to_string(), value: e.value },
                    tol * e.value.abs(),
                )
            })
            .collect()
    }
}

fn interval_mode(length: f64, bc: BCPair, n: u32) -> f64 {
    use BoundaryCondition::*;
    let q = match (bc.left, bc.right) {
        (Dirichlet, Dirichlet) | (Neumann, Neumann) => n as f64,
        _ => n as f64 - 0.5,
    };
    (q * PI / length).powi(2)
}

fn first_mode(bc: BCPair) -> u32 {
    if bc == BCPair::NN {
        0
    } else {
        1
    }
}

/// First `k` eigenvalues of `−d²/dx²` on `(0, length)`.
pub fn interval_eigs(length: f64, bc: BCPair, k: usize) -> EigList {
    let start = first_mode(bc);
    EigList {
        entries: (0..k as u32)
            .map(|i| {
                let n = start + i;
                EigEntry {
                    value: interval_mode(length, bc, n),
                    provenance: Provenance::Exact(Formula::Box { dims: vec![length], bcs: vec![bc], modes: vec![n] }),
                }
            })
            .collect(),
    }
}

/// First `k` eigenvalues of a box with per-axis boundary conditions.
///
/// The `k` smallest sums only use the first `k` modes of each axis, so the
/// enumeration below is complete.
pub fn box_eigs(dims: &[f64], bcs: &[BCPair], k: usize) -> Result<EigList> {
    if dims.is_empty() || dims.len() > 3 || dims.len() != bcs.len() {
        return Err(Error::OutOfRange(format!(
            "box needs 1 to 3 axes with matching conditions, got {} dims",
            dims.len()
        )));
    }
    if dims.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(Error::OutOfRange(format!("box dimensions must be positive: {dims:?}")));
    }
    if k == 0 {
        return Ok(EigList::default());
    }
    let per_axis: Vec<Vec<u32>> =
        bcs.iter().map(|bc| (first_mode(*bc)..first_mode(*bc) + k as u32).collect()).collect();
    let mut combos: Vec<Vec<u32>> = vec![vec![]];
    for modes in &per_axis {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                modes.iter().map(move |&m| {
                    let mut c = prefix.clone();
                    c.push(m);
                    c
                })
            })
            .collect();
    }
    let mut entries: Vec<EigEntry> = combos
        .into_iter()
        .map(|modes| {
            let f = Formula::Box { dims: dims.to_vec(), bcs: bcs.to_vec(), modes };
            EigEntry { value: f.eval().expect("box formula is infallible"), provenance: Provenance::Exact(f) }
        })
        .collect();
    entries.sort_by(|a, b| a.value.total_cmp(&b.value));
    entries.truncate(k);
    Ok(EigList { entries })
}

fn equilateral_value(side: f64, m: u32, n: u32) -> f64 {
    let (m, n) = (m as f64, n as f64);
    16.0 * PI * PI / (9.0 * side * side) * (m * m + m * n + n * n)
}

/// First `k` eigenvalues of the equilateral triangle with side `side` and a
/// uniform boundary condition. Pairs `{m, n}` with `m ≠ n` count twice.
pub fn equilateral_eigs(side: f64, bc: TriangleBc, k: usize) -> Result<EigList> {
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::OutOfRange(format!("triangle side must be positive, got {side}")));
    }
    if k == 0 {
        return Ok(EigList::default());
    }
    let start = match bc {
        TriangleBc::AllDirichlet => 1,
        TriangleBc::AllNeumann => 0,
    };
    let scale = 16.0 * PI * PI / (9.0 * side * side);
    let mut cap = start + k as u32;
    loop {
        let mut entries = Vec::new();
        for n in start..=cap {
            for m in start..=n {
                let f = Formula::Equilateral { side, bc, m, n };
                let value = equilateral_value(side, m, n);
                entries.push(EigEntry { value, provenance: Provenance::Exact(f) });
                if m != n {
                    let f = Formula::Equilateral { side, bc, m: n, n: m };
                    entries.push(EigEntry { value, provenance: Provenance::Exact(f) });
                }
            }
        }
        let list = EigList::from_entries(entries).truncated(k);
        // Any omitted pair has max(m, n) > cap, hence value ≥ scale (cap+1)².
        let omitted_floor = scale * ((cap + 1) as f64).powi(2);
        if list.len() == k && list.get(k - 1).unwrap() <= omitted_floor {
            return Ok(list);
        }
        cap *= 2;
    }
}

/// First `k` eigenvalues of the DN Laplacian on a circular sector with
/// Neumann flat sides and a Dirichlet arc, scanning `n ≤ n_max`, `k' ≤ k_max`.
pub fn sector_dn_eigs(alpha: f64, radius: f64, k: usize, caps: (usize, usize)) -> Result<EigList> {
    if !(alpha > 0.0 && alpha < PI) || !(radius > 0.0) {
        return Err(Error::OutOfRange(format!("sector needs α in (0, π) and radius > 0, got ({alpha}, {radius})")));
    }
    let (n_max, k_max) = caps;
    if k == 0 {
        return Ok(EigList::default());
    }
    if k_max == 0 || k > (n_max + 1) * k_max {
        return Err(Error::CapsTooSmall { n_max, k_max, k });
    }
    let mut entries = Vec::new();
    for n in 0..=n_max as u32 {
        for kk in 1..=k_max as u32 {
            let f = Formula::Sector { alpha, radius, n, k: kk };
            entries.push(EigEntry { value: f.eval()?, provenance: Provenance::Exact(f) });
        }
    }
    let list = EigList::from_entries(entries).truncated(k);
    // j_{s,k} increases in both s and k, so the omitted candidates are
    // bounded below by the first omitted order and the first omitted index.
    let next_order = bessel_zero_lower_bound(PI * (n_max + 1) as f64 / alpha, 1)?;
    let next_index = bessel_zero_lower_bound(0.0, k_max + 1)?;
    let floor = (next_order.min(next_index) / radius).powi(2);
    if list.get(k - 1).unwrap() < floor {
        Ok(list)
    } else {
        Err(Error::CapsTooSmall { n_max, k_max, k })
    }
}

/// Lower bound `π²(1 + tan²α/4)` for the first eigenvalue of the right
/// triangle with legs 1 (Neumann) and `cot α` (Dirichlet) and a Dirichlet
/// hypotenuse; by domain monotonicity in the Neumann-leg direction it bounds
/// every eigenvalue of that operator.
pub fn right_triangle_dn_lower_bound(alpha: f64) -> Result<SpectralBound> {
    if !(alpha > 0.0 && alpha < PI / 2.0) {
        return Err(Error::OutOfRange(format!("right-triangle bound needs α in (0, π/2), got {alpha}")));
    }
    let f = Formula::RightTriangleFloor { alpha };
    let value = f.eval()?;
    Ok(SpectralBound::new(
        OperatorRef::new(format!("right_triangle_{alpha}"), "DN-hypotenuse-D"),
        1,
        Direction::LowerBound,
        TraceStep { rule: Rule::Formula(f), citation: "right-triangle 1D inequality".into(), value },
        1e-14 * value,
    ))
}

/// First Dirichlet eigenvalue of a cross-section.
pub fn cross_section_threshold(cs: &CrossSection) -> f64 {
    threshold_value(cs).expect("validated cross-sections have positive dimensions")
}

fn threshold_value(cs: &CrossSection) -> Result<f64> {
    Ok(match *cs {
        CrossSection::Interval { width } => interval_mode(width, BCPair::DD, 1),
        CrossSection::Rectangle { a, b } => interval_mode(a, BCPair::DD, 1) + interval_mode(b, BCPair::DD, 1),
        CrossSection::Disk { radius } => (bessel_zero(0.0, 1)? / radius).powi(2),
    })
}

/// Base length and height of the Neumann enclosure triangle of the Y_α center.
pub fn y_alpha_enclosure_dims(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < PI / 2.0) {
        return Err(Error::OutOfRange(format!("Y_α threshold needs α in (0, π/2), got {alpha}")));
    }
    let (s, c) = alpha.sin_cos();
    if alpha <= PI / 3.0 {
        Ok(((2.0 - c) * c / (s * s), (2.0 - c) / (2.0 * s)))
    } else {
        Ok((1.0, alpha.tan() / 2.0))
    }
}

fn y_alpha_value(alpha: f64) -> Result<f64> {
    y_alpha_enclosure_dims(alpha)?;
    let (s, c) = alpha.sin_cos();
    Ok(if alpha <= PI / 3.0 {
        16.0 * PI * PI * s.powi(4) / (9.0 * c * c * (2.0 - c).powi(2))
    } else {
        16.0 * PI * PI / (3.0 * alpha.tan().powi(2))
    })
}

/// Lower bound for the second DN eigenvalue of the Y_α center.
pub fn y_alpha_threshold(alpha: f64) -> Result<SpectralBound> {
    let (base, height) = y_alpha_enclosure_dims(alpha)?;
    let f = Formula::YAlphaThreshold { alpha };
    let value = f.eval()?;
    Ok(SpectralBound::new(
        OperatorRef::new(format!("y_alpha_{alpha}"), "DN"),
        2,
        Direction::LowerBound,
        TraceStep {
            rule: Rule::Formula(f),
            citation: format!("Neumann enclosure triangle l = {base:.17e}, h = {height:.17e}, rescaled to equilateral"),
            value,
        },
        1e-14 * value,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI2: f64 = PI * PI;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn interval_examples() {
        assert!(close(interval_eigs(1.0, BCPair::DD, 1).values()[0], PI2, 1e-15));
        assert_eq!(interval_eigs(1.0, BCPair::NN, 2).values(), vec![0.0, PI2]);
        let dn = interval_eigs(1.0, BCPair::DN, 2).values();
        assert!(close(dn[0], PI2 / 4.0, 1e-15) && close(dn[1], 9.0 * PI2 / 4.0, 1e-15));
        assert_eq!(interval_eigs(2.0, BCPair::ND, 3).values(), interval_eigs(2.0, BCPair::DN, 3).values());
    }

    #[test]
    fn box_examples() {
        let t = box_eigs(&[1.0, 1.0], &[BCPair::NN, BCPair::DN], 2).unwrap().values();
        assert!(close(t[0], PI2 / 4.0, 1e-14) && close(t[1], 5.0 * PI2 / 4.0, 1e-14));
        let cube = box_eigs(&[1.0; 3], &[BCPair::DN; 3], 2).unwrap().values();
        assert!(close(cube[0], 3.0 * PI2 / 4.0, 1e-14) && close(cube[1], 11.0 * PI2 / 4.0, 1e-14));
        let k0 = box_eigs(&[1.0], &[BCPair::DD], 0).unwrap();
        assert!(k0.is_empty());
        assert!(box_eigs(&[1.0, -1.0], &[BCPair::DD; 2], 1).is_err());
    }

    #[test]
    fn equilateral_examples() {
        let side = 2.0 * 3f64.sqrt();
        let d = equilateral_eigs(side, TriangleBc::AllDirichlet, 4).unwrap().values();
        assert!(close(d[0], 4.0 * PI2 / 9.0, 1e-14));
        assert!(close(d[1], d[2], 1e-15));
        assert!(close(d[3], 16.0 * PI2 / 9.0, 1e-14));
        let n = equilateral_eigs(1.0, TriangleBc::AllNeumann, 3).unwrap().values();
        assert_eq!(n[0], 0.0);
        assert!(close(n[1], 16.0 * PI2 / 9.0, 1e-14) && close(n[2], 16.0 * PI2 / 9.0, 1e-14));
    }

    #[test]
    fn sector_examples() {
        let one = sector_dn_eigs(PI / 2.0, 1.0, 1, (4, 4)).unwrap().values();
        assert!((one[0] - 5.7832).abs() < 1e-4);
        let two = sector_dn_eigs(PI / 2.0, 1.0, 2, (4, 4)).unwrap().values();
        assert!((two[1] - 5.135_622_301_840_683f64.powi(2)).abs() < 1e-10);
        assert!((two[1] - 26.375).abs() < 1e-3);
        assert!(matches!(sector_dn_eigs(PI / 2.0, 1.0, 9, (0, 1)), Err(Error::CapsTooSmall { .. })));
        assert!(matches!(sector_dn_eigs(3.0, 1.0, 3, (0, 3)), Err(Error::CapsTooSmall { .. })));
    }

    #[test]
    fn right_triangle_examples() {
        assert!(close(right_triangle_dn_lower_bound(PI / 4.0).unwrap().value, 5.0 * PI2 / 4.0, 1e-14));
        assert!(close(right_triangle_dn_lower_bound(PI / 3.0).unwrap().value, 7.0 * PI2 / 4.0, 1e-14));
        assert!(close(right_triangle_dn_lower_bound(1e-9).unwrap().value, PI2, 1e-15));
    }

    #[test]
    fn thresholds() {
        assert!(close(cross_section_threshold(&CrossSection::Interval { width: 1.0 }), PI2, 1e-15));
        assert!(close(cross_section_threshold(&CrossSection::Rectangle { a: 1.0, b: 1.0 }), 2.0 * PI2, 1e-15));
        let disk = cross_section_threshold(&CrossSection::Disk { radius: 0.5 });
        assert!((disk - 23.13).abs() < 5e-3);
        assert!(close(disk, 4.0 * 2.404_825_557_695_773f64.powi(2), 1e-12));
    }

    #[test]
    fn y_alpha_boundary_angles() {
        let a1 = (13f64.sqrt() - 3.0).acos();
        assert!(close(y_alpha_threshold(a1).unwrap().value, PI2, 1e-12));
        let a2 = (4.0 / 3f64.sqrt()).atan();
        assert!(close(y_alpha_threshold(a2).unwrap().value, PI2, 1e-12));
        let below = y_alpha_value(PI / 3.0 - 1e-12).unwrap();
        let above = y_alpha_value(PI / 3.0 + 1e-12).unwrap();
        assert!(close(below, 16.0 * PI2 / 9.0, 1e-10) && close(above, 16.0 * PI2 / 9.0, 1e-10));
        assert!(y_alpha_threshold(PI / 2.0).is_err());
        assert!(y_alpha_threshold(0.0).is_err());
    }

    #[test]
    fn formulas_replay() {
        for e in box_eigs(&[2.381, 2.041], &[BCPair::DN, BCPair::DD], 6).unwrap().entries() {
            let Provenance::Exact(f) = &e.provenance else { panic!() };
            assert_eq!(f.eval().unwrap(), e.value);
        }
    }
}
