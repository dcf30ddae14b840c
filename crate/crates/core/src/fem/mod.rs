//! Conforming P1 finite elements for mixed Dirichlet–Neumann Laplacian
//! eigenvalues on polygons.
//!
//! Meshes are nested (uniform red refinement of one constrained Delaunay
//! base mesh), so the discrete eigenvalues decrease monotonically towards
//! the exact ones from above.

mod mesh;
mod solve;
mod sparse;

use serde::{Deserialize, Serialize};

use crate::bounds::{Direction, OperatorRef, Rule, SpectralBound, TraceStep};
use crate::error::{Error, Result};
use crate::exact::EigList;
use crate::geom::{BoundaryCondition, Polygon};

pub use mesh::{refine, triangulate, BoundaryEdge, Mesh};
pub use solve::{lowest_eigs, lowest_eigs_below, DENSE_LIMIT};
pub use sparse::CsrMatrix;

/// Coarsest mesh size used by [`dn_spectrum`].
pub const DEFAULT_H: f64 = 0.25;

/// Fraction of the previous level's first eigenvalue used as shift.
const SHIFT_FRACTION: f64 = 0.9;

/// Relative solver tolerance carried by FEM upper bounds.
pub const SOLVER_TOL: f64 = 1e-9;

/// Generalized eigenproblem `K u = λ M u` on the free nodes.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// Free-node index of each mesh node; `None` for Dirichlet nodes.
    pub dof_map: Vec<Option<usize>>,
}

impl DiscreteProblem {
    pub fn n_dofs(&self) -> usize {
        self.stiffness.dim()
    }
}

/// P1 stiffness and consistent mass; nodes on Dirichlet edges are removed.
pub fn assemble(mesh: &Mesh) -> DiscreteProblem {
    let mut dirichlet = vec![false; mesh.nodes.len()];
    for e in &mesh.boundary_edges {
        if e.condition == BoundaryCondition::Dirichlet {
            dirichlet[e.nodes[0]] = true;
            dirichlet[e.nodes[1]] = true;
        }
    }
    let mut next = 0;
    let dof_map: Vec<Option<usize>> = dirichlet
        .iter()
        .map(|&d| {
            (!d).then(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    let mut k_trip = Vec::with_capacity(9 * mesh.triangles.len());
    let mut m_trip = Vec::with_capacity(9 * mesh.triangles.len());
    for t in &mesh.triangles {
        let p = t.map(|i| mesh.nodes[i]);
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
        let b: [f64; 3] = std::array::from_fn(|i| p[(i + 1) % 3][1] - p[(i + 2) % 3][1]);
        let c: [f64; 3] = std::array::from_fn(|i| p[(i + 2) % 3][0] - p[(i + 1) % 3][0]);
        for i in 0..3 {
            let Some(di) = dof_map[t[i]] else { continue };
            for j in 0..3 {
                let Some(dj) = dof_map[t[j]] else { continue };
                k_trip.push((di, dj, (b[i] * b[j] + c[i] * c[j]) / (4.0 * area)));
                m_trip.push((di, dj, area / 12.0 * if i == j { 2.0 } else { 1.0 }));
            }
        }
    }
    DiscreteProblem {
        stiffness: CsrMatrix::from_triplets(next, k_trip),
        mass: CsrMatrix::from_triplets(next, m_trip),
        dof_map,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FemLevel {
    pub h: f64,
    pub triangles: usize,
    pub dofs: usize,
    pub values: Vec<f64>,
}

/// Eigenvalues on nested meshes with extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FemSpectrum {
    pub levels: Vec<FemLevel>,
    pub extrapolated: Vec<f64>,
    /// `|v_L − v_{L−1}| + |extrapolated − v_L|`.
    pub error_estimate: Vec<f64>,
    /// Convergence order used for each extrapolation.
    pub order: Vec<f64>,
}

impl FemSpectrum {
    pub fn finest(&self) -> &[f64] {
        &self.levels.last().expect("at least one level").values
    }

    /// Finest-level values as upper bounds on `operator`.
    pub fn upper_bounds(&self, operator: &OperatorRef) -> Vec<SpectralBound> {
        let last = self.levels.last().expect("at least one level");
        let method = format!("P1 FEM, h = {}, {} triangles", last.h, last.triangles);
        last.values
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let step = TraceStep {
                    rule: Rule::Numerical { method: method.clone() },
                    citation: "Rayleigh-Ritz".into(),
                    value: v,
                };
                SpectralBound::new(operator.clone(), j + 1, Direction::UpperBound, step, SOLVER_TOL * v.abs())
            })
            .collect()
    }

    /// Extrapolated values, flagged as estimates.
    pub fn estimates(&self, operator: &OperatorRef) -> Vec<SpectralBound> {
        self.extrapolated
            .iter()
            .zip(&self.error_estimate)
            .enumerate()
            .map(|(j, (&v, &err))| {
                let method = format!("Richardson extrapolation over {} levels", self.levels.len());
                let step = TraceStep {
                    rule: Rule::Numerical { method },
                    citation: "discretization estimate".into(),
                    value: v,
                };
                SpectralBound::new(operator.clone(), j + 1, Direction::Estimate, step, err)
            })
            .collect()
    }

    pub fn as_eig_list(&self) -> EigList {
        EigList::numerical(self.finest(), "P1 FEM")
    }
}

/// Richardson extrapolation of a sequence on meshes with halving `h`. The
/// order comes from the last three levels when available, otherwise 2.
pub fn richardson(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len();
    let last = values[n - 1];
    if n == 1 {
        return (last, 0.0, f64::NAN);
    }
    let d1 = values[n - 2] - last;
    let mut order = 2.0;
    if n >= 3 {
        let d0 = values[n - 3] - values[n - 2];
        let ratio = d0 / d1;
        if ratio.is_finite() && ratio > 1.0 {
            order = ratio.log2().clamp(0.5, 4.0);
        }
    }
    let extrapolated = last - d1 / (2f64.powf(order) - 1.0);
    let error = d1.abs() + (extrapolated - last).abs();
    (extrapolated, error, order)
}

/// Lowest `k` eigenvalues on `levels` nested meshes starting from `h0`.
pub fn polygon_spectrum(poly: &Polygon, k: usize, h0: f64, levels: usize) -> Result<FemSpectrum> {
    if levels == 0 {
        return Err(Error::OutOfRange("need at least one level".into()));
    }
    let mut meshes = vec![triangulate(poly, h0)?];
    for _ in 1..levels {
        let next = refine(meshes.last().unwrap());
        meshes.push(next);
    }
    // Levels are solved coarse to fine; each coarse first eigenvalue gives
    // the shift for the next level.
    let mut solved: Vec<FemLevel> = Vec::with_capacity(levels);
    for (l, m) in meshes.iter().enumerate() {
        let prob = assemble(m);
        let shift = solved.last().and_then(|p| p.values.first()).map(|v| SHIFT_FRACTION * v);
        let values = lowest_eigs_below(&prob, k, shift)?.values();
        solved.push(FemLevel {
            h: h0 / f64::powi(2.0, l as i32),
            triangles: m.triangles.len(),
            dofs: prob.n_dofs(),
            values,
        });
    }
    let mut extrapolated = Vec::with_capacity(k);
    let mut error_estimate = Vec::with_capacity(k);
    let mut order = Vec::with_capacity(k);
    for j in 0..k {
        let seq: Vec<f64> = solved.iter().map(|l| l.values[j]).collect();
        let (e, err, p) = richardson(&seq);
        extrapolated.push(e);
        error_estimate.push(err);
        order.push(p);
    }
    Ok(FemSpectrum { levels: solved, extrapolated, error_estimate, order })
}

/// Mixed-condition spectrum of a center polygon from `h = 0.25`.
pub fn dn_spectrum(poly: &Polygon, k: usize, levels: usize) -> Result<FemSpectrum> {
    if levels < 2 {
        return Err(Error::OutOfRange(format!("extrapolation needs at least 2 levels, got {levels}")));
    }
    polygon_spectrum(poly, k, DEFAULT_H, levels)
}
