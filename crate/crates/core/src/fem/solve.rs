//! Smallest eigenpairs of `K u = λ M u`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::sparse::EnvelopeCholesky;
use super::DiscreteProblem;
use crate::error::{Error, Result};
use crate::exact::EigList;

/// Problems with at most this many unknowns are solved densely.
pub const DENSE_LIMIT: usize = 500;

/// Default shift: factor `K + M`, which is positive definite even when
/// every boundary condition is Neumann.
const DEFAULT_SHIFT: f64 = -1.0;
const MAX_SWEEPS: usize = 2000;
const CONVERGED: f64 = 1e-11;

/// Lowest `k` eigenvalues, ascending.
pub fn lowest_eigs(prob: &DiscreteProblem, k: usize) -> Result<EigList> {
    lowest_eigs_below(prob, k, None)
}

/// As [`lowest_eigs`], factoring `K − s M` for a known lower estimate `s`
/// of the first eigenvalue, which speeds up the iteration. Falls back to
/// the default shift if `K − s M` is not positive definite.
pub fn lowest_eigs_below(prob: &DiscreteProblem, k: usize, shift: Option<f64>) -> Result<EigList> {
    let n = prob.n_dofs();
    if k > n {
        return Err(Error::OutOfRange(format!("asked for {k} eigenvalues of a {n}-dof problem")));
    }
    if k == 0 {
        return Ok(EigList::default());
    }
    let values = if n <= DENSE_LIMIT {
        dense_values(&prob.stiffness.to_dense(), &prob.mass.to_dense())?[..k].to_vec()
    } else {
        let s = shift.filter(|s| *s > DEFAULT_SHIFT).unwrap_or(DEFAULT_SHIFT);
        match subspace_iteration(prob, k, s) {
            Err(Error::SolverFailure(_)) if s != DEFAULT_SHIFT => subspace_iteration(prob, k, DEFAULT_SHIFT)?,
            other => other?,
        }
    };
    Ok(EigList::numerical(&values, "P1 FEM"))
}

fn reduce(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let chol =
        b.clone().cholesky().ok_or_else(|| Error::SolverFailure("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv_a = l.solve_lower_triangular(a).ok_or_else(|| Error::SolverFailure("singular factor".into()))?;
    let c =
        l.solve_lower_triangular(&linv_a.transpose()).ok_or_else(|| Error::SolverFailure("singular factor".into()))?;
    Ok((0.5 * (&c + c.transpose()), l))
}

/// Eigenvalues of the symmetric pencil `(a, b)`, ascending.
pub(crate) fn dense_values(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (c, _) = reduce(a, b)?;
    let mut v: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// All eigenpairs of the symmetric pencil `(a, b)` with `b` positive
/// definite; eigenvectors are `b`-orthonormal columns.
pub(crate) fn dense_pencil(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let (c, l) = reduce(a, b)?;
    let eig = SymmetricEigen::new(c);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let lt = l.transpose();
    let mut vectors = DMatrix::zeros(a.nrows(), idx.len());
    for (col, &i) in idx.iter().enumerate() {
        let y = lt
            .solve_upper_triangular(&eig.eigenvectors.column(i).into_owned())
            .ok_or_else(|| Error::SolverFailure("singular factor".into()))?;
        vectors.set_column(col, &y);
    }
    Ok((values, vectors))
}

/// Block inverse iteration on `(K − sM)⁻¹ M` with Rayleigh–Ritz
/// projection. The block is wider than `k` so that clustered and repeated
/// eigenvalues converge together.
fn subspace_iteration(prob: &DiscreteProblem, k: usize, shift: f64) -> Result<Vec<f64>> {
    let n = prob.n_dofs();
    let p = (k + 8).max(2 * k).min(n);
    let chol = EnvelopeCholesky::factor(&prob.stiffness, &prob.mass, -shift)?;
    let mut x: Vec<Vec<f64>> = (0..p).map(|j| (0..n).map(|i| start_entry(i, j)).collect()).collect();
    let mut previous = vec![f64::INFINITY; k];
    for _ in 0..MAX_SWEEPS {
        let y: Vec<Vec<f64>> = x.par_iter().map(|col| chol.solve(&prob.mass.mul_vec(col))).collect();
        let ky: Vec<Vec<f64>> = y.par_iter().map(|c| prob.stiffness.mul_vec(c)).collect();
        let my: Vec<Vec<f64>> = y.par_iter().map(|c| prob.mass.mul_vec(c)).collect();
        let kr = DMatrix::from_fn(p, p, |i, j| dot(&y[i], &ky[j]));
        let mr = DMatrix::from_fn(p, p, |i, j| dot(&y[i], &my[j]));
        let (theta, q) = dense_pencil(&(0.5 * (&kr + kr.transpose())), &(0.5 * (&mr + mr.transpose())))?;
        x = (0..p)
            .into_par_iter()
            .map(|c| {
                let mut col = vec![0.0; n];
                for (r, yr) in y.iter().enumerate() {
                    let w = q[(r, c)];
                    for (v, yv) in col.iter_mut().zip(yr) {
                        *v += w * yv;
                    }
                }
                col
            })
            .collect();
        let current = theta[..k].to_vec();
        let done = current.iter().zip(&previous).all(|(c, p)| (c - p).abs() <= CONVERGED * (c.abs() + 1.0));
        if done {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::SolverFailure(format!("subspace iteration did not converge in {MAX_SWEEPS} sweeps")))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Deterministic, well-spread starting block.
fn start_entry(i: usize, j: usize) -> f64 {
    let h = (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (j as u64 + 1).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    let h = (h ^ (h >> 29)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    (h >> 11) as f64 / (1u64 << 53) as f64 - 0.5
}
