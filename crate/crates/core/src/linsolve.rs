//! Direct sparse solves.
//!
//! Factorization is a sparse LU with partial pivoting from `faer`, run
//! sequentially so repeated solves are bitwise reproducible.

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Relative residual bound every accepted solution satisfies.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Pivots below this fraction of ‖A‖∞ count as zero.
pub const PIVOT_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn new(matrix: SparseMatrix, rhs: Vec<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidInput(format!(
                "linear system matrix is {}x{}, expected square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if rhs.len() != matrix.nrows() {
            return Err(Error::InvalidInput(format!(
                "rhs has length {}, matrix has {} rows",
                rhs.len(),
                matrix.nrows()
            )));
        }
        Ok(Self { matrix, rhs })
    }
}

/// Solves `system.matrix · x = system.rhs`.
pub fn solve(system: &LinearSystem) -> Result<Vec<f64>> {
    LuSolver::factor(&system.matrix)?.solve(&system.rhs)
}

/// A factored matrix that can be reused for several right-hand sides.
pub struct LuSolver {
    matrix: SparseMatrix,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    norm: f64,
}

impl LuSolver {
    pub fn factor(matrix: &SparseMatrix) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(Error::InvalidInput(
                "cannot factor a non-square matrix".into(),
            ));
        }
        let norm = matrix.norm_inf();
        // an empty (or numerically empty) row is a zero pivot whatever the ordering
        for i in 0..n {
            let row_max = matrix.row(i).fold(0.0f64, |m, (_, v)| m.max(v.abs()));
            if row_max <= PIVOT_TOL * norm {
                return Err(Error::SingularMatrix(format!("row {i} is zero")));
            }
        }
        let triplets: Vec<Triplet<usize, usize, f64>> = matrix
            .triplets()
            .map(|(r, c, v)| Triplet::new(r, c, v))
            .collect();
        let csc = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::InvalidInput(format!("sparse conversion failed: {e:?}")))?;
        let lu = csc
            .sp_lu()
            .map_err(|e| Error::SingularMatrix(format!("LU factorization failed: {e:?}")))?;
        Ok(Self {
            matrix: matrix.clone(),
            lu,
            norm,
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.matrix.nrows();
        if rhs.len() != n {
            return Err(Error::InvalidInput(format!(
                "rhs has length {}, expected {n}",
                rhs.len()
            )));
        }
        let mut x = self.solve_raw(rhs);
        let b_norm = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // one step of iterative refinement is enough for the well-scaled systems here
        for _ in 0..2 {
            if !x.iter().all(|v| v.is_finite()) {
                return Err(Error::SingularMatrix("zero pivot encountered".into()));
            }
            let r = self.residual(&x, rhs);
            let r_norm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let x_norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if r_norm <= RESIDUAL_TOL * (self.norm * x_norm + b_norm) {
                return Ok(x);
            }
            let dx = self.solve_raw(&r);
            x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
        }
        let r = self.residual(&x, rhs);
        let r_norm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let x_norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if x.iter().all(|v| v.is_finite()) && r_norm <= RESIDUAL_TOL * (self.norm * x_norm + b_norm)
        {
            Ok(x)
        } else {
            Err(Error::SingularMatrix(format!(
                "residual {r_norm:e} exceeds bound; matrix numerically singular"
            )))
        }
    }

    fn solve_raw(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = self.lu.solve(&b);
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }

    fn residual(&self, x: &[f64], rhs: &[f64]) -> Vec<f64> {
        let ax = self.matrix.mul_vec(x);
        rhs.iter().zip(ax).map(|(b, a)| b - a).collect()
    }
}

/// Inverse of a small dense matrix (row-major), via dense LU.
pub fn dense_inverse(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let norm = a
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[i][j]);
    let lu = m.partial_piv_lu();
    let u = lu.U();
    for i in 0..n {
        if u[(i, i)].abs() <= PIVOT_TOL * norm {
            return Err(Error::SingularMatrix(format!("zero pivot at position {i}")));
        }
    }
    let inv = lu.solve(Mat::<f64>::identity(n, n));
    Ok((0..n)
        .map(|i| (0..n).map(|j| inv[(i, j)]).collect())
        .collect())
}
