//! Monotonicity analysis of the 1D pressure Schur complement.
//!
//! Eliminating the velocity from the 1D system leaves `A p = …` with
//! `A = κL + Δt D P⁻¹ Dᵀ` and `P = ρM + Δt μ_vis L`. Replacing P⁻¹ by the
//! fundamental solution of `ρ − Δt μ_vis ∂ₓₓ` gives a three-point row for A
//! whose off-diagonal sign decides the M-matrix property. The stabilized
//! operator B adds β to κ.

use crate::assembly::{assemble_divergence, assemble_laplace, assemble_mass};
use crate::error::{Error, Result};
use crate::linsolve::dense_inverse;
use crate::mesh::Mesh;
use crate::params::ModelParams;
use crate::sparse::{SparseMatrix, TripletBuilder};

/// Relative tolerance for the sign tests of [`is_m_matrix`].
pub const M_MATRIX_TOL: f64 = 1e-14;

/// ν = √(ρ / (Δt μ_vis)).
pub fn nu(params: &ModelParams) -> f64 {
    (params.rho / (params.dt * params.mu_vis())).sqrt()
}

/// sinh(ν a) / cosh(ν), shifted to avoid overflow for large ν.
fn sinh_over_cosh(nu: f64, a: f64) -> f64 {
    if nu > 700.0 {
        sinh_over_cosh_shifted(nu, a)
    } else {
        (nu * a).sinh() / nu.cosh()
    }
}

fn sinh_over_cosh_shifted(nu: f64, a: f64) -> f64 {
    ((nu * (a - 1.0)).exp() - (-nu * (a + 1.0)).exp()) / (1.0 + (-2.0 * nu).exp())
}

/// Fundamental-solution approximation of P⁻¹ on the nodes x₀ … x_{n−1} of a
/// uniform interval mesh with n elements (the free velocity nodes for a
/// zero-flux end at x = 0 and a fixed end at x = 1).
pub fn approx_p_inverse(mesh: &Mesh, params: &ModelParams) -> Result<Vec<Vec<f64>>> {
    if mesh.dim() != 1 {
        return Err(Error::InvalidInput(
            "approx_p_inverse needs a 1D mesh".into(),
        ));
    }
    if !(params.rho > 0.0 && params.dt > 0.0 && params.mu_vis() > 0.0) {
        return Err(Error::InvalidInput(
            "rho, dt and mu1 + mu2 must be positive".into(),
        ));
    }
    let n = mesh.n_elements();
    let x: Vec<f64> = mesh.vertices()[..n].iter().map(|v| v[0]).collect();
    let nu = nu(params);
    let scale = nu / (2.0 * params.rho);
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let near = if j <= i {
                1.0 - x[i] + x[j]
            } else {
                1.0 + x[i] - x[j]
            };
            let far = 1.0 - x[i] - x[j];
            out[i][j] = scale * (sinh_over_cosh(nu, near) + sinh_over_cosh(nu, far));
        }
    }
    Ok(out)
}

/// Exact P⁻¹ on the same node set as [`approx_p_inverse`].
pub fn exact_p_inverse(mesh: &Mesh, params: &ModelParams) -> Result<Vec<Vec<f64>>> {
    if mesh.dim() != 1 {
        return Err(Error::InvalidInput(
            "exact_p_inverse needs a 1D mesh".into(),
        ));
    }
    let n = mesh.n_elements();
    let keep: Vec<usize> = (0..n).collect();
    let p = assemble_mass(mesh, 1)
        .scaled(params.rho)
        .add_scaled(&assemble_laplace(mesh), params.dt * params.mu_vis())
        .principal_submatrix(&keep);
    dense_inverse(&p.to_dense())
}

/// Three-point row of the approximate Schur operator:
/// (off-diagonal, diagonal) = (h/4μ_vis − (κ+β)/h, 2(h/4μ_vis + (κ+β)/h)).
pub fn schur_row_coefficients(h: f64, params: &ModelParams) -> (f64, f64) {
    let a = h / (4.0 * params.mu_vis());
    let b = (params.kappa + params.beta) / h;
    (a - b, 2.0 * (a + b))
}

/// Tridiagonal approximate Schur matrix with `size` rows.
pub fn approx_schur_matrix(size: usize, h: f64, params: &ModelParams) -> SparseMatrix {
    let (off, diag) = schur_row_coefficients(h, params);
    let mut b = TripletBuilder::with_capacity(size, size, 3 * size);
    for i in 0..size {
        b.add(i, i, diag);
        if i > 0 {
            b.add(i, i - 1, off);
        }
        if i + 1 < size {
            b.add(i, i + 1, off);
        }
    }
    b.build()
}

/// Sufficient M-matrix certificate: Z-matrix with positive diagonal, weakly
/// diagonally dominant with at least one strictly dominant row.
pub fn is_m_matrix(a: &SparseMatrix) -> bool {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return false;
    }
    let tol = M_MATRIX_TOL * a.norm_inf();
    let mut strict = false;
    for i in 0..a.nrows() {
        let mut diag = 0.0;
        let mut off_sum = 0.0;
        for (j, v) in a.row(i) {
            if j == i {
                diag = v;
            } else if v > tol {
                return false;
            } else {
                off_sum += v.abs();
            }
        }
        if diag <= 0.0 {
            return false;
        }
        let margin = diag - off_sum;
        if margin < -tol {
            return false;
        }
        strict |= margin > tol;
    }
    strict
}

/// [`is_m_matrix`] on the block without the first and last rows and columns.
pub fn is_m_matrix_interior(a: &SparseMatrix) -> bool {
    let n = a.nrows();
    if n < 3 {
        return false;
    }
    let keep: Vec<usize> = (1..n - 1).collect();
    is_m_matrix(&a.principal_submatrix(&keep))
}

/// Largest grid size with a monotone unstabilized Schur row: 2√(μ_vis κ).
pub fn critical_h(params: &ModelParams) -> f64 {
    2.0 * (params.mu_vis() * params.kappa).sqrt()
}

/// Smallest β giving a monotone stabilized row: h²/(4μ_vis) − κ. Negative
/// values mean no stabilization is needed.
pub fn beta_star(h: f64, params: &ModelParams) -> f64 {
    h * h / (4.0 * params.mu_vis()) - params.kappa
}

/// (κ+β)L + Δt D P⁻¹ Dᵀ with the exact P⁻¹, on the nodes x₀ … x_{n−1}.
/// With β = 0 this is the unstabilized operator A.
pub fn assemble_exact_schur(mesh: &Mesh, params: &ModelParams) -> Result<SparseMatrix> {
    if mesh.dim() != 1 {
        return Err(Error::InvalidInput(
            "assemble_exact_schur needs a 1D mesh".into(),
        ));
    }
    let n = mesh.n_elements();
    let keep: Vec<usize> = (0..n).collect();
    let pinv = exact_p_inverse(mesh, params)?;
    let d = assemble_divergence(mesh)
        .principal_submatrix(&keep)
        .to_dense();
    let l = assemble_laplace(mesh).principal_submatrix(&keep).to_dense();
    // D P⁻¹ Dᵀ
    let dp: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| d[i][k] * pinv[k][j]).sum())
                .collect()
        })
        .collect();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let dpdt: f64 = (0..n).map(|k| dp[i][k] * d[j][k]).sum();
            out[i][j] = (params.kappa + params.beta) * l[i][j] + params.dt * dpdt;
        }
    }
    Ok(SparseMatrix::from_dense(&out))
}

/// Summary of the monotonicity analysis for one grid size.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurAnalysis {
    pub h: f64,
    pub nu: f64,
    /// Approximate unstabilized operator (β = 0).
    pub a: SparseMatrix,
    /// Approximate stabilized operator.
    pub b: SparseMatrix,
    pub is_a_m_matrix: bool,
    pub is_b_m_matrix: bool,
    pub h_critical: f64,
    pub beta_star: f64,
}

impl SchurAnalysis {
    /// Analysis on a uniform grid of size `h`; the matrices have one row per
    /// interior node of the grid with ⌈1/h⌉ intervals (at least 3 rows).
    pub fn new(h: f64, params: &ModelParams) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(format!("h must be positive, got {h}")));
        }
        if !(params.mu_vis() > 0.0 && params.kappa > 0.0) {
            return Err(Error::InvalidInput(
                "mu1 + mu2 and kappa must be positive".into(),
            ));
        }
        let size = ((1.0 / h).ceil() as usize).clamp(4, 10_000) - 1;
        let a = approx_schur_matrix(size, h, &params.with_beta(0.0));
        let b = approx_schur_matrix(size, h, params);
        Ok(Self {
            h,
            nu: nu(params),
            is_a_m_matrix: is_m_matrix(&a),
            is_b_m_matrix: is_m_matrix(&b),
            a,
            b,
            h_critical: critical_h(params),
            beta_star: beta_star(h, params),
        })
    }
}
