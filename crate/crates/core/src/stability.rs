//! Linear stability of the 1D model about the rest state.
//!
//! After eliminating the pressure, each Fourier mode l of the velocity/strain
//! pair obeys `d/dt (ŵ, ε̂) + A_l (ŵ, ε̂) = 0` with a 2×2 complex symbol `A_l`.
//! The mode is stable when both eigenvalues of `A_l` have non-negative real
//! part.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Real parts above this count as non-negative.
pub const STABILITY_TOL: f64 = 1e-12;
/// Modes with |sin(πlh)| below this are degenerate.
const DEGENERATE_SIN: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeReport {
    pub l: usize,
    /// Grid size, 0 for the continuous model.
    pub h: f64,
    pub symbol: [[Complex64; 2]; 2],
    pub eig_real_parts: [f64; 2],
    /// ρ·det(A_l)
    pub criterion1: f64,
    /// ρ·tr(A_l)
    pub criterion2: f64,
    pub stable: bool,
}

impl ModeReport {
    fn from_symbol(l: usize, h: f64, symbol: [[Complex64; 2]; 2], c1: f64, c2: f64) -> Self {
        let eig_real_parts = eigen_real_parts(&symbol);
        let stable = eig_real_parts.iter().all(|&r| r >= -STABILITY_TOL);
        Self {
            l,
            h,
            symbol,
            eig_real_parts,
            criterion1: c1,
            criterion2: c2,
            stable,
        }
    }

    /// Whether the criterion signs alone predict stability.
    pub fn criteria_stable(&self) -> bool {
        self.criterion1 >= 0.0 && self.criterion2 >= 0.0
    }
}

/// Real parts of the eigenvalues of a 2×2 matrix whose trace and determinant
/// are real.
fn eigen_real_parts(a: &[[Complex64; 2]; 2]) -> [f64; 2] {
    let tr = (a[0][0] + a[1][1]).re;
    let det = (a[0][0] * a[1][1] - a[0][1] * a[1][0]).re;
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        return [0.5 * tr, 0.5 * tr];
    }
    let q = 0.5 * (tr + disc.sqrt().copysign(tr));
    if q == 0.0 {
        return [0.0, 0.0];
    }
    let (l1, l2) = (q, det / q);
    if l1 >= l2 {
        [l1, l2]
    } else {
        [l2, l1]
    }
}

/// Left-hand sides of the two continuous-model criteria and their joint sign.
pub fn continuous_criteria(l: usize, params: &ModelParams) -> (f64, f64, bool) {
    let k2 = 4.0 * PI * PI * (l * l) as f64;
    let c1 =
        k2 * (params.alpha * params.mu_vis() + params.e_modulus()) + params.alpha / params.kappa;
    let c2 = k2 * params.mu_vis() + 1.0 / params.kappa + params.alpha * params.rho;
    (c1, c2, c1 >= 0.0 && c2 >= 0.0)
}

/// Mode report of the continuous model (h = 0).
pub fn continuous_mode(l: usize, params: &ModelParams) -> Result<ModeReport> {
    if l == 0 {
        return Err(Error::InvalidInput(
            "mode index l must be at least 1".into(),
        ));
    }
    let (c1, c2, _) = continuous_criteria(l, params);
    let k = 2.0 * PI * l as f64;
    let rho = params.rho;
    let symbol = [
        [
            Complex64::new(
                k * k * params.mu_vis() / rho + 1.0 / (params.kappa * rho),
                0.0,
            ),
            Complex64::new(0.0, params.e_modulus() * k / rho),
        ],
        [Complex64::new(0.0, k), Complex64::new(params.alpha, 0.0)],
    ];
    Ok(ModeReport::from_symbol(l, 0.0, symbol, c1, c2))
}

/// Symbol of mode `l` on a uniform grid with `n` intervals.
pub fn semidiscrete_symbol(l: usize, n: usize, params: &ModelParams) -> Result<ModeReport> {
    if n < 2 || l == 0 || l >= n {
        return Err(Error::InvalidInput(format!(
            "mode index must satisfy 1 <= l < n, got l = {l}, n = {n}"
        )));
    }
    let h = 1.0 / n as f64;
    let theta = PI * l as f64 * h;
    let (s, c) = theta.sin_cos();
    if s.abs() < DEGENERATE_SIN {
        return Err(Error::DegenerateMode { l });
    }
    let s2 = (2.0 * theta).sin();
    let (rho, mv, e, kappa, alpha) = (
        params.rho,
        params.mu_vis(),
        params.e_modulus(),
        params.kappa,
        params.alpha,
    );
    let a11 = 4.0 * mv * s * s / (h * h * rho) + c * c / (kappa * rho);
    let symbol = [
        [
            Complex64::new(a11, 0.0),
            Complex64::new(0.0, e * s2 / (h * rho)),
        ],
        [Complex64::new(0.0, s2 / h), Complex64::new(alpha, 0.0)],
    ];
    let c1 = 4.0 * s * s / (h * h) * (mv * alpha + e * c * c) + alpha * c * c / kappa;
    let c2 = 4.0 * mv * s * s / (h * h) + c * c / kappa + alpha * rho;
    Ok(ModeReport::from_symbol(l, h, symbol, c1, c2))
}

/// Pressure amplitude per unit velocity amplitude of mode `l`: p̂ = f·ŵ.
pub fn pressure_amplitude_factor(l: usize, n: usize, kappa: f64) -> Result<Complex64> {
    let h = 1.0 / n as f64;
    let theta = PI * l as f64 * h;
    if theta.sin().abs() < DEGENERATE_SIN {
        return Err(Error::DegenerateMode { l });
    }
    Ok(Complex64::new(0.0, h / (2.0 * kappa) / theta.tan()))
}

/// Reports for every mode 1..n−1 of an n-interval grid.
pub fn semidiscrete_sweep(n: usize, params: &ModelParams) -> Result<Vec<ModeReport>> {
    (1..n).map(|l| semidiscrete_symbol(l, n, params)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyRow {
    pub h: f64,
    /// 4 sin²(πlh) / h²
    pub discrete: f64,
    /// 4π²l²
    pub continuous: f64,
    pub relative_gap: f64,
}

/// Compares the discrete and continuous wavenumber factors for decreasing h.
pub fn consistency_check(l: usize, h_list: &[f64]) -> Result<Vec<ConsistencyRow>> {
    if l == 0 {
        return Err(Error::InvalidInput(
            "mode index l must be at least 1".into(),
        ));
    }
    let limit = 1.0 / (2.0 * l as f64);
    for (k, &h) in h_list.iter().enumerate() {
        if !(h > 0.0 && h < limit) {
            return Err(Error::InvalidInput(format!("h = {h} outside (0, {limit})")));
        }
        if k > 0 && h >= h_list[k - 1] {
            return Err(Error::InvalidInput(
                "h_list must be strictly decreasing".into(),
            ));
        }
    }
    let continuous = 4.0 * PI * PI * (l * l) as f64;
    Ok(h_list
        .iter()
        .map(|&h| {
            let s = (PI * l as f64 * h).sin();
            let discrete = 4.0 * s * s / (h * h);
            ConsistencyRow {
                h,
                discrete,
                continuous,
                relative_gap: (discrete - continuous).abs() / continuous,
            }
        })
        .collect())
}
