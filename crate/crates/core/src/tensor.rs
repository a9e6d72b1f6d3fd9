//! Small dense tensors (d = 1 or 2) and the strain evolution law.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A d×d real tensor with d ∈ {1, 2}. Unused slots of the 2×2 storage are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor2 {
    dim: usize,
    a: [[f64; 2]; 2],
}

impl Tensor2 {
    pub fn new2(a: [[f64; 2]; 2]) -> Self {
        Self { dim: 2, a }
    }

    pub fn new1(a: f64) -> Self {
        Self {
            dim: 1,
            a: [[a, 0.0], [0.0, 0.0]],
        }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 1 || dim == 2, "tensor dimension must be 1 or 2");
        Self {
            dim,
            a: [[0.0; 2]; 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            t.a[i][i] = 1.0;
        }
        t
    }

    /// Symmetric tensor from the slot values (11, 12, 22).
    pub fn from_slots(e11: f64, e12: f64, e22: f64) -> Self {
        Self::new2([[e11, e12], [e12, e22]])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.dim && j < self.dim);
        self.a[i][j] = v;
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.a
    }

    pub fn transpose(&self) -> Self {
        let mut t = *self;
        t.a[0][1] = self.a[1][0];
        t.a[1][0] = self.a[0][1];
        t
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.a[i][i]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut t = *self;
        for row in t.a.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "tensor dimension mismatch");
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.a[i][j] = (0..self.dim).map(|k| self.a[i][k] * rhs.a[k][j]).sum();
            }
        }
        t
    }

    /// Frobenius norm, sqrt(A : A).
    pub fn norm(&self) -> f64 {
        tensor_dot(self, self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().flatten().all(|v| v.is_finite())
    }
}

impl Add for Tensor2 {
    type Output = Tensor2;
    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "tensor dimension mismatch");
        let mut t = self;
        for i in 0..2 {
            for j in 0..2 {
                t.a[i][j] += rhs.a[i][j];
            }
        }
        t
    }
}

impl Sub for Tensor2 {
    type Output = Tensor2;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Tensor2 {
    type Output = Tensor2;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Tensor2 {
    type Output = Tensor2;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

/// (A + Aᵀ)/2
pub fn sym(a: &Tensor2) -> Tensor2 {
    (*a + a.transpose()).scale(0.5)
}

/// (A − Aᵀ)/2
pub fn skw(a: &Tensor2) -> Tensor2 {
    (*a - a.transpose()).scale(0.5)
}

/// A : B = Σ A_ij B_ij
pub fn tensor_dot(a: &Tensor2, b: &Tensor2) -> f64 {
    assert_eq!(a.dim, b.dim, "tensor dimension mismatch");
    let mut s = 0.0;
    for i in 0..a.dim {
        for j in 0..a.dim {
            s += a.a[i][j] * b.a[i][j];
        }
    }
    s
}

/// Material rate of the strain for a growth tensor G = αε:
///
/// Dε/Dt = −[ε·skw(∇w) − skw(∇w)·ε + (tr ε − 1)·sym(∇w)] − αε
///
/// The input strain is not required to be symmetric, so the same law can be
/// used to follow the skew part of a perturbed strain.
pub fn strain_rhs(eps: &Tensor2, gradw: &Tensor2, alpha: f64) -> Result<Tensor2> {
    if !eps.is_finite() || !gradw.is_finite() || !alpha.is_finite() {
        return Err(Error::InvalidInput("strain_rhs: non-finite input".into()));
    }
    if eps.dim != gradw.dim {
        return Err(Error::InvalidInput(format!(
            "strain_rhs: dimension mismatch ({} vs {})",
            eps.dim, gradw.dim
        )));
    }
    let l = skw(gradw);
    let s = sym(gradw);
    let bracket = eps.matmul(&l) - l.matmul(eps) + s.scale(eps.trace() - 1.0);
    Ok(-bracket - eps.scale(alpha))
}
