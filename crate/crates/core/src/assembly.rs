//! Finite-element operators for the velocity/strain/pressure system.
//!
//! All fields use continuous piecewise-linear nodal bases. Vector and tensor
//! fields are stacked component-major: velocity as `[w1 (nv), w2 (nv)]`,
//! strain as `[ε11, ε12, ε22]` (2D) or `[ε11]` (1D), each block `nv` long.

use crate::linsolve::LinearSystem;
use crate::mesh::{BoundaryTag, Mesh};
use crate::sources::Sources;
use crate::tensor::Tensor2;

pub use crate::params::ModelParams;
pub use crate::sparse::{SparseMatrix, TripletBuilder};

/// Symmetric strain slots (a, b) stored per node.
pub fn strain_slots(dim: usize) -> &'static [(usize, usize)] {
    match dim {
        1 => &[(0, 0)],
        _ => &[(0, 0), (0, 1), (1, 1)],
    }
}

/// Offsets of the unknown blocks in the monolithic vector `[w, ε, p]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub dim: usize,
    pub n_vertices: usize,
}

impl DofLayout {
    pub fn new(mesh: &Mesh) -> Self {
        Self {
            dim: mesh.dim(),
            n_vertices: mesh.n_vertices(),
        }
    }

    pub fn n_slots(&self) -> usize {
        strain_slots(self.dim).len()
    }

    pub fn n_w(&self) -> usize {
        self.dim * self.n_vertices
    }

    pub fn n_eps(&self) -> usize {
        self.n_slots() * self.n_vertices
    }

    pub fn n_p(&self) -> usize {
        self.n_vertices
    }

    pub fn total(&self) -> usize {
        self.n_w() + self.n_eps() + self.n_p()
    }

    pub fn eps_offset(&self) -> usize {
        self.n_w()
    }

    pub fn p_offset(&self) -> usize {
        self.n_w() + self.n_eps()
    }

    pub fn w_dof(&self, component: usize, node: usize) -> usize {
        component * self.n_vertices + node
    }

    pub fn eps_dof(&self, slot: usize, node: usize) -> usize {
        self.eps_offset() + slot * self.n_vertices + node
    }

    pub fn p_dof(&self, node: usize) -> usize {
        self.p_offset() + node
    }

    /// Splits a monolithic vector into (w, ε, p) views.
    pub fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64]) {
        let (w, rest) = x.split_at(self.n_w());
        let (eps, p) = rest.split_at(self.n_eps());
        (w, eps, p)
    }
}

/// Measure and constant basis gradients of one simplex.
#[derive(Debug, Clone, Copy)]
struct ElementGeom {
    nodes: [usize; 3],
    n_nodes: usize,
    measure: f64,
    grads: [[f64; 2]; 3],
}

impl ElementGeom {
    fn new(mesh: &Mesh, e: usize) -> Self {
        let el = mesh.element(e);
        let v = mesh.vertices();
        match mesh.dim() {
            1 => {
                let len = v[el[1]][0] - v[el[0]][0];
                Self {
                    nodes: [el[0], el[1], usize::MAX],
                    n_nodes: 2,
                    measure: len.abs(),
                    grads: [[-1.0 / len, 0.0], [1.0 / len, 0.0], [0.0; 2]],
                }
            }
            _ => {
                let p = [v[el[0]], v[el[1]], v[el[2]]];
                let two_a = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                    - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
                let mut grads = [[0.0; 2]; 3];
                for (i, g) in grads.iter_mut().enumerate() {
                    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                    *g = [(p[j][1] - p[k][1]) / two_a, (p[k][0] - p[j][0]) / two_a];
                }
                Self {
                    nodes: [el[0], el[1], el[2]],
                    n_nodes: 3,
                    measure: 0.5 * two_a.abs(),
                    grads,
                }
            }
        }
    }

    fn nodes(&self) -> &[usize] {
        &self.nodes[..self.n_nodes]
    }

    /// Exact ∫φ_a φ_b over the element.
    fn mass(&self, a: usize, b: usize) -> f64 {
        let k = self.n_nodes as f64;
        let base = self.measure / (k * (k + 1.0));
        if a == b {
            2.0 * base
        } else {
            base
        }
    }

    /// ∫φ_a over the element.
    fn basis_integral(&self) -> f64 {
        self.measure / self.n_nodes as f64
    }

    /// Constant gradient of a P1 field restricted to this element,
    /// `g[c][k] = ∂_k u_c`, from a component-major nodal vector.
    fn field_gradient(&self, u: &[f64], dim: usize, nv: usize) -> [[f64; 2]; 2] {
        let mut g = [[0.0; 2]; 2];
        for (a, &node) in self.nodes().iter().enumerate() {
            for (c, row) in g.iter_mut().enumerate().take(dim) {
                let val = u[c * nv + node];
                for (k, gk) in row.iter_mut().enumerate().take(dim) {
                    *gk += val * self.grads[a][k];
                }
            }
        }
        g
    }

    /// Quadrature points (physical coordinates), basis values and weights,
    /// exact for quadratics.
    fn quadrature(&self, mesh: &Mesh) -> Vec<([f64; 2], [f64; 3], f64)> {
        let v = mesh.vertices();
        match self.n_nodes {
            2 => {
                let (x0, x1) = (v[self.nodes[0]], v[self.nodes[1]]);
                gauss2()
                    .iter()
                    .map(|&(s, wt)| {
                        let x = [x0[0] + s * (x1[0] - x0[0]), 0.0];
                        (x, [1.0 - s, s, 0.0], wt * self.measure)
                    })
                    .collect()
            }
            _ => (0..3)
                .map(|i| {
                    let (a, b) = (self.nodes[i], self.nodes[(i + 1) % 3]);
                    let x = [0.5 * (v[a][0] + v[b][0]), 0.5 * (v[a][1] + v[b][1])];
                    let mut phi = [0.0; 3];
                    phi[i] = 0.5;
                    phi[(i + 1) % 3] = 0.5;
                    (x, phi, self.measure / 3.0)
                })
                .collect(),
        }
    }
}

/// Two-point Gauss rule on [0, 1]: (abscissa, weight).
fn gauss2() -> [(f64, f64); 2] {
    let d = 0.5 / 3f64.sqrt();
    [(0.5 - d, 0.5), (0.5 + d, 0.5)]
}

fn geoms(mesh: &Mesh) -> impl Iterator<Item = ElementGeom> + '_ {
    (0..mesh.n_elements()).map(move |e| ElementGeom::new(mesh, e))
}

/// Consistent mass matrix, block-diagonal over `n_components` copies.
pub fn assemble_mass(mesh: &Mesh, n_components: usize) -> SparseMatrix {
    let nv = mesh.n_vertices();
    let mut b = TripletBuilder::with_capacity(nv, nv, 9 * mesh.n_elements());
    for g in geoms(mesh) {
        for (a, &i) in g.nodes().iter().enumerate() {
            for (c, &j) in g.nodes().iter().enumerate() {
                b.add(i, j, g.mass(a, c));
            }
        }
    }
    let m = b.build();
    if n_components == 1 {
        m
    } else {
        m.block_diag(n_components)
    }
}

/// Stiffness matrix of ∫∇ψ_j·∇ψ_i.
pub fn assemble_laplace(mesh: &Mesh) -> SparseMatrix {
    let nv = mesh.n_vertices();
    let mut b = TripletBuilder::with_capacity(nv, nv, 9 * mesh.n_elements());
    for g in geoms(mesh) {
        for (a, &i) in g.nodes().iter().enumerate() {
            for (c, &j) in g.nodes().iter().enumerate() {
                let dot = g.grads[a][0] * g.grads[c][0] + g.grads[a][1] * g.grads[c][1];
                b.add(i, j, g.measure * dot);
            }
        }
    }
    b.build()
}

/// D with `(D w)_i = ∫ψ_i ∇·w`; shape nv × d·nv.
pub fn assemble_divergence(mesh: &Mesh) -> SparseMatrix {
    let (nv, d) = (mesh.n_vertices(), mesh.dim());
    let mut b = TripletBuilder::with_capacity(nv, d * nv, 9 * d * mesh.n_elements());
    for g in geoms(mesh) {
        let wt = g.basis_integral();
        for &i in g.nodes() {
            for (a, &j) in g.nodes().iter().enumerate() {
                for c in 0..d {
                    b.add(i, c * nv + j, wt * g.grads[a][c]);
                }
            }
        }
    }
    b.build()
}

/// σ_el(E_s) for the unit strain of slot `s`; off-diagonal slots fill both entries.
fn elastic_stress_of_slot(dim: usize, slot: (usize, usize), params: &ModelParams) -> [[f64; 2]; 2] {
    let mut e = [[0.0; 2]; 2];
    e[slot.0][slot.1] = 1.0;
    e[slot.1][slot.0] = 1.0;
    let tr = if slot.0 == slot.1 { 1.0 } else { 0.0 };
    let mut s = [[0.0; 2]; 2];
    for a in 0..dim {
        for b in 0..dim {
            s[a][b] = 2.0 * params.mu * e[a][b] + if a == b { params.lambda * tr } else { 0.0 };
        }
    }
    s
}

/// S_el with `(S_el ε)_(c,i) = ∫σ_el(ε):sym(∇(φ_i e_c))`; shape d·nv × ns·nv.
pub fn assemble_elastic(mesh: &Mesh, params: &ModelParams) -> SparseMatrix {
    let (nv, d) = (mesh.n_vertices(), mesh.dim());
    let slots = strain_slots(d);
    let stresses: Vec<[[f64; 2]; 2]> = slots
        .iter()
        .map(|&s| elastic_stress_of_slot(d, s, params))
        .collect();
    let mut b = TripletBuilder::with_capacity(
        d * nv,
        slots.len() * nv,
        9 * d * slots.len() * mesh.n_elements(),
    );
    for g in geoms(mesh) {
        let wt = g.basis_integral();
        for (a, &i) in g.nodes().iter().enumerate() {
            for c in 0..d {
                for (s, sig) in stresses.iter().enumerate() {
                    let v: f64 = (0..d).map(|k| sig[c][k] * g.grads[a][k]).sum();
                    if v == 0.0 {
                        continue;
                    }
                    for &j in g.nodes() {
                        b.add(c * nv + i, s * nv + j, wt * v);
                    }
                }
            }
        }
    }
    b.build()
}

/// S_vis with `(S_vis w)_(c,i) = ∫σ_vis(w):sym(∇(φ_i e_c))`; shape d·nv × d·nv.
pub fn assemble_viscous(mesh: &Mesh, params: &ModelParams) -> SparseMatrix {
    let (nv, d) = (mesh.n_vertices(), mesh.dim());
    let mut b = TripletBuilder::with_capacity(d * nv, d * nv, 9 * d * d * mesh.n_elements());
    for g in geoms(mesh) {
        for (a, &i) in g.nodes().iter().enumerate() {
            for (bb, &j) in g.nodes().iter().enumerate() {
                let (gi, gj) = (g.grads[a], g.grads[bb]);
                let dot: f64 = (0..d).map(|k| gi[k] * gj[k]).sum();
                for c in 0..d {
                    for e in 0..d {
                        let delta = if c == e { dot } else { 0.0 };
                        let v =
                            params.mu1 * 0.5 * (delta + gj[c] * gi[e]) + params.mu2 * gj[e] * gi[c];
                        b.add(c * nv + i, e * nv + j, g.measure * v);
                    }
                }
            }
        }
    }
    b.build()
}

/// B with `(B w)_(s,i) = ∫sym(∇w)_s ζ_i`; shape ns·nv × d·nv.
pub fn assemble_strain_coupling(mesh: &Mesh) -> SparseMatrix {
    let (nv, d) = (mesh.n_vertices(), mesh.dim());
    let slots = strain_slots(d);
    let mut b = TripletBuilder::with_capacity(
        slots.len() * nv,
        d * nv,
        9 * d * slots.len() * mesh.n_elements(),
    );
    for g in geoms(mesh) {
        let wt = g.basis_integral();
        for &i in g.nodes() {
            for (s, &(p, q)) in slots.iter().enumerate() {
                for (a, &j) in g.nodes().iter().enumerate() {
                    for c in 0..d {
                        let mut v = 0.0;
                        if p == c {
                            v += 0.5 * g.grads[a][q];
                        }
                        if q == c {
                            v += 0.5 * g.grads[a][p];
                        }
                        if v != 0.0 {
                            b.add(s * nv + i, c * nv + j, wt * v);
                        }
                    }
                }
            }
        }
    }
    b.build()
}

/// Pointwise nonlinear strain brackets for slots (11, 12, 22), given
/// `e = (ε11, ε12, ε22)` and `g[c][k] = ∂_k w_c`.
pub fn strain_brackets(e: [f64; 3], g: [[f64; 2]; 2]) -> [f64; 3] {
    let (w1x, w1y, w2x, w2y) = (g[0][0], g[0][1], g[1][0], g[1][1]);
    [
        -e[0] * w2y + e[1] * (w2x - w1y) + e[2] * w1x,
        e[0] * w1y - e[1] * (w1x + w2y) + e[2] * w2x,
        e[0] * w2y - e[1] * (w2x - w1y) - e[2] * w1x,
    ]
}

/// Galerkin load N(w, ε) of the terms bilinear in (w, ε), integrated exactly.
/// In 1D this is ∫ε ∂ₓw ζ.
pub fn assemble_strain_nonlinear(mesh: &Mesh, w: &[f64], eps: &[f64]) -> Vec<f64> {
    let (nv, d) = (mesh.n_vertices(), mesh.dim());
    let ns = strain_slots(d).len();
    assert_eq!(w.len(), d * nv, "velocity vector length");
    assert_eq!(eps.len(), ns * nv, "strain vector length");
    let mut out = vec![0.0; ns * nv];
    for g in geoms(mesh) {
        let grad = g.field_gradient(w, d, nv);
        for (a, &i) in g.nodes().iter().enumerate() {
            for (bb, &j) in g.nodes().iter().enumerate() {
                let m = g.mass(a, bb);
                if d == 1 {
                    out[i] += m * eps[j] * grad[0][0];
                } else {
                    let e = [eps[j], eps[nv + j], eps[2 * nv + j]];
                    let br = strain_brackets(e, grad);
                    for s in 0..3 {
                        out[s * nv + i] += m * br[s];
                    }
                }
            }
        }
    }
    out
}

/// Load vectors (b_w, b_p): body force and Γ₂ traction minus ambient
/// pressure for the velocity, fluid source minus Γ₁ flux for the pressure.
pub fn assemble_loads(
    mesh: &Mesh,
    params: &ModelParams,
    t: f64,
    sources: &dyn Sources,
) -> (Vec<f64>, Vec<f64>) {
    let (nv, d) = (mesh.n_vertices(), mesh.dim());
    let mut bw = vec![0.0; d * nv];
    let mut bp = vec![0.0; nv];
    for g in geoms(mesh) {
        for (x, phi, wt) in g.quadrature(mesh) {
            let f = sources.body_force(t, x);
            let fp = sources.fluid_source(t, x);
            for (a, &i) in g.nodes().iter().enumerate() {
                for c in 0..d {
                    bw[c * nv + i] += wt * f[c] * phi[a];
                }
                bp[i] += wt * fp * phi[a];
            }
        }
    }
    let v = mesh.vertices();
    for facet in mesh.boundary() {
        let (n, len) = mesh.facet_normal(facet);
        // (point, basis values on the facet's two node slots, weight)
        let points: Vec<([f64; 2], [f64; 2], f64)> = if d == 1 {
            vec![(v[facet.nodes[0]], [1.0, 0.0], 1.0)]
        } else {
            let (a, b) = (v[facet.nodes[0]], v[facet.nodes[1]]);
            gauss2()
                .iter()
                .map(|&(s, wt)| {
                    let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                    (x, [1.0 - s, s], wt * len)
                })
                .collect()
        };
        for (x, phi, wt) in points {
            match facet.tag {
                BoundaryTag::Gamma2 => {
                    let fb = sources.traction(t, x);
                    for (k, &i) in facet.nodes.iter().enumerate() {
                        for c in 0..d {
                            bw[c * nv + i] += wt * (fb[c] - params.p0 * n[c]) * phi[k];
                        }
                    }
                }
                BoundaryTag::Gamma1 => {
                    let gn = sources.boundary_flux(t, x);
                    for (k, &i) in facet.nodes.iter().enumerate() {
                        bp[i] -= wt * gn * phi[k];
                    }
                }
            }
        }
    }
    (bw, bp)
}

/// Prescribed values on a set of degrees of freedom, imposed by row
/// replacement and column elimination.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraints {
    values: Vec<Option<f64>>,
}

impl Constraints {
    /// Velocity pinned to zero on Γ₁ nodes, pressure pinned to p₀ on Γ₂ nodes.
    pub fn essential(mesh: &Mesh, params: &ModelParams) -> Self {
        let layout = DofLayout::new(mesh);
        let mut values = vec![None; layout.total()];
        for i in mesh.tagged_vertices(BoundaryTag::Gamma1) {
            for c in 0..layout.dim {
                values[layout.w_dof(c, i)] = Some(0.0);
            }
        }
        for i in mesh.tagged_vertices(BoundaryTag::Gamma2) {
            values[layout.p_dof(i)] = Some(params.p0);
        }
        Self { values }
    }

    pub fn from_values(values: Vec<Option<f64>>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, dof: usize) -> Option<f64> {
        self.values[dof]
    }

    pub fn constrained_dofs(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i, v)))
    }

    /// Constrained matrix and the lifting vector `A·g` of the prescribed values.
    pub fn apply_matrix(&self, a: &SparseMatrix) -> (SparseMatrix, Vec<f64>) {
        assert_eq!(a.nrows(), self.values.len(), "constraint size mismatch");
        let g: Vec<f64> = self.values.iter().map(|v| v.unwrap_or(0.0)).collect();
        let lift = a.mul_vec(&g);
        let mut b = TripletBuilder::with_capacity(a.nrows(), a.ncols(), a.nnz());
        for (i, j, v) in a.triplets() {
            if self.values[i].is_none() && self.values[j].is_none() {
                b.add(i, j, v);
            }
        }
        for (i, _) in self.constrained_dofs() {
            b.add(i, i, 1.0);
        }
        (b.build(), lift)
    }

    /// Right-hand side matching `apply_matrix`.
    pub fn apply_rhs(&self, rhs: &[f64], lift: &[f64]) -> Vec<f64> {
        rhs.iter()
            .zip(lift)
            .zip(&self.values)
            .map(|((r, l), v)| v.unwrap_or(r - l))
            .collect()
    }
}

/// Imposes w = 0 on Γ₁ and p = p₀ on Γ₂ on a monolithic system.
pub fn apply_essential_bcs(
    system: LinearSystem,
    mesh: &Mesh,
    params: &ModelParams,
) -> LinearSystem {
    let c = Constraints::essential(mesh, params);
    let (matrix, lift) = c.apply_matrix(&system.matrix);
    let rhs = c.apply_rhs(&system.rhs, &lift);
    LinearSystem { matrix, rhs }
}

/// Element gradient `∂_k w_c` of a component-major P1 velocity on element `e`.
pub fn element_gradient(mesh: &Mesh, e: usize, w: &[f64]) -> Tensor2 {
    let g = ElementGeom::new(mesh, e).field_gradient(w, mesh.dim(), mesh.n_vertices());
    match mesh.dim() {
        1 => Tensor2::new1(g[0][0]),
        _ => Tensor2::new2(g),
    }
}

/// Measure-weighted average of element gradients at each node.
pub fn recover_nodal_gradients(mesh: &Mesh, w: &[f64]) -> Vec<Tensor2> {
    let (nv, d) = (mesh.n_vertices(), mesh.dim());
    let mut acc = vec![[[0.0; 2]; 2]; nv];
    let mut weight = vec![0.0; nv];
    for g in geoms(mesh) {
        let grad = g.field_gradient(w, d, nv);
        for &i in g.nodes() {
            weight[i] += g.measure;
            for c in 0..2 {
                for k in 0..2 {
                    acc[i][c][k] += g.measure * grad[c][k];
                }
            }
        }
    }
    acc.into_iter()
        .zip(weight)
        .map(|(a, wsum)| {
            let m = a.map(|row| row.map(|v| v / wsum));
            match d {
                1 => Tensor2::new1(m[0][0]),
                _ => Tensor2::new2(m),
            }
        })
        .collect()
}
