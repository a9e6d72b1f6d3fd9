//! Independent element-by-element oracles shared by the integration tests.
//!
//! Each P1 basis comes from a Vandermonde solve, integrals use a six-point
//! degree-4 triangle rule (three-point Gauss on segments), and tensors are
//! handled as full 2×2 arrays instead of the symmetric slot encoding.

#![allow(dead_code)]

use morphoporo_core::{Mesh, ModelParams, Sources, SparseMatrix};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

/// Degree-4 rule: (barycentric point, weight fraction of the area).
fn dunavant4() -> Vec<([f64; 3], f64)> {
    let (a, wa) = (0.445_948_490_915_965, 0.223_381_589_678_011);
    let (b, wb) = (0.091_576_213_509_771, 0.109_951_743_655_322);
    let mut out = Vec::new();
    for (p, w) in [(a, wa), (b, wb)] {
        let q = 1.0 - 2.0 * p;
        out.push(([q, p, p], w));
        out.push(([p, q, p], w));
        out.push(([p, p, q], w));
    }
    out
}

/// Three-point Gauss rule on [0, 1].
pub fn gauss3() -> [(f64, f64); 3] {
    let d = 0.5 * 0.6f64.sqrt();
    [
        (0.5 - d, 5.0 / 18.0),
        (0.5, 8.0 / 18.0),
        (0.5 + d, 5.0 / 18.0),
    ]
}

struct Tri {
    nodes: [usize; 3],
    area: f64,
    /// φ_a(x, y) = c[a][0] + c[a][1] x + c[a][2] y
    c: [[f64; 3]; 3],
    x: [[f64; 2]; 3],
}

impl Tri {
    fn new(mesh: &Mesh, e: usize) -> Self {
        let el = mesh.element(e);
        let v = mesh.vertices();
        let x = [v[el[0]], v[el[1]], v[el[2]]];
        let vander = Matrix3::from_fn(|r, k| if k == 0 { 1.0 } else { x[r][k - 1] });
        let inv = vander.try_inverse().expect("non-degenerate triangle");
        let mut c = [[0.0; 3]; 3];
        for (a, ca) in c.iter_mut().enumerate() {
            let coef: Vector3<f64> = inv * Vector3::from_fn(|r, _| if r == a { 1.0 } else { 0.0 });
            *ca = [coef[0], coef[1], coef[2]];
        }
        Self {
            nodes: [el[0], el[1], el[2]],
            area: 0.5 * vander.determinant().abs(),
            c,
            x,
        }
    }

    fn phi(&self, a: usize, p: [f64; 2]) -> f64 {
        self.c[a][0] + self.c[a][1] * p[0] + self.c[a][2] * p[1]
    }

    fn grad(&self, a: usize) -> [f64; 2] {
        [self.c[a][1], self.c[a][2]]
    }

    fn points(&self) -> Vec<([f64; 2], f64)> {
        dunavant4()
            .into_iter()
            .map(|(l, w)| {
                let p = [
                    l[0] * self.x[0][0] + l[1] * self.x[1][0] + l[2] * self.x[2][0],
                    l[0] * self.x[0][1] + l[1] * self.x[1][1] + l[2] * self.x[2][1],
                ];
                (p, w * self.area)
            })
            .collect()
    }
}

fn tris(mesh: &Mesh) -> Vec<Tri> {
    assert_eq!(mesh.dim(), 2, "oracles are for triangle meshes");
    (0..mesh.n_elements()).map(|e| Tri::new(mesh, e)).collect()
}

/// Unit strain of slot s (11, 12, 22); slot 12 sets both off-diagonals.
fn slot_tensor(s: usize) -> [[f64; 2]; 2] {
    match s {
        0 => [[1.0, 0.0], [0.0, 0.0]],
        1 => [[0.0, 1.0], [1.0, 0.0]],
        _ => [[0.0, 0.0], [0.0, 1.0]],
    }
}

fn contract(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> f64 {
    (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| a[i][j] * b[i][j])
        .sum()
}

/// sym(∇(φ e_c)) for a basis gradient g.
fn sym_grad(c: usize, g: [f64; 2]) -> [[f64; 2]; 2] {
    let mut t = [[0.0; 2]; 2];
    for k in 0..2 {
        t[c][k] += 0.5 * g[k];
        t[k][c] += 0.5 * g[k];
    }
    t
}

pub fn mass(mesh: &Mesh) -> DMatrix<f64> {
    let nv = mesh.n_vertices();
    let mut m = DMatrix::zeros(nv, nv);
    for t in tris(mesh) {
        for (p, w) in t.points() {
            for a in 0..3 {
                for b in 0..3 {
                    m[(t.nodes[a], t.nodes[b])] += w * t.phi(a, p) * t.phi(b, p);
                }
            }
        }
    }
    m
}

pub fn laplace(mesh: &Mesh) -> DMatrix<f64> {
    let nv = mesh.n_vertices();
    let mut l = DMatrix::zeros(nv, nv);
    for t in tris(mesh) {
        for (_, w) in t.points() {
            for a in 0..3 {
                for b in 0..3 {
                    let (ga, gb) = (t.grad(a), t.grad(b));
                    l[(t.nodes[a], t.nodes[b])] += w * (ga[0] * gb[0] + ga[1] * gb[1]);
                }
            }
        }
    }
    l
}

pub fn divergence(mesh: &Mesh) -> DMatrix<f64> {
    let nv = mesh.n_vertices();
    let mut d = DMatrix::zeros(nv, 2 * nv);
    for t in tris(mesh) {
        for (p, w) in t.points() {
            for a in 0..3 {
                for b in 0..3 {
                    for c in 0..2 {
                        d[(t.nodes[a], c * nv + t.nodes[b])] += w * t.phi(a, p) * t.grad(b)[c];
                    }
                }
            }
        }
    }
    d
}

pub fn elastic(mesh: &Mesh, params: &ModelParams) -> DMatrix<f64> {
    let nv = mesh.n_vertices();
    let mut s_el = DMatrix::zeros(2 * nv, 3 * nv);
    for t in tris(mesh) {
        for (p, w) in t.points() {
            for a in 0..3 {
                for c in 0..2 {
                    let test = sym_grad(c, t.grad(a));
                    for b in 0..3 {
                        for s in 0..3 {
                            let e = slot_tensor(s).map(|r| r.map(|v| v * t.phi(b, p)));
                            let tr = e[0][0] + e[1][1];
                            let mut sig = e.map(|r| r.map(|v| 2.0 * params.mu * v));
                            sig[0][0] += params.lambda * tr;
                            sig[1][1] += params.lambda * tr;
                            s_el[(c * nv + t.nodes[a], s * nv + t.nodes[b])] +=
                                w * contract(&sig, &test);
                        }
                    }
                }
            }
        }
    }
    s_el
}

pub fn viscous(mesh: &Mesh, params: &ModelParams) -> DMatrix<f64> {
    let nv = mesh.n_vertices();
    let mut s_vis = DMatrix::zeros(2 * nv, 2 * nv);
    for t in tris(mesh) {
        for (_, w) in t.points() {
            for a in 0..3 {
                for c in 0..2 {
                    let test = sym_grad(c, t.grad(a));
                    for b in 0..3 {
                        for d in 0..2 {
                            let sym = sym_grad(d, t.grad(b));
                            let tr = sym[0][0] + sym[1][1];
                            let mut sig = sym.map(|r| r.map(|v| params.mu1 * v));
                            sig[0][0] += params.mu2 * tr;
                            sig[1][1] += params.mu2 * tr;
                            s_vis[(c * nv + t.nodes[a], d * nv + t.nodes[b])] +=
                                w * contract(&sig, &test);
                        }
                    }
                }
            }
        }
    }
    s_vis
}

pub fn strain_coupling(mesh: &Mesh) -> DMatrix<f64> {
    let nv = mesh.n_vertices();
    let mut b = DMatrix::zeros(3 * nv, 2 * nv);
    for t in tris(mesh) {
        for (p, w) in t.points() {
            for a in 0..3 {
                for bn in 0..3 {
                    let g = t.grad(bn);
                    let z = w * t.phi(a, p);
                    let (i, j) = (t.nodes[a], t.nodes[bn]);
                    // ∂w¹/∂x, ½(∂w¹/∂y + ∂w²/∂x), ∂w²/∂y
                    b[(i, j)] += z * g[0];
                    b[(nv + i, j)] += z * 0.5 * g[1];
                    b[(nv + i, nv + j)] += z * 0.5 * g[0];
                    b[(2 * nv + i, nv + j)] += z * g[1];
                }
            }
        }
    }
    b
}

pub fn strain_nonlinear(mesh: &Mesh, w: &[f64], eps: &[f64]) -> DVector<f64> {
    let nv = mesh.n_vertices();
    let mut n = DVector::zeros(3 * nv);
    for t in tris(mesh) {
        let mut g = [[0.0; 2]; 2];
        for a in 0..3 {
            for c in 0..2 {
                for k in 0..2 {
                    g[c][k] += w[c * nv + t.nodes[a]] * t.grad(a)[k];
                }
            }
        }
        let (w1x, w1y, w2x, w2y) = (g[0][0], g[0][1], g[1][0], g[1][1]);
        for (p, wt) in t.points() {
            let e: Vec<f64> = (0..3)
                .map(|s| (0..3).map(|a| eps[s * nv + t.nodes[a]] * t.phi(a, p)).sum())
                .collect();
            let br = [
                -e[0] * w2y + e[1] * (w2x - w1y) + e[2] * w1x,
                e[0] * w1y - e[1] * (w1x + w2y) + e[2] * w2x,
                e[0] * w2y - e[1] * (w2x - w1y) - e[2] * w1x,
            ];
            for a in 0..3 {
                for (s, b) in br.iter().enumerate() {
                    n[s * nv + t.nodes[a]] += wt * t.phi(a, p) * b;
                }
            }
        }
    }
    n
}

/// Load vectors on a unit-square mesh; Γ₁ is the side x = 0.
pub fn loads(
    mesh: &Mesh,
    params: &ModelParams,
    t: f64,
    src: &dyn Sources,
) -> (DVector<f64>, DVector<f64>) {
    let nv = mesh.n_vertices();
    let mut bw = DVector::zeros(2 * nv);
    let mut bp = DVector::zeros(nv);
    for tri in tris(mesh) {
        for (p, w) in tri.points() {
            let f = src.body_force(t, p);
            for a in 0..3 {
                let phi = tri.phi(a, p);
                bw[tri.nodes[a]] += w * f[0] * phi;
                bw[nv + tri.nodes[a]] += w * f[1] * phi;
                bp[tri.nodes[a]] += w * src.fluid_source(t, p) * phi;
            }
        }
    }
    let v = mesh.vertices();
    type Side = (fn([f64; 2]) -> bool, [f64; 2]);
    let sides: [Side; 4] = [
        (|x| x[0] == 0.0, [-1.0, 0.0]),
        (|x| x[0] == 1.0, [1.0, 0.0]),
        (|x| x[1] == 0.0, [0.0, -1.0]),
        (|x| x[1] == 1.0, [0.0, 1.0]),
    ];
    let spacing = mesh.lattice().expect("structured mesh").dx;
    for (side, (on, normal)) in sides.iter().enumerate() {
        let nodes: Vec<usize> = (0..nv).filter(|&i| on(v[i])).collect();
        for &a in &nodes {
            for &b in &nodes {
                let (pa, pb) = (v[a], v[b]);
                let len = (pa[0] - pb[0]).hypot(pa[1] - pb[1]);
                if a >= b || (len - spacing).abs() > 1e-12 {
                    continue;
                }
                for (s, wt) in gauss3() {
                    let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                    for (node, phi) in [(a, 1.0 - s), (b, s)] {
                        let w = wt * len * phi;
                        if side == 0 {
                            bp[node] -= w * src.boundary_flux(t, x);
                        } else {
                            let fb = src.traction(t, x);
                            bw[node] += w * (fb[0] - params.p0 * normal[0]);
                            bw[nv + node] += w * (fb[1] - params.p0 * normal[1]);
                        }
                    }
                }
            }
        }
    }
    (bw, bp)
}

/// max |got − want| / max |want|
pub fn rel_error_matrix(got: &SparseMatrix, want: &DMatrix<f64>) -> f64 {
    assert_eq!((got.nrows(), got.ncols()), want.shape(), "shape mismatch");
    let got = got.to_dense();
    let mut err: f64 = 0.0;
    for i in 0..want.nrows() {
        for j in 0..want.ncols() {
            err = err.max((got[i][j] - want[(i, j)]).abs());
        }
    }
    err / want.amax()
}

pub fn rel_error_vec(got: &[f64], want: &DVector<f64>) -> f64 {
    assert_eq!(got.len(), want.len(), "length mismatch");
    let err = got
        .iter()
        .zip(want.iter())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    err / want.amax().max(f64::MIN_POSITIVE)
}

/// Smooth 1D forcing that keeps every quadrature rule involved exact.
pub struct Push1d;

impl Sources for Push1d {
    fn body_force(&self, t: f64, x: [f64; 2]) -> [f64; 2] {
        [(1.0 + t) * x[0] * (1.0 - x[0]), 0.0]
    }
    fn fluid_source(&self, _t: f64, x: [f64; 2]) -> f64 {
        0.5 - x[0]
    }
}

/// Backward-Euler step of the 1D system on an n-element grid, solved by
/// Newton's method on the fully coupled nonlinear residual. Returns the
/// stacked (w, ε, p) at the new time.
pub fn newton_step_1d(
    n: usize,
    params: &ModelParams,
    w0: &[f64],
    e0: &[f64],
    p0v: &[f64],
    t_new: f64,
) -> Vec<f64> {
    let nv = n + 1;
    let h = 1.0 / n as f64;
    let mut m = DMatrix::zeros(nv, nv);
    let mut l = DMatrix::zeros(nv, nv);
    // d[(i, j)] = ∫ψ_i φ_j'
    let mut d = DMatrix::zeros(nv, nv);
    let mut bw = DVector::zeros(nv);
    let mut bp = DVector::zeros(nv);
    // tri[i][j][k] = ∫ζ_i φ_j φ_k'
    let mut tri = vec![vec![vec![0.0; nv]; nv]; nv];
    let src = Push1d;
    for e in 0..n {
        let nodes = [e, e + 1];
        let grads = [-1.0 / h, 1.0 / h];
        for (s, wt) in gauss3() {
            let x = (e as f64 + s) * h;
            let phi = [1.0 - s, s];
            let w = wt * h;
            for a in 0..2 {
                bw[nodes[a]] += w * src.body_force(t_new, [x, 0.0])[0] * phi[a];
                bp[nodes[a]] += w * src.fluid_source(t_new, [x, 0.0]) * phi[a];
                for b in 0..2 {
                    m[(nodes[a], nodes[b])] += w * phi[a] * phi[b];
                    l[(nodes[a], nodes[b])] += w * grads[a] * grads[b];
                    d[(nodes[a], nodes[b])] += w * phi[a] * grads[b];
                    for c in 0..2 {
                        tri[nodes[a]][nodes[b]][nodes[c]] += w * phi[a] * phi[b] * grads[c];
                    }
                }
            }
        }
    }
    // ambient pressure acting on the x = 1 end
    bw[n] -= params.p0;
    let (dt, e_mod) = (params.dt, params.e_modulus());
    let size = 3 * nv;
    let (ow, oe, op) = (0, nv, 2 * nv);
    let w_old = DVector::from_row_slice(w0);
    let e_old = DVector::from_row_slice(e0);
    let p_old = DVector::from_row_slice(p0v);
    let residual = |x: &DVector<f64>| -> DVector<f64> {
        let w = x.rows(ow, nv).into_owned();
        let eps = x.rows(oe, nv).into_owned();
        let p = x.rows(op, nv).into_owned();
        let rw = params.rho * &m * (&w - &w_old)
            + dt * params.mu_vis() * &l * &w
            + dt * e_mod * d.transpose() * &eps
            - dt * d.transpose() * &p
            - dt * &bw;
        let mut nl = DVector::zeros(nv);
        for i in 0..nv {
            for j in 0..nv {
                for k in 0..nv {
                    nl[i] += tri[i][j][k] * eps[j] * w[k];
                }
            }
        }
        let re = &m * (&eps - &e_old) + params.alpha * dt * &m * &eps - dt * &d * &w + dt * nl;
        let rp = &d * &w + (params.kappa + params.beta) * &l * &p - params.beta * &l * &p_old - &bp;
        let mut r = DVector::zeros(size);
        r.rows_mut(ow, nv).copy_from(&rw);
        r.rows_mut(oe, nv).copy_from(&re);
        r.rows_mut(op, nv).copy_from(&rp);
        // w = 0 at x = 0, p = p₀ at x = 1
        r[ow] = w[0];
        r[op + n] = p[n] - params.p0;
        r
    };
    let mut x = DVector::zeros(size);
    x.rows_mut(ow, nv).copy_from(&w_old);
    x.rows_mut(oe, nv).copy_from(&e_old);
    x.rows_mut(op, nv).copy_from(&p_old);
    for _ in 0..30 {
        let r = residual(&x);
        // the residual is quadratic, so central differences give the
        // Jacobian up to rounding
        let mut jac = DMatrix::zeros(size, size);
        for k in 0..size {
            let step = 1e-4;
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += step;
            xm[k] -= step;
            jac.set_column(k, &((residual(&xp) - residual(&xm)) / (2.0 * step)));
        }
        let dx = jac.lu().solve(&(-&r)).expect("nonsingular Jacobian");
        x += &dx;
        if dx.amax() <= 1e-15 * x.amax().max(1.0) {
            break;
        }
    }
    x.iter().copied().collect()
}
