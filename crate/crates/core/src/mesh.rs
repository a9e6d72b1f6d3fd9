//! Computational meshes: uniform interval and structured unit-square triangulation.

use crate::error::{Error, Result};

/// Boundary portion a facet belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    /// Clamped portion `x = 0`: velocity pinned, prescribed fluid flux.
    Gamma1,
    /// Remainder of the boundary: traction and ambient pressure.
    Gamma2,
}

/// A boundary facet: an edge (2D) or an end point (1D, both node slots equal).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFacet {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
    /// Element owning the facet, used to orient the outward normal.
    pub element: usize,
}

/// Node lattice underlying a structured mesh (row-major, x fastest).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<[f64; 2]>,
    /// Flat connectivity, `dim + 1` vertices per element.
    connectivity: Vec<usize>,
    boundary: Vec<BoundaryFacet>,
    h: f64,
    lattice: Option<Lattice>,
}

impl Mesh {
    /// Uniform grid on (0, 1) with `n` elements. Node 0 is Γ₁, node `n` is Γ₂.
    pub fn interval(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "interval mesh needs n >= 2, got {n}"
            )));
        }
        let h = 1.0 / n as f64;
        let vertices = (0..=n).map(|i| [i as f64 * h, 0.0]).collect();
        let connectivity = (0..n).flat_map(|e| [e, e + 1]).collect();
        let boundary = vec![
            BoundaryFacet {
                nodes: [0, 0],
                tag: BoundaryTag::Gamma1,
                element: 0,
            },
            BoundaryFacet {
                nodes: [n, n],
                tag: BoundaryTag::Gamma2,
                element: n - 1,
            },
        ];
        let lattice = Lattice {
            nx: n + 1,
            ny: 1,
            dx: h,
            dy: 1.0,
        };
        let mut mesh = Self {
            dim: 1,
            vertices,
            connectivity,
            boundary,
            h: 0.0,
            lattice: Some(lattice),
        };
        mesh.h = mesh.max_diameter();
        Ok(mesh)
    }

    /// Structured triangulation of [0, 1]² with `n` subdivisions per side.
    ///
    /// Each cell is split along its lower-left to upper-right diagonal, so the
    /// element diameter is `√2/n`. Edges on `x = 0` are Γ₁, all others Γ₂.
    pub fn unit_square(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "unit square mesh needs n >= 2, got {n}"
            )));
        }
        let np = n + 1;
        let step = 1.0 / n as f64;
        let idx = |i: usize, j: usize| j * np + i;
        let mut vertices = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                vertices.push([i as f64 * step, j as f64 * step]);
            }
        }
        let mut connectivity = Vec::with_capacity(6 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v01, v11) =
                    (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
                connectivity.extend_from_slice(&[v00, v10, v11]);
                connectivity.extend_from_slice(&[v00, v11, v01]);
            }
        }
        // element index of the two triangles in cell (i, j): lower = 2(jn+i), upper = lower+1
        let cell = |i: usize, j: usize| 2 * (j * n + i);
        let mut boundary = Vec::with_capacity(4 * n);
        for i in 0..n {
            // bottom edge belongs to the lower triangle, top edge to the upper one
            boundary.push(BoundaryFacet {
                nodes: [idx(i, 0), idx(i + 1, 0)],
                tag: BoundaryTag::Gamma2,
                element: cell(i, 0),
            });
            boundary.push(BoundaryFacet {
                nodes: [idx(i + 1, n), idx(i, n)],
                tag: BoundaryTag::Gamma2,
                element: cell(i, n - 1) + 1,
            });
        }
        for j in 0..n {
            boundary.push(BoundaryFacet {
                nodes: [idx(n, j), idx(n, j + 1)],
                tag: BoundaryTag::Gamma2,
                element: cell(n - 1, j),
            });
            boundary.push(BoundaryFacet {
                nodes: [idx(0, j + 1), idx(0, j)],
                tag: BoundaryTag::Gamma1,
                element: cell(0, j) + 1,
            });
        }
        let lattice = Lattice {
            nx: np,
            ny: np,
            dx: step,
            dy: step,
        };
        let mut mesh = Self {
            dim: 2,
            vertices,
            connectivity,
            boundary,
            h: 0.0,
            lattice: Some(lattice),
        };
        mesh.h = mesh.max_diameter();
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.connectivity.len() / (self.dim + 1)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.connectivity[e * k..(e + 1) * k]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> {
        self.connectivity.chunks_exact(self.dim + 1)
    }

    pub fn boundary(&self) -> &[BoundaryFacet] {
        &self.boundary
    }

    /// Maximum element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lattice(&self) -> Option<Lattice> {
        self.lattice
    }

    /// Signed length (1D) or area (2D) of element `e`; positive when not inverted.
    pub fn signed_measure(&self, e: usize) -> f64 {
        let el = self.element(e);
        let p = |k: usize| self.vertices[el[k]];
        match self.dim {
            1 => p(1)[0] - p(0)[0],
            _ => {
                let (a, b, c) = (p(0), p(1), p(2));
                0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
            }
        }
    }

    /// Vertices carrying a facet with the given tag, sorted and deduplicated.
    pub fn tagged_vertices(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary
            .iter()
            .filter(|f| f.tag == tag)
            .flat_map(|f| f.nodes)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Outward unit normal and length of a boundary facet (length 1 in 1D).
    pub fn facet_normal(&self, facet: &BoundaryFacet) -> ([f64; 2], f64) {
        let el = self.element(facet.element);
        match self.dim {
            1 => {
                let other = if el[0] == facet.nodes[0] {
                    el[1]
                } else {
                    el[0]
                };
                let s = (self.vertices[facet.nodes[0]][0] - self.vertices[other][0]).signum();
                ([s, 0.0], 1.0)
            }
            _ => {
                let a = self.vertices[facet.nodes[0]];
                let b = self.vertices[facet.nodes[1]];
                let (tx, ty) = (b[0] - a[0], b[1] - a[1]);
                let len = tx.hypot(ty);
                let mut n = [ty / len, -tx / len];
                let opposite = el
                    .iter()
                    .copied()
                    .find(|v| !facet.nodes.contains(v))
                    .expect("facet element has an opposite vertex");
                let o = self.vertices[opposite];
                if n[0] * (o[0] - a[0]) + n[1] * (o[1] - a[1]) > 0.0 {
                    n = [-n[0], -n[1]];
                }
                (n, len)
            }
        }
    }

    /// Displaces every vertex by `dt·w`. `w` is component-major: all first
    /// components, then (2D) all second components.
    pub fn move_vertices(&self, w: &[f64], dt: f64) -> Result<Mesh> {
        let nv = self.n_vertices();
        if w.len() != self.dim * nv {
            return Err(Error::InvalidInput(format!(
                "move_vertices: expected {} velocity entries, got {}",
                self.dim * nv,
                w.len()
            )));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!(
                "move_vertices: dt must be positive, got {dt}"
            )));
        }
        let mut moved = self.clone();
        for (k, v) in moved.vertices.iter_mut().enumerate() {
            for c in 0..self.dim {
                v[c] += dt * w[c * nv + k];
            }
        }
        for e in 0..moved.n_elements() {
            let m = moved.signed_measure(e);
            if !(m > 0.0) {
                return Err(Error::ElementInversion {
                    element: e,
                    measure: m,
                });
            }
        }
        moved.h = moved.max_diameter();
        Ok(moved)
    }

    fn max_diameter(&self) -> f64 {
        let mut h: f64 = 0.0;
        for el in self.elements() {
            for a in 0..el.len() {
                for b in a + 1..el.len() {
                    let p = self.vertices[el[a]];
                    let q = self.vertices[el[b]];
                    h = h.max((p[0] - q[0]).hypot(p[1] - q[1]));
                }
            }
        }
        h
    }
}
