//! Quality measures for computed fields.

use std::thread;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::params::ModelParams;
use crate::sources::Sources;
use crate::timestepper::{FullStrainField, State, TimeStepper};

/// Nodal scalars on a rectangular lattice, row-major with x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, values: Vec<f64>) -> Result<Self> {
        if nx * ny != values.len() {
            return Err(Error::InvalidInput(format!(
                "grid {nx}x{ny} does not match {} values",
                values.len()
            )));
        }
        if !(dx > 0.0 && dy > 0.0) {
            return Err(Error::InvalidInput("grid spacings must be positive".into()));
        }
        Ok(Self {
            nx,
            ny,
            dx,
            dy,
            values,
        })
    }

    /// Pressure of a state on a structured mesh, on the mesh's node lattice.
    pub fn pressure(state: &State) -> Result<Self> {
        let lat = state
            .mesh
            .lattice()
            .ok_or_else(|| Error::InvalidInput("state mesh has no node lattice".into()))?;
        Self::new(lat.nx, lat.ny, lat.dx, lat.dy, state.p.clone())
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Anisotropic total variation Σ Δy|p_{i+1,j} − p_{i,j}| + Δx|p_{i,j+1} − p_{i,j}|.
pub fn total_variation(field: &GridField) -> f64 {
    let mut tv = 0.0;
    for j in 0..field.ny {
        for i in 0..field.nx {
            let c = field.at(i, j);
            if i + 1 < field.nx {
                tv += field.dy * (field.at(i + 1, j) - c).abs();
            }
            if j + 1 < field.ny {
                tv += field.dx * (field.at(i, j + 1) - c).abs();
            }
        }
    }
    tv
}

/// True when node `k` of `line` is a strict extremum that sits next to an
/// extremum of the opposite kind, i.e. part of a sawtooth.
fn sawtooth_at(line: &[f64], k: usize) -> bool {
    let d = |m: usize| line[m + 1] - line[m];
    if k == 0 || k + 1 >= line.len() || d(k - 1) * d(k) >= 0.0 {
        return false;
    }
    let left = k >= 2 && d(k - 2) * d(k - 1) < 0.0;
    let right = k + 2 < line.len() && d(k) * d(k + 1) < 0.0;
    left || right
}

/// Fraction of interior nodes lying on a sawtooth along either grid line.
/// Smooth fields give 0; an alternating checkerboard gives 1.
pub fn oscillation_indicator(field: &GridField) -> f64 {
    if field.nx < 3 || field.ny < 3 {
        return 0.0;
    }
    let rows: Vec<Vec<f64>> = (0..field.ny)
        .map(|j| (0..field.nx).map(|i| field.at(i, j)).collect())
        .collect();
    let cols: Vec<Vec<f64>> = (0..field.nx)
        .map(|i| (0..field.ny).map(|j| field.at(i, j)).collect())
        .collect();
    let mut count = 0usize;
    for j in 1..field.ny - 1 {
        for i in 1..field.nx - 1 {
            if sawtooth_at(&rows[j], i) || sawtooth_at(&cols[i], j) {
                count += 1;
            }
        }
    }
    count as f64 / ((field.nx - 2) * (field.ny - 2)) as f64
}

/// Largest nodal ‖ε − εᵀ‖_F of a state; zero for the stored symmetric strain.
pub fn symmetry_norm(state: &State) -> f64 {
    (0..state.mesh.n_vertices())
        .map(|i| {
            let e = state.strain_at(i);
            (e - e.transpose()).norm()
        })
        .fold(0.0, f64::max)
}

/// Largest nodal ‖ε − εᵀ‖_F of a four-entry strain field.
pub fn symmetry_norm_full(field: &FullStrainField) -> f64 {
    field
        .tensors
        .iter()
        .map(|e| (*e - e.transpose()).norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvRow {
    pub beta: f64,
    pub tv: f64,
}

/// One step from rest for every β, returning the pressure TV per β.
/// Rows are computed concurrently and returned in input order.
pub fn tv_sweep(
    base: &ModelParams,
    beta_list: &[f64],
    mesh: &Mesh,
    sources: &dyn Sources,
) -> Result<Vec<TvRow>> {
    if beta_list.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput(
            "beta_list must be sorted ascending".into(),
        ));
    }
    if mesh.dim() != 2 || mesh.lattice().is_none() {
        return Err(Error::InvalidInput(
            "tv_sweep needs a structured 2D mesh".into(),
        ));
    }
    let run = |beta: f64| -> Result<TvRow> {
        let wrap = |e: Error| Error::Sweep {
            beta,
            source: Box::new(e),
        };
        let params = base.with_beta(beta);
        let stepper = TimeStepper::new(params, sources).map_err(wrap)?;
        let (state, _) = stepper
            .step(&State::at_rest(mesh.clone(), params.p0))
            .map_err(wrap)?;
        let tv = total_variation(&GridField::pressure(&state).map_err(wrap)?);
        Ok(TvRow { beta, tv })
    };
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .max(1);
    let chunk = beta_list.len().div_ceil(workers).max(1);
    let results: Vec<Result<TvRow>> = thread::scope(|scope| {
        let handles: Vec<_> = beta_list
            .chunks(chunk)
            .map(|betas| scope.spawn(move || betas.iter().map(|&b| run(b)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    results.into_iter().collect()
}

/// True when the TV column never increases.
pub fn is_non_increasing(rows: &[TvRow]) -> bool {
    rows.windows(2).all(|w| w[1].tv <= w[0].tv)
}

/// True when the TV column strictly decreases.
pub fn is_strictly_decreasing(rows: &[TvRow]) -> bool {
    rows.windows(2).all(|w| w[1].tv < w[0].tv)
}
