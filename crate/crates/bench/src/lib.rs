//! Fixtures shared by the benchmarks.

use morphoporo_core::{Mesh, ModelParams, State};

/// The oscillating configuration: κ = 1e-6 on an n × n square.
pub fn oscillating_case(n: usize) -> (Mesh, ModelParams) {
    (
        Mesh::unit_square(n).expect("n >= 2"),
        ModelParams::default().with_kappa(1e-6),
    )
}

pub fn rest_state(mesh: &Mesh, params: &ModelParams) -> State {
    State::at_rest(mesh.clone(), params.p0)
}
