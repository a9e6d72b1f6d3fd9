//! Legacy ASCII VTK output.

use std::path::Path;

use crate::error::{Error, Result};
use crate::timestepper::State;

const VTK_LINE: u8 = 3;
const VTK_TRIANGLE: u8 = 5;

pub fn field_vtk_string(state: &State) -> String {
    let mesh = &state.mesh;
    let nv = mesh.n_vertices();
    let ne = mesh.n_elements();
    let k = mesh.dim() + 1;
    let two_d = mesh.dim() == 2;
    let mut s = String::new();
    let mut line = |text: String| {
        s.push_str(&text);
        s.push('\n');
    };
    line("# vtk DataFile Version 3.0".into());
    line(format!("morphoporo field t={}", state.t));
    line("ASCII".into());
    line("DATASET UNSTRUCTURED_GRID".into());
    line(format!("POINTS {nv} double"));
    for x in mesh.vertices() {
        line(format!("{} {} 0", x[0], x[1]));
    }
    line(format!("CELLS {ne} {}", ne * (k + 1)));
    for el in mesh.elements() {
        let ids: Vec<String> = el.iter().map(|v| v.to_string()).collect();
        line(format!("{k} {}", ids.join(" ")));
    }
    line(format!("CELL_TYPES {ne}"));
    let ty = if two_d { VTK_TRIANGLE } else { VTK_LINE };
    for _ in 0..ne {
        line(ty.to_string());
    }
    line(format!("POINT_DATA {nv}"));
    let comp = |v: &[f64], c: usize, i: usize| if c == 0 || two_d { v[c * nv + i] } else { 0.0 };
    let scalars: Vec<(&str, Vec<f64>)> = vec![
        ("p", state.p.clone()),
        ("eps11", (0..nv).map(|i| state.eps[i]).collect()),
        ("eps12", (0..nv).map(|i| comp(&state.eps, 1, i)).collect()),
        ("eps22", (0..nv).map(|i| comp(&state.eps, 2, i)).collect()),
    ];
    for (name, values) in scalars {
        line(format!("SCALARS {name} double 1"));
        line("LOOKUP_TABLE default".into());
        for v in values {
            line(v.to_string());
        }
    }
    for (name, field) in [("w", &state.w), ("u", &state.u)] {
        line(format!("VECTORS {name} double"));
        for i in 0..nv {
            line(format!("{} {} 0", comp(field, 0, i), comp(field, 1, i)));
        }
    }
    s
}

pub fn write_field_vtk(state: &State, path: &Path) -> Result<()> {
    std::fs::write(path, field_vtk_string(state)).map_err(|e| Error::io(path, e))
}
