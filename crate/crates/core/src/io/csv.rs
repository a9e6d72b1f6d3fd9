//! Nodal field tables.

use std::fmt::Write as _;
use std::path::Path;

use crate::diagnostics::GridField;
use crate::error::{Error, Result};
use crate::timestepper::State;

pub const FIELD_HEADER: [&str; 10] = [
    "x", "y", "p", "w1", "w2", "eps11", "eps12", "eps22", "u1", "u2",
];

/// Rows of a field table, columns in [`FIELD_HEADER`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTable {
    pub rows: Vec<[f64; 10]>,
}

impl FieldTable {
    pub fn from_state(state: &State) -> Self {
        let mesh = &state.mesh;
        let nv = mesh.n_vertices();
        let two_d = mesh.dim() == 2;
        let second = |v: &[f64], i: usize| if two_d { v[nv + i] } else { 0.0 };
        let third = |v: &[f64], i: usize| if two_d { v[2 * nv + i] } else { 0.0 };
        let mut rows: Vec<[f64; 10]> = mesh
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, x)| {
                [
                    x[0],
                    x[1],
                    state.p[i],
                    state.w[i],
                    second(&state.w, i),
                    state.eps[i],
                    second(&state.eps, i),
                    third(&state.eps, i),
                    state.u[i],
                    second(&state.u, i),
                ]
            })
            .collect();
        rows.sort_by(|a, b| a[1].total_cmp(&b[1]).then(a[0].total_cmp(&b[0])));
        Self { rows }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = FIELD_HEADER.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = FIELD_HEADER.join(",");
        out.push('\n');
        for row in &self.rows {
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{v:.16e}").expect("writing to a String cannot fail");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty field file".into(),
        })?;
        let names: Vec<&str> = header.split(',').map(str::trim).collect();
        if names != FIELD_HEADER {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{}`", FIELD_HEADER.join(",")),
            });
        }
        let mut rows = Vec::new();
        for (idx, line) in lines {
            let mut row = [0.0; 10];
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != 10 {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected 10 columns, found {}", cells.len()),
                });
            }
            for (slot, cell) in row.iter_mut().zip(&cells) {
                *slot = cell.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: format!("`{cell}` is not a number"),
                })?;
            }
            rows.push(row);
        }
        Ok(Self { rows })
    }

    /// Pressure on the node lattice spanned by the table's x and y values.
    pub fn pressure_grid(&self) -> Result<GridField> {
        let xs = distinct(self.rows.iter().map(|r| r[0]));
        let ys = distinct(self.rows.iter().map(|r| r[1]));
        let (nx, ny) = (xs.len(), ys.len());
        if nx < 2 || ny < 2 || nx * ny != self.rows.len() {
            return Err(Error::InvalidInput(format!(
                "field is not a full lattice ({} rows, {nx} x values, {ny} y values)",
                self.rows.len()
            )));
        }
        let mut values = vec![f64::NAN; nx * ny];
        for r in &self.rows {
            let i = xs
                .binary_search_by(|v| v.total_cmp(&r[0]))
                .expect("x present");
            let j = ys
                .binary_search_by(|v| v.total_cmp(&r[1]))
                .expect("y present");
            values[j * nx + i] = r[2];
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidInput(
                "field has repeated lattice nodes".into(),
            ));
        }
        let dx = (xs[nx - 1] - xs[0]) / (nx - 1) as f64;
        let dy = (ys[ny - 1] - ys[0]) / (ny - 1) as f64;
        GridField::new(nx, ny, dx, dy, values)
    }
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

pub fn write_field_csv(state: &State, path: &Path) -> Result<()> {
    std::fs::write(path, FieldTable::from_state(state).to_csv_string())
        .map_err(|e| Error::io(path, e))
}

pub fn read_field_csv(path: &Path) -> Result<FieldTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    FieldTable::parse(&text)
}
