//! Configuration files and field output.

pub mod config;
pub mod csv;
pub mod vtk;

pub use config::{load_config, ConfigEntries, OutputFormat, RunConfig, DEFAULT_BETA_LIST};
pub use csv::{read_field_csv, write_field_csv, FieldTable, FIELD_HEADER};
pub use vtk::{field_vtk_string, write_field_vtk};
