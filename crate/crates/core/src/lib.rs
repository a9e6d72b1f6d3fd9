//! Finite-element solver and analysis tools for a morpho-visco-poroelastic
//! tissue model: velocity, strain and pressure on a fixed or moving domain,
//! with an optional pressure stabilization.
//!
//! The main entry points are [`Mesh`], [`TimeStepper`] and the analysis
//! functions in [`stability`], [`monotonicity`] and [`diagnostics`].

pub mod assembly;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod linsolve;
pub mod mesh;
pub mod monotonicity;
pub mod params;
pub mod sources;
pub mod sparse;
pub mod stability;
pub mod tensor;
pub mod timestepper;

pub use assembly::DofLayout;
pub use diagnostics::{GridField, TvRow};
pub use error::{Error, Result};
pub use io::{OutputFormat, RunConfig};
pub use linsolve::LinearSystem;
pub use mesh::{BoundaryTag, Mesh};
pub use monotonicity::SchurAnalysis;
pub use params::ModelParams;
pub use sources::{Scenario, Sources};
pub use sparse::SparseMatrix;
pub use stability::ModeReport;
pub use tensor::Tensor2;
pub use timestepper::{DomainMode, FullStrainField, State, StepReport, TimeStepper};
