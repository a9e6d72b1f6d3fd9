use thiserror::Error;

/// Errors raised by the solver and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("element {element} inverted (signed measure {measure:e})")]
    ElementInversion { element: usize, measure: f64 },

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("fixed-point iteration did not converge after {iterations} iterations (last update {update_norm:e})")]
    NonConvergence { iterations: usize, update_norm: f64 },

    #[error("degenerate Fourier mode l = {l} (sin(pi l h) = 0)")]
    DegenerateMode { l: usize },

    #[error("step {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("beta = {beta:e}: {source}")]
    Sweep {
        beta: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Strips `Step`/`Sweep` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } | Error::Sweep { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures of the numerical solve rather than of the inputs.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self.root(),
            Error::NonConvergence { .. }
                | Error::SingularMatrix(_)
                | Error::ElementInversion { .. }
        )
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
