use alloc::string::String;

/// Errors raised by the operator algebra, the simulators and the solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("length mismatch: expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("{what} must be {property}: deviation {deviation:.3e} exceeds tolerance {tolerance:.3e}")]
    Precondition {
        what: &'static str,
        property: &'static str,
        deviation: f64,
        tolerance: f64,
    },

    #[error("operator is not positive semidefinite: eigenvalue {eigenvalue:.6e} is below -{tolerance:.3e}")]
    NegativeEigenvalue { eigenvalue: f64, tolerance: f64 },

    #[error("index {index} out of range 0..={max}")]
    OutOfRange { index: usize, max: usize },

    #[error("singular {what}: {detail}")]
    Singular { what: &'static str, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
