use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate triangle {0}")]
    Geometry(usize),
    #[error("boundary segment {0} has no boundary condition")]
    Configuration(u8),
    #[error("element kind {0:?} not supported here")]
    UnsupportedKind(crate::ElementKind),
    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),
    #[error("eigensolver did not converge: worst relative residual {0:e}")]
    NoConvergence(f64),
    #[error("point outside triangle {0}")]
    OutsideElement(usize),
    #[error("recovery failed at boundary edge {0}")]
    Recovery(usize),
    #[error("estimators coincide, combining weights undefined")]
    DegenerateWeights,
    #[error("function vanishes")]
    ZeroFunction,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}
