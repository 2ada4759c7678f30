use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid subsystem reference: {0}")]
    BadSubsystem(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("trace invariant violated: |Tr - 1| = {0:.3e}")]
    Trace(f64),

    #[error("positivity invariant violated: smallest eigenvalue {0:.3e}")]
    NotPositive(f64),

    #[error("state is not normalized: |norm - 1| = {0:.3e}")]
    Norm(f64),

    #[error("non-finite entry in matrix")]
    NonFinite,

    #[error("operator is not unitary (defect {0:.3e})")]
    NotUnitary(f64),

    #[error("Kraus set is not trace preserving (defect {0:.3e})")]
    NotTracePreserving(f64),

    #[error("basis is not orthonormal and complete (defect {0:.3e})")]
    BadBasis(f64),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("channel does not commute with einselection (defect {0:.3e})")]
    NonCommuting(f64),

    #[error("theorem inapplicable: {0}")]
    Inapplicable(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
