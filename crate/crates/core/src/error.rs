use thiserror::Error;

/// Errors produced by the bound, decomposition, allocation and ensemble routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e} > tolerance {tol:.3e})")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("block partition inconsistent: t_ab^H t_ab + t_ae^H t_ae - I has residual {residual:.3e}")]
    PartitionResidual { residual: f64 },

    #[error("eigenvalue {value} outside [0, 1] beyond clamping tolerance")]
    EigenvalueOutOfRange { value: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    EigenNoConvergence { sweeps: usize, off_norm: f64 },

    #[error("allocation did not converge after {iterations} iterations: budget sum {sum} vs target {target} (multiplier bracket [{lambda_lo}, {lambda_hi}])")]
    AllocationNoConvergence {
        iterations: usize,
        sum: f64,
        target: f64,
        lambda_lo: f64,
        lambda_hi: f64,
    },

    #[error("brute-force allocation supports at most {max} modes, got {modes}")]
    TooManyModes { modes: usize, max: usize },

    #[error("sample {index}: {source}")]
    Sample {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
