use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("matrix is not positive semidefinite (pivot {pivot:e} at index {index})")]
    NotPsd { index: usize, pivot: f64 },

    #[error("matrix is not upper triangular: entry ({row}, {col}) is nonzero")]
    NotUpperTriangular { row: usize, col: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("side {side} exceeds the eigensolver ceiling of {max}")]
    TooLarge { side: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trace of W*rho has imaginary part {imag:e}")]
    NonRealTrace { imag: f64 },

    #[error("endpoints do not bracket a sign change: f({lo}) = {f_lo:e}, f({hi}) = {f_hi:e}; re-bracket")]
    SameSign { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("no sign crossing found: {0}")]
    NoCrossing(String),

    #[error("state is not detected at zero noise (lambda_min = {lambda_min:e})")]
    NotDetected { lambda_min: f64 },

    #[error("residual minimization did not converge (best residual {best_residual:e})")]
    ResidualNotConverged { best_residual: f64 },
}
