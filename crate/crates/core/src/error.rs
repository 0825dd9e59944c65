use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field length {got} does not match expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("boundary data not clamped: {0}")]
    NotClamped(String),
    #[error("Neumann data incompatible: mean defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    IncompatibleData { defect: f64, tol: f64 },
    #[error("Dirichlet data must vanish at the interface endpoints (got {left:.3e}, {right:.3e})")]
    NonzeroEndpoints { left: f64, right: f64 },
    #[error("ambient flow too large: r_U = {r_u:.6e}, discriminant {discriminant:.6e} < 0")]
    AmbientTooLarge { r_u: f64, discriminant: f64 },
    #[error("ambient flow violates U.n = 0 on the wall: max |U.n| = {0:.3e}")]
    AmbientNotTangential(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("state is not in the zero-mean subspace (defect {0:.3e})")]
    NotMeanFree(f64),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("no kernel found: smallest residual {0:.3e}")]
    NoKernelFound(f64),
    #[error("eigenvalue iteration did not converge: {0}")]
    NonConverged(String),
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
