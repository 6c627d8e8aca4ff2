use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SbpError {
    #[error("nonlinearity exponent p = {0} outside (1, 5)")]
    InvalidExponent(f64),
    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("radial quadrature underflow: r_max = {r_max} too small for relative accuracy 1e-8")]
    QuadratureUnderflow { r_max: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("grid half-width {actual} below required {required}")]
    GridTooSmall { required: f64, actual: f64 },
    #[error("grid with n = {n} too large for direct summation (max {max})")]
    GridTooLarge { n: usize, max: usize },
    #[error("grid needs n = {required} points per axis, above the budget of {max}")]
    GridBudget { required: usize, max: usize },
    #[error("peaks closer than 4h ({distance} < {required})")]
    PeaksUnresolved { distance: f64, required: f64 },
    #[error("singular Gram matrix (eigenvalue ratio {ratio:e})")]
    SingularGram { ratio: f64 },
    #[error("Krylov breakdown: {0}")]
    KrylovBreakdown(String),
    #[error("admissible interval is empty")]
    EmptyAdmissible,
    #[error("alpha = {0} must exceed 3+sqrt(7)")]
    AlphaTooSmall(f64),
    #[error("invalid parameter {name}: {constraint}")]
    InvalidParameter { name: String, constraint: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SbpError {
    fn from(e: std::io::Error) -> Self {
        SbpError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SbpError>;

pub(crate) fn invalid(name: &str, constraint: impl Into<String>) -> SbpError {
    SbpError::InvalidParameter {
        name: name.to_string(),
        constraint: constraint.into(),
    }
}
