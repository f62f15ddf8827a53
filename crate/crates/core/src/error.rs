use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid vertex index {index} in triangle {triangle}")]
    InvalidIndex { triangle: usize, index: usize },
    #[error("degenerate triangle {0} (zero area)")]
    DegenerateTriangle(usize),
    #[error("non-conforming mesh: edge ({0}, {1}) is shared by more than two triangles")]
    NonConforming(usize, usize),
    #[error("hanging node: vertex {vertex} lies inside edge ({a}, {b})")]
    HangingNode { vertex: usize, a: usize, b: usize },
    #[error("boundary edge with midpoint ({x}, {y}) matches no boundary segment")]
    UnclassifiedBoundary { x: f64, y: f64 },
    #[error("basis index (m={m}, n={n}) out of range for degree {degree}")]
    BasisIndex { m: usize, n: usize, degree: usize },
    #[error("quadrature order {0} is not supported")]
    QuadratureOrder(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("bulk parameter must lie in (0, 1), got {0}")]
    InvalidTheta(f64),
    #[error("jacobi scaling impossible: zero diagonal in row {0}")]
    ZeroDiagonal(usize),
    #[error("eigenvector iteration did not converge after {iterations} iterations (residual {residual:e})")]
    EigenNotConverged { iterations: usize, residual: f64 },
    #[error("ILU(0) breakdown: zero pivot in row {0}")]
    IluBreakdown(usize),
    #[error("singular matrix: no usable pivot in column {0}")]
    SingularMatrix(usize),
    #[error("BiCGStab breakdown at iteration {iteration} ({reason})")]
    KrylovBreakdown { iteration: usize, reason: &'static str },
    #[error("BiCGStab stagnated at iteration {iteration} (relative residual {residual:e})")]
    KrylovStagnation { iteration: usize, residual: f64 },
    #[error("BiCGStab did not converge in {iterations} iterations (relative residual {residual:e})")]
    KrylovNotConverged { iterations: usize, residual: f64 },
    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NewtonNotConverged { iterations: usize, residual: f64, history: Vec<f64> },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// BiCGStab ran out of iterations, stagnated or broke down.
    pub fn is_krylov_failure(&self) -> bool {
        matches!(self, Error::KrylovNotConverged { .. } | Error::KrylovStagnation { .. } | Error::KrylovBreakdown { .. })
    }
}
