use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("non-finite coefficient on element {element} at x = {x}")]
    Assembly { element: usize, x: f64 },

    #[error("non-finite load on element {element} at x = {x}")]
    Load { element: usize, x: f64 },

    #[error("mesh mismatch: function lives on {found} elements, mesh has {expected}")]
    MeshMismatch { expected: usize, found: usize },

    #[error("singular tridiagonal system: zero pivot at row {row}")]
    Singular { row: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "adaptive quadrature did not converge on [{a}, {b}] after {intervals} subintervals \
         (estimate {estimate:e}, error {error:e}, tolerance {tolerance:e})"
    )]
    Accuracy {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
        tolerance: f64,
        intervals: usize,
    },

    #[error("unknown problem `{0}` (valid ids: ex1, ex2, ex3, ex4)")]
    UnknownProblem(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("bound violated: {0}")]
    BoundViolation(String),
}
