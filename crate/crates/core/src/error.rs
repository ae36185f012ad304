use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("matrix size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("element is not in the Lie algebra: {0}")]
    NotInAlgebra(String),

    #[error("basis is not linearly independent (numerical rank {rank} < {expected})")]
    Dependent { rank: usize, expected: usize },

    #[error("basis is not closed under the bracket: [E{i}, E{j}] leaves the span (residual {residual:.3e})")]
    NotClosed { i: usize, j: usize, residual: f64 },

    #[error("algebra is not compact semisimple: {0}")]
    NotSemisimple(String),

    #[error("root clustering is degenerate: relative gap {gap:.3e}")]
    Degenerate { gap: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("not a group element: {0}")]
    NotInGroup(String),

    #[error("non-finite value at quadrature point {index}")]
    NonFinite { index: usize },

    #[error("singular flux evaluation (delta = 0, p < 2, xi = 0)")]
    Singular,

    #[error("linear system is singular: rank {rank} of {size}")]
    SingularSystem { rank: usize, size: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("statistically insufficient: {0}")]
    Insufficient(String),

    #[error("cutoff projection error {error:.3} exceeds 5% at degree cap {degree_cap}")]
    DegreeCap { error: f64, degree_cap: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
