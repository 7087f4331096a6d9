use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("basis is singular or nearly singular (|det| = {det:e})")]
    SingularBasis { det: f64 },

    #[error("dimension {d} not supported by this operation (max {max})")]
    DimensionUnsupported { d: usize, max: usize },

    #[error("flow application would overflow: |c_j * t| = {magnitude} > 700")]
    Overflow { magnitude: f64 },

    #[error("certified enumeration box has ~{cells:e} cells, over budget {budget:e}")]
    EnumerationTooLarge { cells: f64, budget: f64 },

    #[error("computation budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("continued fraction too shallow: {0}")]
    InsufficientDepth(String),

    #[error("orbit does not dip below the threshold at index {index}")]
    NoDip { index: usize },

    #[error("interval intersection is empty at depth {depth}")]
    EmptyIntersection { depth: usize },

    #[error("query scale {r} outside the resolved range [{lo}, {hi}]")]
    ScaleOutOfRange { r: f64, lo: f64, hi: f64 },

    #[error("cannot fit a slope: {0}")]
    DegenerateFit(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
