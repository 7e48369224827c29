use thiserror::Error;

/// Errors produced by the solution-construction and verification pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DfcbError {
    #[error("jet shape or base point mismatch")]
    ShapeMismatch,
    #[error("partial derivative order ({0},{1},{2}) outside jet shape")]
    OutOfShape(usize, usize, usize),
    /// A (nested) Wronskian or other denominator fell below the singularity
    /// threshold. `symbol` names the degenerate quantity (e.g. `W_2`).
    #[error("singular point: |{symbol}| = {magnitude:.3e} below threshold")]
    SingularPoint { symbol: String, magnitude: f64 },
    #[error("lambda profile degenerate at t = {t}: |lambda(t)| = {magnitude:.3e}")]
    DegenerateLambda { t: f64, magnitude: f64 },
    #[error("invalid seed set: {0}")]
    InvalidSeeds(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("convergence study needs at least 3 strictly decreasing step levels, got {0}")]
    InsufficientLevels(usize),
}

pub type Result<T> = std::result::Result<T, DfcbError>;
