//! Crate-wide error type.

/// Errors raised by geometry, energy, and measure operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point ({x}, {y}) lies outside the admissible region: {detail}")]
    OutsideDomain { x: f64, y: f64, detail: String },
    #[error("coincident dislocations at ({x}, {y}): the energy is +inf")]
    Collision { x: f64, y: f64 },
    #[error("Neumann datum is incompatible: circle mean {mean} exceeds tolerance {tol}")]
    IncompatibleDatum { mean: f64, tol: f64 },
    #[error("finite-difference stencil of width {step} leaves the admissible region for point {index}")]
    Stencil { index: usize, step: f64 },
    #[error("refusing expensive oracle evaluation: n = {n} exceeds the guard n <= {max}")]
    CostGuard { n: usize, max: usize },
    #[error("infeasible point count: {detail}")]
    InfeasibleN { detail: String },
    #[error("hypothesis violated: {detail}")]
    HypothesisViolation { detail: String },
    #[error("invalid input: {detail}")]
    InvalidInput { detail: String },
    #[error("line search stalled: no admissible decreasing step above the machine floor")]
    LineSearchStall,
}

impl Error {
    pub fn invalid(detail: impl Into<String>) -> Self {
        Error::InvalidInput {
            detail: detail.into(),
        }
    }

    /// Stable machine-readable tag, used by the CLI error stream.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OutsideDomain { .. } => "outside_domain",
            Error::Collision { .. } => "collision",
            Error::IncompatibleDatum { .. } => "incompatible_datum",
            Error::Stencil { .. } => "stencil",
            Error::CostGuard { .. } => "cost_guard",
            Error::InfeasibleN { .. } => "infeasible_n",
            Error::HypothesisViolation { .. } => "hypothesis_violation",
            Error::InvalidInput { .. } => "invalid_input",
            Error::LineSearchStall => "stall",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
