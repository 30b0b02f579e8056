use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Polytope is lower dimensional, empty or has an unsupported ambient dimension.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// Facet data is not primitive / inconsistent with the vertex data.
    #[error("representation error: {0}")]
    Representation(String),
    #[error("twist infeasible: {0}")]
    TwistInfeasible(String),
    /// Operation is defined only for a restricted class of inputs (Fano, n = 1, ...).
    #[error("out of scope: {0}")]
    Scope(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A potential lost positivity (u'' <= 0) somewhere on the grid.
    #[error("positivity violated: {0}")]
    Positivity(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("parse error: {0}")]
    Parse(String),
}
