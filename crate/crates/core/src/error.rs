use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error("tangent undefined at origin")]
    TangentAtOrigin,

    #[error("rank deficient subspace basis (rank {rank} of {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("line search did not converge after {iterations} iterations (bracket [{lo}, {hi}])")]
    LineSearch { iterations: usize, lo: f64, hi: f64 },

    #[error("minimisation did not converge after {iterations} iterations (gradient max-norm {gradient})")]
    NoConvergence { iterations: usize, gradient: f64, iterate: Vec<f64> },

    #[error("invalid regulariser: {0}")]
    InvalidRegulariser(String),

    #[error("invalid regulariser output {value} ({label})")]
    InvalidRegulariserOutput { label: String, value: f64 },

    #[error("mollification undefined at origin for non-radial regulariser")]
    MollifyAtOrigin,

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("constraints infeasible (residual {residual}, coefficient norm {coefficient_norm})")]
    Infeasible { residual: f64, coefficient_norm: f64 },

    #[error("regulariser not admissible; use oracle::solve_constrained_direct")]
    NotAdmissible,

    #[error("oracle infeasible (best residual {residual})")]
    OracleInfeasible { residual: f64 },

    #[error("refine grid: no grid point within the constraint slab")]
    RefineGrid,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
