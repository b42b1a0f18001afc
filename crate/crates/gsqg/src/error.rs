use thiserror::Error;

/// Errors produced by grid construction, profile realization, and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("profile resolution too low: {support_cells} cells inside support, need at least {min_cells}")]
    Resolution {
        support_cells: usize,
        min_cells: usize,
    },

    #[error("kernel evaluated at zero displacement")]
    Singularity,

    #[error("momentum constraint infeasible: L ranges over [{lo}, {hi}], cannot reach {target}")]
    InfeasibleConstraint { lo: f64, hi: f64, target: f64 },

    #[error("epsilon {eps} infeasible for this domain: maximum admissible is {eps_max}")]
    InfeasibleEpsilon { eps: f64, eps_max: f64 },

    #[error("solver did not converge within {0} iterations")]
    Unconverged(usize),

    #[error("operation requires s = 1, got s = {0}")]
    RequiresNewtonian(f64),

    #[error("operation requires s < 1")]
    RequiresRiesz,

    #[error("result is not converged")]
    NotConverged,

    #[error("field has empty support")]
    EmptySupport,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code: 2 for configuration/validation problems, 3 for
    /// convergence failures, 4 for infeasible problem data, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) | Error::Resolution { .. } => 2,
            Error::Unconverged(_) | Error::NotConverged => 3,
            Error::InfeasibleEpsilon { .. } | Error::InfeasibleConstraint { .. } => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
