use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("map is not completely positive (min Choi eigenvalue {min_eig:.3e})")]
    NotCp { min_eig: f64 },

    #[error("map is not unital (residual {residual:.3e})")]
    NotUnital { residual: f64 },

    #[error("map is not completely semi-phi (Gram min eigenvalue {gram_min_eig:.3e})")]
    NotSemiPhi { gram_min_eig: f64 },

    #[error(
        "no feasible point found within budget (residual {residual:.3e} after {iterations} iterations)"
    )]
    InfeasibleWithinBudget { residual: f64, iterations: usize },

    #[error("not a *-representation (residual {residual:.3e})")]
    NotRepresentation { residual: f64 },

    #[error("representation leaks across corner projections (residual {residual:.3e})")]
    ProjectionLeak { residual: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("dilation pairs are not equivalent (Gram mismatch {gram_gap:.3e})")]
    NotEquivalent { gram_gap: f64 },

    #[error("operator is not in the commutant (residual {residual:.3e})")]
    NotInCommutant { residual: f64 },

    #[error("operator is not positive (min eigenvalue {min_eig:.3e})")]
    NotPositive { min_eig: f64 },

    #[error("order relation fails: {0}")]
    OrderFails(String),

    #[error("ill-conditioned problem: {0}")]
    IllConditioned(String),

    #[error("unsupported dimensions: {0}")]
    UnsupportedDims(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
