use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Real-valued payloads are carried as `f64` regardless of the scalar type
/// the computation ran in.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid region: {0}")]
    Geometry(String),

    #[error("distance is undefined when an interval is empty")]
    EmptyDistance,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator is not Hermitian (max entry deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("ground space is degenerate: {0}")]
    Degenerate(String),

    #[error("insufficient decay data: {0} usable points, need at least 3")]
    InsufficientDecayData(usize),

    #[error("polar decomposition undefined: {0}")]
    SingularPolar(String),

    #[error("environment dimension {env_dim} cannot purify a rank-{rank} state")]
    EnvironmentTooSmall { env_dim: usize, rank: usize },

    #[error("alignment target unreachable even at full support (best fidelity {best})")]
    Unreachable { best: f64 },

    #[error("alignment needs {sites} sites, above the cap of {cap} (best fidelity so far {best})")]
    SupportCap { sites: usize, cap: usize, best: f64 },

    #[error("truncation regime invalid: dominant overlap {0} is below 1/2")]
    TruncationRegime(f64),

    #[error("anchor spacing violation: {0}")]
    Spacing(String),

    #[error("quadrature did not converge (relative change {0:e} between refinements)")]
    Quadrature(f64),

    #[error("step {index} failed: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("step {index} failed the product test: infidelity {infidelity:e} exceeds {tol:e}")]
    ProductTest { index: usize, infidelity: f64, tol: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
