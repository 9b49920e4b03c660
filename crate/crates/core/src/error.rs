use thiserror::Error;

/// Errors surfaced by the estimation and simulation primitives.
///
/// Infeasible moment constraints are deliberately *not* an error: they are a
/// legal outcome of the tilted-likelihood solve and carry a `-inf` log
/// likelihood instead (see `betel`).
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid {family} parameter theta={theta} for dimension {dim}: {reason}")]
    InvalidCopulaParameter {
        family: &'static str,
        theta: f64,
        dim: usize,
        reason: String,
    },

    #[error("dimension {dim} unsupported for {what}: {reason}")]
    UnsupportedDimension {
        what: &'static str,
        dim: usize,
        reason: String,
    },

    #[error("invalid argument {name}: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("matrix with n={n}, d={d} rejected: {reason}")]
    InvalidMatrix { n: usize, d: usize, reason: String },

    #[error(
        "degenerate posterior: every proposal in ({lower}, {upper}) received zero weight; \
         the prior range does not intersect the feasible set of the moment condition"
    )]
    DegeneratePosterior { lower: f64, upper: f64 },

    #[error("marginal source misconfigured: {reason}")]
    MarginalConfig { reason: String },

    #[error("sampler tuning failed: {reason}")]
    Tuning { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
