use crate::prelude::*;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("exponent evaluated at {at} which is within tolerance of the pole {pole}")]
    PoleEvaluation { at: Complex64, pole: f64 },

    #[error("mean drift psi'(0) = {0} must be strictly negative")]
    NotNegativeDrift(f64),

    #[error("{what} = {value} outside {range}")]
    OutOfRange { what: &'static str, value: f64, range: String },

    #[error("killing rate {lambda} exceeds lambda* = {lambda_star}")]
    LambdaExceedsStar { lambda: f64, lambda_star: f64 },

    #[error("roots {a} and {b} are not distinct (relative separation below 1e-7)")]
    RepeatedRoots { a: Complex64, b: Complex64 },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid survival curve: {0}")]
    InvalidCurve(String),

    #[error("moment condition violated: {0}")]
    MomentCondition(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("transform inversion failed: {0}")]
    InversionFailure(String),

    #[error("insufficient paths: {0}")]
    InsufficientPaths(String),

    #[error("empty sample")]
    EmptySample,
}

impl Error {
    /// True for errors caused by inputs that violate a documented precondition,
    /// as opposed to a numerical routine failing on admissible inputs.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NotNegativeDrift(_)
                | Error::OutOfRange { .. }
                | Error::LambdaExceedsStar { .. }
                | Error::InvalidModel(_)
                | Error::InvalidCurve(_)
                | Error::MomentCondition(_)
                | Error::EmptySample
        )
    }
}
