use thiserror::Error;

use crate::funcspace::DomainTag;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("declared bound must be a nonnegative finite number, got {0}")]
    InvalidBound(f64),

    #[error(
        "{op} requires a function on the {expected} domain, `{label}` lives on the {found} domain"
    )]
    DomainMismatch {
        op: &'static str,
        label: String,
        expected: DomainTag,
        found: DomainTag,
    },

    #[error("coordinate {x} lies outside the {domain} domain of `{label}`")]
    OutOfDomain {
        label: String,
        domain: DomainTag,
        x: f64,
    },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error(
        "quadrature on [{a}, {b}] did not converge: error estimate {abs_err:e} exceeds tolerance {tol:e} after {subdivisions} subdivisions"
    )]
    QuadratureNonConvergence {
        a: f64,
        b: f64,
        abs_err: f64,
        tol: f64,
        subdivisions: usize,
    },

    #[error("function `{0}` has no derivative evaluator")]
    MissingDerivative(String),

    #[error("sampled |f({x})| = {value} exceeds the declared bound {bound} of `{label}`")]
    BoundViolated {
        label: String,
        x: f64,
        value: f64,
        bound: f64,
    },

    #[error("evaluation of `{label}` at {x} produced a non-finite value")]
    NonFinite { label: String, x: f64 },

    #[error("unknown corpus label `{0}`")]
    UnknownLabel(String),

    #[error("unknown summability method `{0}`")]
    UnknownMethod(String),

    #[error("unknown operator `{0}` (expected window:θ, exp, cesaro or kernel:n)")]
    UnknownOperator(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Numerical failures, as opposed to caller mistakes.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. } | Error::NonFinite { .. }
        )
    }

    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
