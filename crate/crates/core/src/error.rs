use thiserror::Error;

pub type Result<T> = std::result::Result<T, QuenchError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuenchError {
    #[error("unknown dimension tag `{0}`")]
    UnknownDimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("classically forbidden at z = {z} a.u. (p^2 = {radicand:e})")]
    Forbidden { z: f64, radicand: f64 },

    #[error("WKB not valid at z_min = {z_min} a.u. (|B| = {badland:e}); decrease z_min")]
    WkbInvalid { z_min: f64, badland: f64 },

    #[error("scattering length did not converge after {refinements} refinements (last relative change {change:e})")]
    NonConvergence { refinements: usize, change: f64 },

    #[error("Im a = {im:e} a.u. is positive beyond tolerance {tol:e}; absorbing solve failed")]
    SignViolation { im: f64, tol: f64 },

    #[error("profile interval [{lo}, {hi}] a.u. is unresolved")]
    Unresolved { lo: f64, hi: f64 },

    #[error("quadrature did not reach tolerance: estimated error {error:e} > {target:e}")]
    Quadrature { error: f64, target: f64 },

    #[error("step size collapsed at t = {at:e}")]
    StepSizeCollapse { at: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for QuenchError {
    fn from(e: std::io::Error) -> Self {
        QuenchError::Io(e.to_string())
    }
}
