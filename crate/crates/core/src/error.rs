use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("quadrature rule is exact to degree {available}, degree {required} is required")]
    InsufficientQuadrature { required: usize, available: usize },

    #[error("quadrature with {0} nodes is outside the supported range")]
    UnsupportedQuadrature(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} did not converge after {iterations} iterations (best residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("condensate solver diverged: {0}")]
    Divergence(String),

    #[error("first-order fluctuation terms do not vanish: norm {norm:e} exceeds {limit:e}")]
    FirstOrderResidual { norm: f64, limit: f64 },

    #[error("dynamical instability: quasiparticle frequency has imaginary part {imag:e}")]
    Instability { imag: f64 },

    #[error("quadratic form is not definite in either A+B or A-B and has no imaginary frequencies")]
    IndefiniteForm,
}

pub type Result<T> = std::result::Result<T, Error>;
