//! Dimensional regularization: exact Gaussian integrals with formal `D`,
//! Schwinger-parametric Feynman-type integrands, numeric evaluation at
//! complex `D` and Laurent extraction around an integer dimension.

pub mod gaussian;
pub mod linalg;
pub mod momentum;
pub mod quad;
pub mod schwinger;

pub use gaussian::{compose_check, integrate_gaussian, schur_split, Affine, BilinearForm, DetFactor, GaussianElement, Prefactor, Subspace};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DimregError {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("form is not positive definite")]
    NotPositiveDefinite,
    #[error("complementary block is singular")]
    SingularBlock,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index {index} is repeated or outside a space of dimension {dim}")]
    BadSubspace { index: usize, dim: usize },
    #[error("integral does not converge: {0}")]
    NotConvergent(String),
    #[error("quadrature did not reach tolerance (last change {error:e} on value {value:e})")]
    QuadratureFailure { error: f64, value: f64 },
    #[error("continuation needs {needed} integration-by-parts steps; at most {supported} are implemented")]
    ContinuationNotImplemented { needed: i64, supported: i64 },
    #[error("edge type `{0}` has no supported propagator")]
    UnsupportedPropagator(String),
    #[error("invalid integrand: {0}")]
    Invalid(String),
}

pub use momentum::{amplitude, block_fibration, AmplitudeFunction, Fibration, MomentumSpace};
pub use schwinger::{cauchy_coefficients, eval_continued, eval_parametric, laurent_extract, CircleOptions, Numerator, SchwingerIntegrand};
