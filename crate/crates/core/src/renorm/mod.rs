//! Operator-valued characters on the doubling bialgebra: bullet product,
//! convolution, inverses, the Feynman-rules character and Birkhoff
//! decomposition for the minimal and Taylor schemes.

pub mod character;
pub mod ops;
pub mod probe;

pub use character::{birkhoff, taylor_jets, Birkhoff, Character, Embedding, Root, Scheme};
pub use ops::{bullet, compose, formally_equal, identity_op, render_op, zero_op, Atom, LaurentOp, OpExpr, Term};
pub use probe::{apply, block_dim, integrate_series, operators_equal, random_probes, ProbeValue, Schedule};

use crate::dimreg::DimregError;
use crate::theory::TheoryError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenormError {
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Dimreg(#[from] DimregError),
    #[error("character is not unital")]
    NotUnital,
    #[error("unknown renormalization scheme `{0}`")]
    SchemeUnavailable(String),
    #[error("incompatible blocks: {0}")]
    IncompatibleBlocks(String),
    #[error("operator cannot be evaluated on probes: {0}")]
    ProbeUnsupported(String),
}
