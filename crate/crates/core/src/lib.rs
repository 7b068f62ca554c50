//! Specified Feynman graphs, their Hopf algebra and doubling bialgebra,
//! operator-valued characters with Birkhoff renormalization, and an exact
//! Gaussian / numeric parametric implementation of dimensional regularization.
//!
//! Module map:
//! - [`graph`]: half-edge graphs, covering subgraphs, contraction, canonical keys.
//! - [`theory`]: theory tables, power counting, specified graphs and subgraphs.
//! - [`hopf`]: coproducts on specified graphs and on pairs, quotients, `P2`.
//! - [`laurent`]: truncated Laurent series, multivariate polynomials, schemes.
//! - [`dimreg`]: Schur complements, Gaussian integrals, Schwinger integrands.
//! - [`renorm`]: operator algebra, characters, convolution, Birkhoff.

pub mod corpus;
pub mod dimreg;
pub mod graph;
pub mod hopf;
pub mod laurent;
pub mod rational;
pub mod renorm;
pub mod theory;

pub use rational::Q;
