//! Exact decision procedures for classical (noncontextual) explainability of
//! prepare-transform-measure experiments.
//!
//! The pipeline runs from a GPT fragment ([`fragment`]) through its linear
//! operational identities ([`identities`]), the vertices of the source and
//! measurement assignment polytopes ([`polytope`]), to a linear feasibility
//! program whose verdict either yields a classical model ([`model`]) or a
//! Farkas witness that doubles as a violated noncontextuality inequality
//! ([`feasibility`]). [`elimination`] derives complete inequality sets by
//! Fourier-Motzkin projection on small scenarios.

pub mod cli;
pub mod elimination;
pub mod error;
pub mod feasibility;
pub mod fragment;
pub mod identities;
pub mod linalg;
pub mod model;
pub mod polytope;
pub mod rational;
pub mod robustness;
pub mod sampling;
pub mod scenario;
pub mod simplex;

pub use error::{Error, Result};
pub use linalg::{RationalMatrix, RationalVector};
pub use rational::Rational;
