//! Exact symbolic tensor calculus on semi-Riemannian supermanifolds.
//!
//! Everything is computed over a single global chart with rational arithmetic:
//! Grassmann-valued superfunctions, supermatrices, supermetrics and their
//! Levi-Civita connections, Killing fields, maps with flesh and the harmonic
//! map machinery built on top of them.

pub mod error;
pub mod geometry;
pub mod grassmann;
pub mod integration;
pub mod lie_killing;
pub mod linear;
pub mod morphism;
pub mod poly;
pub mod ratfunc;
pub mod scenario;
pub mod superlinalg;

pub use error::{Error, MetricViolation, Result};
pub use grassmann::{GeneratorPool, Parity, Superfunction, Var};
pub use poly::Polynomial;
pub use ratfunc::RationalFunction;
