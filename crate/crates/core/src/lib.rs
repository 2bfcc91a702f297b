//! Exact word and operator algebra for sinh-log series of linear Stratonovich
//! SDEs, with a Monte Carlo harness comparing truncated series integrators.

pub mod algebra;
pub mod coeffs;
pub mod error;
pub mod excess;
pub mod identities;
pub mod integrate;
pub mod moments;
pub mod opalg;
pub mod par;
pub mod words;

pub use algebra::{q, EpsPoly, Rational};
pub use error::{Error, Result};
pub use words::{Word, WordPoly};
