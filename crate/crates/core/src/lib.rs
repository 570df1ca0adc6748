//! Numerical toolkit for two-dimensional (alpha, beta)-metrics:
//! metric-pair fields, phi families, covariant-derivative decomposition,
//! spray coefficients, Douglas/projective-flatness checks and the
//! constructions behind the bundled example metrics.

pub mod betacalc;
pub mod cli;
pub mod constructs;
pub mod diffcore;
pub mod error;
pub mod expr;
pub mod fields;
pub mod jet;
pub mod linalg;
pub mod phi;
pub mod quad;
pub mod spray;
pub mod taylor;
pub mod verify;

pub use error::{Error, Result};
