//! Sum rules for Jacobi matrices: M-functions, Szegő-type log-integrals,
//! eigenvalue and coefficient functionals, and divergence diagnostics for
//! slowly decaying coefficient families.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod jacobi;
pub mod mfunction;
pub mod numeric;
pub mod probe;
pub mod quadrature;
pub mod spectral;
pub mod sumrules;
pub mod tridiag;

pub use error::{Error, Result};
pub use jacobi::{FamilyConfig, FamilySpec, JacobiCoefficients, Tail};
