//! Complex isoparametric and proper r-harmonic functions on the Lie group
//! semidirect products `R^m ⋉_A R^n` and `R^m ⋉_A H^{2n+1}`.
//!
//! The crate builds the function families admitted by these groups
//! (eigenvector isoparametrics, isotropic eigenfunctions, separated
//! products, holomorphic ladders) and certifies the defining identities
//! numerically: iterated tension fields `τ^r` are evaluated through
//! truncated Taylor jets and cross-checked against an independent
//! finite-difference oracle.

pub mod catalog;
pub mod constructors;
pub mod error;
pub mod expr;
pub mod groups;
pub mod jets;
pub mod linalg;
pub mod operators;
pub mod quadrature;
pub mod selftest;
pub mod verifier;

pub use error::{Error, Result};
pub use num_complex::Complex64;
