//! Critical points of the discrete determinantal point process (DPP) log-likelihood.
//!
//! The crate covers the parametric form of the likelihood (a function of a
//! symmetric kernel matrix) and the implicit form (a function on the variety of
//! principal-minor vectors). It can
//!
//! * evaluate principal minors, the partition function, both log-likelihoods and
//!   their first and second derivatives ([`model`]),
//! * assemble block-diagonal critical points from closed forms and count
//!   critical points over all set partitions ([`decoupling`]),
//! * solve the likelihood equations numerically with a monodromy / parameter
//!   homotopy pipeline in a birational chart ([`solver`]),
//! * check points against the 2x2x2 hyperdeterminant for `n = 3` ([`hyperdet`]).

// `!(x > t)` is used deliberately so that NaN fails the test
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod census;
pub mod cli;
pub mod combinatorics;
pub mod decoupling;
mod error;
pub mod hyperdet;
pub mod io;
mod linalg;
pub mod model;
pub mod solver;

pub use error::{DppError, Result};

/// Complex scalar used throughout numerical evaluation.
pub type C64 = num_complex::Complex64;
