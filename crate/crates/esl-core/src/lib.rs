#![forbid(unsafe_code)]

//! Numerical laboratory for the additivity equation
//! `H(x, y, z) = H(x + y, 0, z) + H(x, y, 0)` on the closed domain of
//! nonnegative triples with positive sum.
//!
//! The crate provides:
//!
//! * exact solution families and a validated domain model ([`domain`]),
//! * pointwise defect functionals measuring how far a candidate function is
//!   from symmetry, additivity, and homogeneity, together with their suprema
//!   over deterministic sample sets ([`defects`]),
//! * constructive analogues of the steps used to classify near-solutions:
//!   restriction to two variables, homogenization limits, skew decomposition,
//!   potential reconstruction, and window-averaged cocycle correction
//!   ([`proofchain`]),
//! * one-parameter sup-norm and least-squares fits against the solution
//!   families plus the closed-form stability bounds ([`fitting`]),
//! * a seeded perturbation and verification harness ([`harness`]).
//!
//! All randomness is drawn from explicitly seeded generators and every
//! reduction uses a fixed evaluation order, so identical inputs produce
//! bit-identical outputs on a given platform.

pub mod defects;
pub mod domain;
pub mod error;
pub mod fitting;
pub mod harness;
pub mod numeric;
pub mod proofchain;

pub use error::{Error, Result};

/// Absolute tolerance for floating-point comparisons throughout the crate.
pub const ATOL: f64 = 1e-9;

/// Relative tolerance for floating-point comparisons throughout the crate.
pub const RTOL: f64 = 1e-9;
