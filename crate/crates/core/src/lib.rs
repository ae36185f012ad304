//! Numerical toolkit for sub-Riemannian structures on compact semisimple
//! matrix Lie groups.
//!
//! * [`lie`] builds Lie algebras, root-space decompositions and horizontal frames.
//! * [`field`] represents functions on the group as polynomials in matrix entries,
//!   on which left-invariant vector fields act exactly.
//! * [`haar`] samples Haar measure and integrates polynomial fields exactly.
//! * [`solver`] minimizes the ε-regularized p-energy.
//! * [`geometry`] bounds Carnot–Carathéodory distances and estimates ball volumes.
//! * [`harness`] evaluates Caccioppoli-type inequalities as ratio reports.

pub mod error;
pub mod field;
pub mod geometry;
pub mod haar;
pub mod harness;
pub mod lie;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
