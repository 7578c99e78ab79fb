//! Computational toolkit for Khintchine-type questions on affine coordinate
//! subspaces `{x} × ℝ^k`: counting functions, Diophantine exponents, lattice
//! point counts, ubiquity conditions and measure probes.

pub mod approx;
pub mod counting;
pub mod error;
pub mod exponents;
pub mod lattice;
pub mod measure;
pub mod real;
pub mod ubiquity;

pub use error::{Error, Result};
