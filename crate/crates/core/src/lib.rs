//! Arbitrary-precision Lagrange-mesh solver for the one-dimensional
//! time-independent Schrödinger equation
//! `-(1/2m) ψ'' + V(x) ψ = E ψ` (ħ = 1) on finite, semi-infinite and infinite
//! intervals.
//!
//! The pipeline is: build (or load from the cache) the zeros and weights of
//! the Legendre, Laguerre or Hermite polynomial matching the domain, map them
//! onto the physical interval, assemble `T/(2 m h²) + diag(V(x_i))`, and
//! diagonalize at the requested working precision.

pub mod basis;
pub mod cli;
pub mod eigen;
pub mod error;
pub mod numeric;
pub mod orthopoly;
pub mod potential;
pub mod spectrum;

pub use error::{Error, Result, Warning};
pub use numeric::{make_context, BigComplex, BigReal, PrecisionContext};
