//! Quadratic and cubic stochastic operators on the simplex: majorization,
//! dissipativity checks, orbit dynamics, fixed points and Cesàro means.
//!
//! The `examples/` directory has one runnable program per capability; the
//! `qso` binary exposes the same functionality from the command line.

pub mod cli;
pub mod dissipativity;
pub mod dynamics;
pub mod error;
pub mod json;
pub mod operators;
pub mod simplex;

pub use error::{Error, Result};
pub use operators::{gallery, validate, OperatorSpec, RawOperator};
pub use simplex::{compare_majorization, SimplexPoint};

/// Seed used whenever none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_D15A;
