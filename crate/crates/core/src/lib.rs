//! Ideal-geometry model of dangling-bond spins at a stepped (100) diamond
//! surface: slab and step construction, point-dipole hyperfine couplings,
//! two-pulse echo modulation and Polanyi-Wigner desorption kinetics.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod constants;
pub mod crystal;
pub mod error;
pub mod hyperfine;
pub mod kinetics;
pub mod spindynamics;

pub use error::{Error, Result};
