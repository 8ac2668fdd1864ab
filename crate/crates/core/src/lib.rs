//! Pulse synthesis, simulation and characterization of single-qubit
//! shortcut-to-adiabaticity gates.
//!
//! The crate is `no_std` (with `alloc`); file formats and the command-line
//! front end live in the `stagate` crate.

#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod benchmarking;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod pulse;
pub mod tomography;
pub mod units;

pub use error::{Error, FitFailure, Result};
