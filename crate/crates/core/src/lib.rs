//! Quantum Fisher information of a spin target probed by scattering a
//! flying spin off it.
//!
//! The target qubit `X` is probed by one half (`A`) of a spin pair; `A`
//! scatters off `X` through a Heisenberg contact interaction and is detected
//! in transmission, reflection or both. [`qfi`] computes the Fisher matrix of
//! the resulting branch states numerically, [`closedform`] has the analytic
//! expressions, and [`optimize`] searches for the best probe momentum.

pub mod cli;
pub mod closedform;
pub mod error;
pub mod linalg;
pub mod optimize;
pub mod qfi;
pub mod scatter;
pub mod states;
pub mod strategy;

pub use error::{Error, Result};
pub use qfi::{qfi_numeric, Basis, QfiMatrix};
pub use scatter::DetectionMode;
pub use states::{BlochVector, PolarCoords, ProbeConfig};
