//! Numerical toolkit for Schrödinger-cat witnesses on truncated Fock spaces.
//!
//! Modules build on each other bottom-up:
//!
//! * [`fock`]: truncated ladder operators, states, expectations, exponentials.
//! * [`su11`]: two-photon SU(1,1) generators, Casimir, squeezing.
//! * [`catability`]: phase-sensitive witnesses and the normalized measure ξ.
//! * [`channels`]: photon loss and phase diffusion.
//! * [`fw`]: graded operator algebra and iterative Foldy–Wouthuysen diagonalization.
//! * [`dirac`]: relativistic catability, revivals, Zitterbewegung.
//! * [`spin_s`]: witnesses with an arbitrary spin-s internal space.
//!
//! Units are natural (ħ = c = 1) throughout.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catability;
pub mod channels;
pub mod dirac;
pub mod error;
pub mod fock;
pub mod fw;
pub mod spin_s;
pub mod su11;

pub use error::{CatError, Result};
pub use fock::{CatSpec, FockSpace, OperatorMatrix, Parity, QuantumState};

pub use num_complex::Complex64;
