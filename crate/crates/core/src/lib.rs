//! Finite-time Lyapunov stabilization of two-level quantum systems.
//!
//! The crate is `no_std` (with `alloc`) and purely numerical: pure-state
//! algebra ([`qstate`]), the coherence-vector picture ([`coherence`]), the
//! Lyapunov function and feedback laws ([`control`]), fixed-step integrators
//! for the closed loop in three equivalent coordinate systems
//! ([`dynamics`]), and post-processing checks for finite-time stability
//! ([`analysis`]). IO, configuration and the command-line runner live in the
//! companion `qfts` crate.
//!
//! Units follow the ħ = 1 convention: energies and control gains are in
//! inverse atomic time units, times are in atomic units (a.u.).
#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod coherence;
pub mod control;
pub mod dynamics;
mod error;
pub mod qstate;
mod util;

pub use error::{Error, Result};

/// Complex scalar used for all amplitudes and operator entries.
pub type C64 = num_complex::Complex64;
