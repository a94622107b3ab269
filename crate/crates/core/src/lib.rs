//! Numerical checks of adiabatic-approximation criteria for finite-dimensional
//! time-dependent quantum systems.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * [`hamiltonian`]: matrix paths `H(t)` on `[0, T]`, including the driven
//!   two-level scenario, a Landau–Zener sweep and sampled input;
//! * [`spectral`]: gauge-aligned instantaneous eigenbases and the couplings
//!   `χ_nm = ⟨E_n|Ė_m⟩`;
//! * [`propagate`]: a unitary midpoint-exponential Schrödinger integrator and
//!   instantaneous-basis amplitudes;
//! * [`conditions`]: the ratio condition, the cumulative coupling condition,
//!   population bounds, energy–time scales and resonance diagnostics;
//! * [`dual`]: the companion system `H^B = −U^A† H^A U^A` and its identities.
//!
//! Units are `ħ = 1`.

#![no_std]
// negated comparisons are how NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod conditions;
pub mod dual;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod propagate;
pub mod quadrature;
pub mod signal;
pub mod spectral;

pub use error::{Error, Result};
