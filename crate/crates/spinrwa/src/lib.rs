//! Simulation toolkit for a high-spin system with a dominant quadrupole-type
//! level splitting, driven by a linearly polarized ac field.
//!
//! The Hamiltonian (with hbar = 1 and the gyromagnetic factor absorbed into
//! the field amplitudes) is
//!
//! ```text
//! H(t) = Q Iz^2 + B0 Iz + B1 cos(omega t) Ix
//! ```
//!
//! in the basis |I, M> with M listed in descending order (I, I-1, ..., -I).
//!
//! The crate provides:
//!
//! * an exact reference propagator (classical RK4 on the matrix Schrodinger
//!   equation, [`exact`]),
//! * four closed-form approximate propagators: a Zeeman-frame rotating-wave
//!   form ([`rwa_reduced::zeeman_rwa_propagator`]), a reduced-subspace
//!   rotating-wave form assembled from resonant blocks ([`rwa_reduced`]),
//!   a full-space rotating-wave form built on a level-sign operator
//!   ([`rwa_full`]), and a counter-rotating-corrected variant on the reduced
//!   subspace ([`chrw`]),
//! * state/operator fidelity metrics and windowed averages ([`fidelity`]),
//! * parameter sweeps, parallel by default with a sequential fallback
//!   ([`sweep`]), and a built-in invariant self-test suite ([`selftest`]).

pub mod chrw;
pub mod error;
pub mod exact;
pub mod fidelity;
pub mod linalg;
pub mod methods;
pub mod rwa_full;
pub mod rwa_reduced;
pub mod selftest;
pub mod spin;
pub mod su3;
pub mod sweep;

pub use error::{Error, Result};
pub use spin::SpinParams;
