//! Numerical simulator and verification engine for lattices of
//! superconducting qubits and resonators hosting itinerant spin-carrying
//! excitations.
//!
//! The crate builds lattice Hamiltonians for qubit-resonator arrays and the
//! spinful Bose-Hubbard models they emulate, derives effective hopping and
//! Zeeman parameters by second-order elimination of the resonator modes,
//! performs exact time evolution and Floquet analysis (including a
//! four-step stroboscopic spin-orbit protocol), and packages verification
//! scenarios that check the derived effective models against full numerics.
//!
//! Units: all frequencies are in MHz (angular frequency divided by 2 pi),
//! couplings and detunings included; times are in microseconds. The
//! evolution operator over time `t` is `exp(-i 2 pi H t)`.

pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod model;
pub mod sparse;

pub use error::{Error, Result};
