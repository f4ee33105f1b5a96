//! Numerical laboratory for five-body perturbative gadgets coupling toric-code
//! plaquettes to a three-dimensional ferromagnet.
//!
//! The modules come in pairs of closed form and brute-force oracle:
//!
//! * [`pauli`] / [`sw`] / [`exact_diag`]: gadget Hamiltonian, Schrieffer-Wolff
//!   elimination of the mediator qubits, and sector-wise exact diagonalization.
//! * [`magnon`] / [`thermo`]: magnon susceptibilities, the mediated Yukawa
//!   coupling between plaquettes, anyon chemical potential and bath rates.
//! * [`metropolis`]: classical Heisenberg Monte Carlo of the ferromagnet under
//!   the code's transverse forcing.
//! * [`backaction`]: time-dependent tilt of the ferromagnet spins, as a
//!   Brillouin-zone lattice sum and via Fresnel integrals.

pub mod backaction;
pub mod config;
pub mod error;
pub mod exact_diag;
pub mod magnon;
pub mod metropolis;
pub mod numeric;
pub mod pauli;
pub mod quad;
pub mod special;
pub mod sw;
pub mod thermo;

pub use error::{Error, Result};
