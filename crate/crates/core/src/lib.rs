//! Vibrational dynamics of an atom-diatom collision computed two ways: by
//! compiling the time-dependent N-state Hamiltonian into qubit circuits
//! (compact encoding + second-order Trotterization) executed on an exact
//! statevector simulator, with complex S-matrix elements read out through an
//! ancilla Hadamard test; and by an independent coupled-channel RK5(4)
//! benchmark. Cross sections and the continuum-convergence study sit on top.
//!
//! Internals are atomic units throughout; the config surface speaks eV/amu.

pub mod circuit;
pub mod config;
pub mod coupling;
pub mod eigensolver;
pub mod error;
pub mod evolution;
pub mod ode;
pub mod pauli;
pub mod pipeline;
pub mod potential;
pub mod scattering;
pub mod simulator;
pub mod smatrix;
pub mod spline;
pub mod units;

pub use config::{default_b_grid, parse_config, CollisionConfig};
pub use error::{Error, Result};
pub use pipeline::CollisionContext;
