//! Frictionless quantum Brownian motion in phase space.
//!
//! The crate covers:
//!
//! * [`qbm`]: the general linear-Lindblad generator, its validity
//!   conditions and the diagonalization of the diffusion matrix.
//! * [`gaussian`]: Gaussian wavepackets and two-branch cat states with
//!   closed-form Wigner functions and exact propagation under momentum
//!   diffusion, free flight and a uniform force.
//! * [`grid`]: rasterized Wigner functions, density-matrix transforms,
//!   a split-step Klein-Kramers integrator, marginals and fringe
//!   visibility.
//! * [`sql`]: standard-quantum-limit formulas for force and diffusion.
//! * [`detection`]: the two-level interferometer channel, Chernoff
//!   exponents and the search over Gaussian preparations.
//! * [`perturbation`]: finite-dimensional check that entanglement (and so
//!   decoherence) is second order in the coupling.

pub mod detection;
pub mod error;
pub mod expm;
pub mod gaussian;
pub mod grid;
pub mod perturbation;
pub mod phase;
pub mod qbm;
pub mod sql;

pub use error::{Error, Result};
pub use num_complex::Complex64;
