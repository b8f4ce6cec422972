//! Discrete harmonic functions on lattice boxes, periodic strips and half-spaces.
//!
//! Module map:
//! - [`lattice`]: boxes, edge sets, discrete operators, Lᵖ norms.
//! - [`spectral`]: periodic DFT, the symbols λ, Q, f, 𝒩ᵢ, 𝒟ᵢ and multipliers.
//! - [`dyadic`]: dyadic rectangles, local/total variation and symbol gluing.
//! - [`halfspace`]: half-space layers, strip solvers, telescopes, periodized Poisson kernel.
//! - [`boxes`]: Dirichlet/Neumann extensions on the cube, reflections, face decomposition.
//! - [`walk`]: random-walk exit sampling and kernel estimates.
//! - [`lab`]: experiment sweeps and reports behind the `harmonic-lab` binary.

pub mod boxes;
pub mod dyadic;
pub mod error;
pub mod halfspace;
pub mod lab;
pub mod lattice;
pub mod spectral;
pub mod walk;

pub use error::{Error, Result};
