//! Exact collective relaxation of arrays of Λ-type three-level atoms coupled
//! to a chiral or achiral two-mode waveguide.
//!
//! The crate builds the Lindblad generator of the array, maps initial states
//! to their final (ground-manifold) states, and evaluates the entanglement
//! that emerges among atoms, detected photons and atom–photon pairs.

pub mod acceptance;
pub mod detection;
pub mod entanglement;
pub mod error;
pub mod integrate;
pub mod liouvillian;
pub mod oracle;
pub mod reference;
pub mod spectral;
pub mod state;

pub use error::{Error, Result};
