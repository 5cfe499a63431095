//! Transversality of invariant manifolds along homoclinic loops of
//! two-degree-of-freedom Hamiltonians, via the scalar Riccati equation for
//! the manifold curvature across the loop.
//!
//! The pipeline is [`model`] → [`equilibrium`] → [`loop_profile`] →
//! [`riccati`] → [`chart`]; [`melnikov`] handles loops that only survive a
//! perturbation.

pub mod chart;
pub mod equilibrium;
pub mod error;
pub mod loop_profile;
pub mod melnikov;
pub mod model;
pub mod numeric;
pub mod riccati;

pub use error::{Error, Result};
