//! Quaternionic regularization of the Kepler and two-center problems and the
//! mechanical billiards they carry.
//!
//! The crate implements the Levi-Civita, Kustaanheimo-Stiefel and
//! Birkhoff-Waldvogel transforms over the quaternions, the Hamiltonian systems
//! they relate (4D Hooke, 3D Kepler, spatial two-center, Lagrange), quadric
//! reflection walls on both sides of the transforms, event-detected billiard
//! flows, and a seeded verification suite that numerically certifies every
//! identity the library relies on.

pub mod billiards;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod quat;
pub mod rng;
pub mod systems;
pub mod transforms;
pub mod verify;

pub use error::{RegulusError, Result};

/// Default exclusion radius around singular sets (collision points, the real
/// line in ℍ, chart degeneracies).
pub const DEFAULT_EXCLUSION: f64 = 1e-8;
