//! Continuous Gaussian weak measurement of small quantum systems.
//!
//! Three independent routes compute the same quasiprobability moments:
//! superoperator chains over the measurement Lindbladian ([`correlators`]),
//! Monte Carlo over backaction noise ([`langevin`]) and selective Kraus
//! records ([`sampler`]). [`analytic`] holds the closed forms for the
//! two-level system and the harmonic oscillator.
//!
//! Units follow `ħ = 1` by default; every type that needs it carries an
//! explicit `hbar`.

pub mod analytic;
pub mod correlators;
pub mod error;
pub mod langevin;
pub mod lindblad;
pub mod operators;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
pub use lindblad::{MeasurementSetup, Superoperator};
pub use operators::{CMatrix, DensityMatrix, HermitianOperator, C64};
