//! Scattering of one-, two- and `n`-photon Fock pulses off a two-level
//! emitter in a one-dimensional waveguide.
//!
//! The emitter's matrix elements are integrated on a fixed time grid
//! ([`correlators`]), from which the outgoing field's phase-space
//! distributions, densities, spectra and photon statistics are evaluated
//! ([`observables`]). [`oracle`] propagates a discretised waveguide directly
//! and serves as an independent check.

pub mod correlators;
mod error;
pub mod model;
pub mod observables;
pub mod ode;
pub mod oracle;
pub mod quadrature;

pub use correlators::{CorrelatorTables, InputKind, TriTable};
pub use error::{Error, Result};
pub use model::{FreeField, ModelParams, PulseSpec, TimeGrid};
pub use observables::{DensityProfile, PhaseSpaceField, PhotonStats, SpectrumCurve};
