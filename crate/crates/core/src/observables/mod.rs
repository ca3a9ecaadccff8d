//! Quantities measured on the outgoing field: phase-space distributions,
//! densities, spectra and photon-number statistics.

mod density;
mod phase_space;
mod spectrum;
mod stats;

pub use density::{conjugate_momentum_grid, density, reflected_density_shortcut, DensityProfile, PhotonBalance};
pub use phase_space::{aligned_positions, phase_space_field, phase_space_l, phase_space_r, PhaseSpaceField};
pub use spectrum::{full_width_half_maximum, spectrum, SpectrumCurve};
pub use stats::{fock_stats, photon_stats, scattering_time, PhotonStats};
