//! Qubit matrix elements driven by the input pulse: single-photon amplitudes,
//! the two-photon equal-time set, the two-time surfaces and the `n`-photon
//! hierarchy, all integrated with fixed-step RK4 on a shared [`TimeGrid`].

mod cache;
mod equal_time;
mod fock;
mod single;
mod table;
mod tables;
mod two_time;

pub use cache::{read_cache, write_cache, CACHE_MAGIC, CACHE_VERSION};
pub use equal_time::{solve_equal_time, EqualTimeSet};
pub use fock::{solve_fock_chain, FockChain};
pub use single::{single_photon_quadrature, solve_single_photon, SinglePhotonAmps};
pub use table::TriTable;
pub use tables::{CorrelatorTables, InterferenceChannel, InputKind};
pub use two_time::{solve_two_time, TwoTimeOptions, TwoTimeSurfaces};

use num_complex::Complex64 as C64;

use crate::model::{envelope_a, envelope_b, PulseSpec, TimeGrid};

pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Envelopes `A` and `B` tabulated on the half-step grid `t = i dt / 2`.
pub(crate) struct Drive {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

impl Drive {
    pub fn new(spec: &PulseSpec, v_g: f64, grid: &TimeGrid) -> Self {
        let n = 2 * grid.steps + 1;
        let half = grid.dt / 2.0;
        Self {
            a: (0..n).map(|i| envelope_a(i as f64 * half, spec, v_g)).collect(),
            b: (0..n).map(|i| envelope_b(i as f64 * half, spec, v_g)).collect(),
        }
    }
}

pub(crate) fn check_grid(expected: &TimeGrid, got: &TimeGrid, what: &str) -> crate::Result<()> {
    if expected != got {
        return Err(crate::Error::Usage(format!(
            "{what} was computed on a different time grid (dt = {}, steps = {}) than requested (dt = {}, steps = {})",
            got.dt, got.steps, expected.dt, expected.steps
        )));
    }
    Ok(())
}
