use num_complex::Complex64 as C64;

use super::{
    solve_equal_time, solve_fock_chain, solve_single_photon, solve_two_time, TriTable, TwoTimeOptions, TwoTimeSurfaces,
};
use crate::model::{envelope_a, normalization_nu, FreeField, ModelParams, PulseSpec, TimeGrid};
use crate::Result;

/// Input state a set of tables was built for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    /// One photon in the leading packet.
    SinglePhoton,
    /// One photon in each of the two packets separated by `L`.
    TwoPhoton,
    /// `n` photons in the leading packet.
    Fock(usize),
}

impl InputKind {
    pub fn photons(&self) -> usize {
        match *self {
            InputKind::SinglePhoton => 1,
            InputKind::TwoPhoton => 2,
            InputKind::Fock(n) => n,
        }
    }

    /// Input described by a photon count: pair for two, Fock state otherwise.
    pub fn for_photons(n: usize) -> Self {
        match n {
            1 => InputKind::SinglePhoton,
            2 => InputKind::TwoPhoton,
            n => InputKind::Fock(n),
        }
    }
}

/// One term `weight · A*(t - delay) · S(t)` of the field-emitter interference.
#[derive(Clone, Debug, PartialEq)]
pub struct InterferenceChannel {
    pub weight: f64,
    pub delay: f64,
    /// Lowering-operator matrix element on the fine grid.
    pub amplitude: Vec<C64>,
}

impl InterferenceChannel {
    /// `A*(t - delay) S(t)` at fine node `k`.
    pub fn product(&self, k: usize, grid: &TimeGrid, spec: &PulseSpec, v_g: f64) -> C64 {
        envelope_a(grid.time(k) - self.delay, spec, v_g).conj() * self.amplitude[k]
    }
}

/// Everything the observables need: the free input, the excitation, the
/// two-time correlation and the interference channels.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorTables {
    pub kind: InputKind,
    pub params: ModelParams,
    pub spec: PulseSpec,
    pub grid: TimeGrid,
    pub free: FreeField,
    /// `⟨σ₊σ₋⟩` on the fine grid.
    pub excitation: Vec<f64>,
    /// `⟨σ₊(t)σ₋(t')⟩`.
    pub correlation: TriTable,
    pub channels: Vec<InterferenceChannel>,
    /// Column sums of `|D|²` (see [`TwoTimeSurfaces::d_column_sums`]); all zero for one photon.
    pub pair_column_sums: Vec<f64>,
}

impl CorrelatorTables {
    /// Builds the tables for `kind`, with the leading packet of `spec`
    /// (and the trailing one for a pair).
    pub fn build(params: &ModelParams, spec: &PulseSpec, grid: &TimeGrid, kind: InputKind, stride: usize) -> Result<Self> {
        match kind {
            InputKind::SinglePhoton => Self::single_photon(params, spec, grid, stride),
            InputKind::TwoPhoton => Self::two_photon(params, spec, grid, stride),
            InputKind::Fock(n) => Self::fock(params, spec, grid, n, stride),
        }
    }

    pub fn two_photon(params: &ModelParams, spec: &PulseSpec, grid: &TimeGrid, stride: usize) -> Result<Self> {
        let spec = spec.with_photons(2);
        let singles = solve_single_photon(params, &spec, grid)?;
        let equal = solve_equal_time(params, &spec, grid, &singles)?;
        let options = TwoTimeOptions { stride, keep_g: true, keep_d: false };
        let surfaces = solve_two_time(params, &spec, grid, &singles, &equal, options)?;
        let gn = params.coupling() * normalization_nu(&spec);
        let channels = vec![
            InterferenceChannel { weight: gn, delay: 0.0, amplitude: equal.s_beta },
            InterferenceChannel { weight: gn, delay: spec.separation / params.v_g, amplitude: equal.s_alpha },
        ];
        Ok(Self::assemble(InputKind::TwoPhoton, params, &spec, grid, equal.excitation, surfaces, channels))
    }

    pub fn single_photon(params: &ModelParams, spec: &PulseSpec, grid: &TimeGrid, stride: usize) -> Result<Self> {
        Self::fock(params, spec, grid, 1, stride)
    }

    pub fn fock(params: &ModelParams, spec: &PulseSpec, grid: &TimeGrid, n: usize, stride: usize) -> Result<Self> {
        let spec = spec.with_photons(n.max(1));
        let chain = solve_fock_chain(params, &spec, grid, n)?;
        let options = TwoTimeOptions { stride, keep_g: true, keep_d: false };
        let surfaces = chain.two_time(params, &spec, options)?;
        let weight = params.coupling() * (n as f64).sqrt();
        let channels = vec![InterferenceChannel { weight, delay: 0.0, amplitude: chain.top_s().to_vec() }];
        let excitation = chain.top_excitation().to_vec();
        let kind = if n == 1 { InputKind::SinglePhoton } else { InputKind::Fock(n) };
        Ok(Self::assemble(kind, params, &spec, grid, excitation, surfaces, channels))
    }

    fn assemble(
        kind: InputKind,
        params: &ModelParams,
        spec: &PulseSpec,
        grid: &TimeGrid,
        excitation: Vec<f64>,
        surfaces: TwoTimeSurfaces,
        channels: Vec<InterferenceChannel>,
    ) -> Self {
        let free = match kind {
            InputKind::TwoPhoton => FreeField::for_spec(spec),
            _ => FreeField::Identical { n: kind.photons() },
        };
        Self {
            kind,
            params: *params,
            spec: *spec,
            grid: *grid,
            free,
            excitation,
            correlation: surfaces.g.expect("correlation table requested"),
            channels,
            pair_column_sums: surfaces.d_column_sums,
        }
    }

    pub fn photons(&self) -> usize {
        self.kind.photons()
    }

    pub fn t_max(&self) -> f64 {
        self.grid.t_max()
    }

    /// `⟨σ₊σ₋⟩` at an arbitrary time, linear between nodes, zero outside `[0, t_max]`.
    pub fn excitation_at(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.t_max() * (1.0 + 1e-12) {
            return 0.0;
        }
        let u = (t / self.grid.dt).min(self.grid.steps as f64);
        let k = (u.floor() as usize).min(self.grid.steps.saturating_sub(1));
        let f = u - k as f64;
        self.excitation[k] * (1.0 - f) + self.excitation[(k + 1).min(self.grid.steps)] * f
    }
}
