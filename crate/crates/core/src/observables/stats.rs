use crate::correlators::{
    solve_equal_time, solve_single_photon, solve_two_time, CorrelatorTables, FockChain, InputKind, TwoTimeOptions,
};
use crate::model::{ModelParams, PulseSpec, TimeGrid};
use crate::quadrature::{trapezoid, trapezoid_weight};
use crate::Result;

/// Photon numbers of the outgoing field after the scattering.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonStats {
    pub photons: usize,
    pub n_r: f64,
    pub n_l: f64,
    /// `⟨N_r²⟩`; `None` where the pair-emission route does not apply (`n > 2`).
    pub n2_r: Option<f64>,
    pub var_r: Option<f64>,
    pub var_l: Option<f64>,
    /// `⟨σ₊σ₋⟩` at the end of the grid.
    pub final_excitation: f64,
    pub warnings: Vec<String>,
}

/// End time after which an input pulse has passed and the emitter has decayed:
/// `(|x0| + L + 6w)/v_g + 25/Γ`.
pub fn scattering_time(params: &ModelParams, spec: &PulseSpec) -> f64 {
    let transit = (spec.x0.abs() + spec.separation + 6.0 * spec.width) / params.v_g;
    transit + if params.gamma > 0.0 { 25.0 / params.gamma } else { 0.0 }
}

fn assemble(photons: usize, gamma: f64, grid: &TimeGrid, excitation: &[f64], pair: Option<&[f64]>) -> PhotonStats {
    let n_r = 0.5 * gamma * trapezoid(excitation, grid.dt);
    let n2_r = pair.map(|sums| {
        let n = grid.len();
        let square: f64 = sums.iter().enumerate().map(|(k, s)| trapezoid_weight(k, n) * s).sum();
        0.25 * gamma * gamma * 2.0 * grid.dt * grid.dt * square + n_r
    });
    let var_r = n2_r.map(|m| m - n_r * n_r);
    let final_excitation = *excitation.last().unwrap_or(&0.0);
    let mut warnings = Vec::new();
    if final_excitation > 1e-4 {
        warnings.push(format!(
            "pulse not fully scattered: <σ+σ-> = {final_excitation:.3e} at t_max = {}",
            grid.t_max()
        ));
    }
    if pair.is_none() {
        warnings.push(format!("second moment not available for {photons} photons"));
    }
    PhotonStats { photons, n_r, n_l: photons as f64 - n_r, n2_r, var_r, var_l: var_r, final_excitation, warnings }
}

/// Mean reflected and transmitted photon numbers and their variances for
/// the input `kind`, integrated over `grid`. No two-time table is stored.
pub fn photon_stats(params: &ModelParams, spec: &PulseSpec, grid: &TimeGrid, kind: InputKind) -> Result<PhotonStats> {
    let options = TwoTimeOptions { stride: 1, keep_g: false, keep_d: false };
    match kind {
        InputKind::TwoPhoton => {
            let spec = spec.with_photons(2);
            let singles = solve_single_photon(params, &spec, grid)?;
            let equal = solve_equal_time(params, &spec, grid, &singles)?;
            let surfaces = solve_two_time(params, &spec, grid, &singles, &equal, options)?;
            Ok(assemble(2, params.gamma, grid, &equal.excitation, Some(&surfaces.d_column_sums)))
        }
        InputKind::SinglePhoton | InputKind::Fock(_) => {
            let chain = crate::correlators::solve_fock_chain(params, spec, grid, kind.photons())?;
            fock_stats(&chain, params, spec)
        }
    }
}

/// Statistics of an `n`-photon Fock input from its hierarchy. The second
/// moment is produced for `n <= 2`.
pub fn fock_stats(chain: &FockChain, params: &ModelParams, spec: &PulseSpec) -> Result<PhotonStats> {
    let grid = &chain.grid;
    let pair = match chain.n {
        1 => Some(vec![0.0; grid.len()]),
        2 => {
            let options = TwoTimeOptions { stride: 1, keep_g: false, keep_d: false };
            Some(chain.two_time(params, spec, options)?.d_column_sums)
        }
        _ => None,
    };
    Ok(assemble(chain.n, params.gamma, grid, chain.top_excitation(), pair.as_deref()))
}

impl PhotonStats {
    /// Statistics from prebuilt tables.
    pub fn from_tables(tables: &CorrelatorTables) -> Self {
        let pair = (tables.photons() <= 2).then_some(tables.pair_column_sums.as_slice());
        assemble(tables.photons(), tables.params.gamma, &tables.grid, &tables.excitation, pair)
    }
}
