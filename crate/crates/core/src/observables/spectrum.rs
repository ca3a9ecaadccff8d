use rayon::prelude::*;

use super::phase_space::{aligned_positions, check_snapshot, profile_l, profile_r};
use crate::correlators::CorrelatorTables;
use crate::quadrature::trapezoid;
use crate::Result;

/// Spectral densities of the outgoing light, `n(ω) = ∫dx f(x, ±(ω - ω₀)/v_g)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumCurve {
    /// `ω - ω₀`.
    pub omega: Vec<f64>,
    pub n_l: Vec<f64>,
    pub n_r: Vec<f64>,
    /// Spectral density of the input, `v_g⁻¹`-scaled like `n_l`.
    pub n_in: Vec<f64>,
    pub t_late: f64,
    pub warnings: Vec<String>,
}

impl SpectrumCurve {
    pub fn fwhm_l(&self) -> Option<f64> {
        full_width_half_maximum(&self.omega, &self.n_l)
    }

    pub fn fwhm_r(&self) -> Option<f64> {
        full_width_half_maximum(&self.omega, &self.n_r)
    }

    pub fn fwhm_in(&self) -> Option<f64> {
        full_width_half_maximum(&self.omega, &self.n_in)
    }
}

/// Width of the region around the global maximum where `y >= max/2`,
/// crossings located by linear interpolation.
pub fn full_width_half_maximum(x: &[f64], y: &[f64]) -> Option<f64> {
    let (peak, &ymax) = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(ymax > 0.0) {
        return None;
    }
    let half = 0.5 * ymax;
    let cross = |i: usize, j: usize| x[i] + (half - y[i]) / (y[j] - y[i]) * (x[j] - x[i]);
    let left = (1..=peak).rev().find(|&i| y[i - 1] < half).map(|i| cross(i - 1, i))?;
    let right = (peak..y.len() - 1).find(|&i| y[i + 1] < half).map(|i| cross(i, i + 1))?;
    Some(right - left)
}

/// Output spectra at `t_late` on the frequency offsets `omega`.
///
/// The `x`-integral runs over `|x| <= v_g t_late` on about `points` aligned
/// positions. A warning is attached when the emitter is still excited or
/// the outgoing pulses have not cleared it.
pub fn spectrum(tables: &CorrelatorTables, omega: &[f64], t_late: f64, points: usize) -> Result<SpectrumCurve> {
    let k = check_snapshot(tables, t_late)?;
    let (params, spec) = (&tables.params, &tables.spec);
    let v = params.v_g;
    let mut warnings = Vec::new();
    let residual = tables.excitation_at(t_late);
    if residual > 1e-4 {
        warnings.push(format!("emitter still excited at t_late = {t_late}: <σ+σ-> = {residual:.3e}"));
    }
    let clearance = 2.0 * (spec.x0.abs() / v + if params.gamma > 0.0 { 1.0 / params.gamma } else { 0.0 });
    if t_late < clearance {
        warnings.push(format!("t_late = {t_late} is short of 2(1/Γ + |x0|/v_g) = {clearance}"));
    }
    let xs = aligned_positions(v * t_late, points, tables);
    let dx = xs[1] - xs[0];
    let rows: Vec<(Vec<f64>, Vec<f64>)> = xs
        .par_iter()
        .map(|&x| {
            let pl = profile_l(tables, x, t_late, k);
            let pr = profile_r(tables, x, t_late);
            omega
                .iter()
                .map(|&w| {
                    let p = w / v;
                    let l = tables.free.phase_space(x, p, t_late, spec, v) + pl.eval(v * p).re;
                    (l, pr.eval(-v * p).re)
                })
                .unzip()
        })
        .collect();
    let column = |pick: &dyn Fn(&(Vec<f64>, Vec<f64>)) -> &Vec<f64>, j: usize| {
        let samples: Vec<f64> = rows.iter().map(|r| pick(r)[j]).collect();
        trapezoid(&samples, dx)
    };
    let n_l = (0..omega.len()).map(|j| column(&|r| &r.0, j)).collect();
    let n_r = (0..omega.len()).map(|j| column(&|r| &r.1, j)).collect();
    let n_in = omega.iter().map(|&w| tables.free.momentum_density(w / v, spec)).collect();
    Ok(SpectrumCurve { omega: omega.to_vec(), n_l, n_r, n_in, t_late, warnings })
}
