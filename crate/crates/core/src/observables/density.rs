use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::phase_space::{check_snapshot, profile_l, profile_r};
use crate::correlators::CorrelatorTables;
use crate::quadrature::{trapezoid, UniformGrid};
use crate::Result;

/// Periodic momentum grid on which the `p`-integral of every plane wave in
/// the phase-space distributions is exact: its period is `π / (v_g dt)`, so
/// `Σ_k Δp exp(-i v_g p_k 2 m dt)` vanishes for every `0 < |m| < len`, and
/// `len` exceeds twice the largest lag reached for positions `|x| <= extent`.
pub fn conjugate_momentum_grid(tables: &CorrelatorTables, t_snap: f64, extent: f64) -> UniformGrid {
    let v = tables.params.v_g;
    let dt = tables.grid.dt;
    let period = PI / (v * dt);
    let lag = ((t_snap + extent / v) / dt).ceil() as usize + 2;
    let resolve = (period * 4.0 * tables.spec.width).ceil() as usize;
    let len = (2 * lag + 1).max(resolve) | 1;
    UniformGrid::periodic(period, len)
}

/// `∫dp f_{l,r}(x, p)` at fixed `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityProfile {
    pub x: Vec<f64>,
    pub t_snap: f64,
    pub rho_l: Vec<f64>,
    pub rho_r: Vec<f64>,
    /// Reflected density from the excitation alone, see [`reflected_density_shortcut`].
    pub rho_r_shortcut: Vec<f64>,
}

/// Photon-number bookkeeping at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhotonBalance {
    pub t: f64,
    pub n_l: f64,
    pub n_r: f64,
    pub excitation: f64,
}

impl PhotonBalance {
    pub fn total(&self) -> f64 {
        self.n_l + self.n_r + self.excitation
    }
}

impl DensityProfile {
    /// Integrates the densities over the (uniform) positions.
    pub fn balance(&self, tables: &CorrelatorTables) -> PhotonBalance {
        let dx = if self.x.len() > 1 { self.x[1] - self.x[0] } else { 0.0 };
        PhotonBalance {
            t: self.t_snap,
            n_l: trapezoid(&self.rho_l, dx),
            n_r: trapezoid(&self.rho_r, dx),
            excitation: tables.excitation_at(self.t_snap),
        }
    }
}

/// `ρ_r(x, t) = (Γ / 2v_g) ⟨σ₊σ₋⟩(t + x/v_g)` for `x < 0`, half of it at `x = 0`.
///
/// This is the exact `p`-integral of the reflected distribution: integrating
/// `exp(i v_g p τ)` over `p` leaves `(2π/v_g) δ(τ)`.
pub fn reflected_density_shortcut(x: f64, t: f64, tables: &CorrelatorTables) -> f64 {
    let v = tables.params.v_g;
    let edge = 1e-9 * v * tables.grid.dt;
    if x > edge {
        return 0.0;
    }
    let value = tables.params.gamma / (2.0 * v) * tables.excitation_at(t + x / v);
    if x >= -edge { 0.5 * value } else { value }
}

struct Kernel<'a> {
    grid: &'a UniformGrid,
    v: f64,
    unit: f64,
    cached: Vec<C64>,
    max_lag: i64,
}

impl<'a> Kernel<'a> {
    fn new(grid: &'a UniformGrid, v: f64, dt: f64, max_lag: i64) -> Self {
        let unit = 2.0 * dt;
        let cached = (-max_lag..=max_lag).into_par_iter().map(|m| grid.plane_wave_sum(v, m as f64 * unit)).collect();
        Self { grid, v, unit, cached, max_lag }
    }

    fn get(&self, tau: f64) -> C64 {
        let r = tau / self.unit;
        let m = r.round();
        if (r - m).abs() < 1e-9 && m.abs() <= self.max_lag as f64 {
            self.cached[(m as i64 + self.max_lag) as usize]
        } else {
            self.grid.plane_wave_sum(self.v, tau)
        }
    }
}

/// Densities by momentum quadrature of the distributions on `momenta`.
///
/// The sum over `p` is exchanged with the plane-wave sums of the scattered
/// terms, which is the same quadrature evaluated in a different order.
pub fn density(tables: &CorrelatorTables, x: &[f64], t: f64, momenta: &UniformGrid) -> Result<DensityProfile> {
    let k = check_snapshot(tables, t)?;
    let v = tables.params.v_g;
    let extent = x.iter().fold(0.0f64, |m, xi| m.max(xi.abs()));
    let max_lag = ((t + extent / v) / tables.grid.dt).ceil() as i64 + 2;
    let kernel = Kernel::new(momenta, v, tables.grid.dt, max_lag);
    let rows: Vec<(f64, f64)> = x
        .par_iter()
        .map(|&xi| {
            let free: Vec<f64> =
                momenta.nodes().map(|p| tables.free.phase_space(xi, p, t, &tables.spec, v)).collect();
            let l = momenta.integrate(&free) + profile_l(tables, xi, t, k).integrate(|tau| kernel.get(tau)).re;
            let r = profile_r(tables, xi, t).integrate(|tau| kernel.get(tau)).re;
            (l, r)
        })
        .collect();
    let (rho_l, rho_r) = rows.into_iter().unzip();
    Ok(DensityProfile {
        x: x.to_vec(),
        t_snap: t,
        rho_l,
        rho_r,
        rho_r_shortcut: x.iter().map(|&xi| reflected_density_shortcut(xi, t, tables)).collect(),
    })
}
