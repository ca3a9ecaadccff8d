use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{check_grid, Drive, EqualTimeSet, SinglePhotonAmps, TriTable, I};
use crate::model::{normalization_nu, ModelParams, PulseSpec, TimeGrid};
use crate::ode::{HalfStepSystem, Rk4};
use crate::quadrature::trapezoid_weight;
use crate::{Error, Result};

/// Which two-time tables to keep and how densely.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwoTimeOptions {
    /// Keep every `stride`-th node on both axes; must divide the step count.
    pub stride: usize,
    pub keep_g: bool,
    pub keep_d: bool,
}

impl Default for TwoTimeOptions {
    fn default() -> Self {
        Self { stride: 1, keep_g: true, keep_d: true }
    }
}

impl TwoTimeOptions {
    /// Smallest stride that keeps each table at or below `max_nodes` per axis.
    pub fn decimated(grid: &TimeGrid, max_nodes: usize) -> Result<Self> {
        let max_nodes = max_nodes.max(2);
        let stride = (1..=grid.steps)
            .filter(|s| grid.steps % s == 0)
            .find(|s| grid.steps / s + 1 <= max_nodes)
            .unwrap_or(grid.steps);
        Ok(Self { stride, ..Self::default() })
    }

    pub(crate) fn check(&self, grid: &TimeGrid) -> Result<()> {
        if self.stride == 0 || grid.steps % self.stride != 0 {
            return Err(Error::Configuration(format!(
                "table stride {} must be positive and divide the step count {}",
                self.stride, grid.steps
            )));
        }
        Ok(())
    }
}

/// `G(t, t') = ⟨σ₊(t)σ₋(t')⟩` and `D(t, t') = ⟨0|σ₋(t)σ₋(t')|2⟩` for `t >= t'`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoTimeSurfaces {
    pub grid: TimeGrid,
    pub g: Option<TriTable>,
    pub d: Option<TriTable>,
    /// `Σ_{j >= k} w_j |D(t_j, t_k)|²` per fine column `k`, trapezoid weights `w_j`
    /// of the full interval; always computed on the fine grid.
    pub d_column_sums: Vec<f64>,
}

impl TwoTimeSurfaces {
    /// `∫∫ |D(τ, τ')|² dτ dτ'` over the full square `[0, t_max]²`.
    pub fn d_square_integral(&self) -> f64 {
        let n = self.grid.len();
        let dt = self.grid.dt;
        2.0 * dt * dt * self.d_column_sums.iter().enumerate().map(|(k, s)| trapezoid_weight(k, n) * s).sum::<f64>()
    }
}

/// Column state `[C_α, C_β, G, D]` for a fixed `t'`.
struct ColumnSystem<'a> {
    drive: &'a Drive,
    kappa: C64,
    g: f64,
    nu: f64,
    ca0: C64,
    cb0: C64,
    sa0: C64,
    sb0: C64,
}

impl HalfStepSystem for ColumnSystem<'_> {
    fn dim(&self) -> usize {
        4
    }

    fn rhs(&self, half: usize, y: &[C64], dy: &mut [C64]) {
        let (a, b) = (self.drive.a[half], self.drive.b[half]);
        let kappa = self.kappa;
        let gn = self.g * self.nu;
        let (ca, cb, gg, d) = (y[0], y[1], y[2], y[3]);
        dy[0] = -kappa * ca - I * self.g * a;
        dy[1] = -kappa * cb - I * self.g * b;
        dy[2] = -kappa.conj() * gg + I * gn * (a.conj() * self.sb0 + b.conj() * self.sa0)
            - 2.0 * I * gn * (a.conj() * cb.conj() + b.conj() * ca.conj()) * d;
        dy[3] = -kappa * d - I * gn * (a * self.cb0 + b * self.ca0);
    }
}

struct Column {
    g: Vec<C64>,
    d: Vec<C64>,
    d_sum: f64,
}

/// Integrates every column `t' = t_k` of the two-time surfaces forward in `t`.
///
/// Columns are independent and run in parallel; each one restarts the
/// single-photon amplitudes from their stored values at `t'`.
pub fn solve_two_time(
    params: &ModelParams,
    spec: &PulseSpec,
    grid: &TimeGrid,
    singles: &SinglePhotonAmps,
    equal_time: &EqualTimeSet,
    options: TwoTimeOptions,
) -> Result<TwoTimeSurfaces> {
    check_grid(grid, &singles.grid, "single-photon amplitudes")?;
    check_grid(grid, &equal_time.grid, "equal-time set")?;
    params.validate()?;
    spec.validate()?;
    grid.check_resolution(params, spec)?;
    options.check(grid)?;

    let drive = Drive::new(spec, params.v_g, grid);
    let (g, nu, kappa) = (params.coupling(), normalization_nu(spec), params.kappa());
    let n = grid.len();
    let stride = options.stride;

    let columns: Vec<Column> = (0..n)
        .into_par_iter()
        .map(|k| {
            let sys = ColumnSystem {
                drive: &drive,
                kappa,
                g,
                nu,
                ca0: singles.alpha[k],
                cb0: singles.beta[k],
                sa0: equal_time.s_alpha[k],
                sb0: equal_time.s_beta[k],
            };
            let stored = k % stride == 0;
            let cap = if stored { (n - k).div_ceil(stride) } else { 0 };
            let mut col = Column {
                g: Vec::with_capacity(if options.keep_g { cap } else { 0 }),
                d: Vec::with_capacity(if options.keep_d { cap } else { 0 }),
                d_sum: 0.0,
            };
            let mut y = [singles.alpha[k], singles.beta[k], C64::new(equal_time.excitation[k], 0.0), C64::new(0.0, 0.0)];
            let mut rk = Rk4::new(4);
            for j in k..n {
                if j > k {
                    rk.step(&sys, j - 1, grid.dt, &mut y);
                }
                col.d_sum += trapezoid_weight(j, n) * y[3].norm_sqr();
                if stored && (j - k) % stride == 0 {
                    if options.keep_g {
                        col.g.push(y[2]);
                    }
                    if options.keep_d {
                        col.d.push(y[3]);
                    }
                }
            }
            col
        })
        .collect();

    let d_column_sums = columns.iter().map(|c| c.d_sum).collect();
    let mut g_cols = Vec::new();
    let mut d_cols = Vec::new();
    for (k, c) in columns.into_iter().enumerate() {
        if k % stride == 0 {
            if options.keep_g {
                g_cols.push(c.g);
            }
            if options.keep_d {
                d_cols.push(c.d);
            }
        }
    }
    Ok(TwoTimeSurfaces {
        grid: *grid,
        g: options.keep_g.then(|| TriTable::from_columns(grid.dt, stride, g_cols)),
        d: options.keep_d.then(|| TriTable::from_columns(grid.dt, stride, d_cols)),
        d_column_sums,
    })
}
