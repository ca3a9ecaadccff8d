use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{Drive, TriTable, TwoTimeOptions, TwoTimeSurfaces, I};
use crate::error::ensure;
use crate::model::{ModelParams, PulseSpec, TimeGrid};
use crate::ode::{HalfStepSystem, Rk4};
use crate::quadrature::trapezoid_weight;
use crate::Result;

/// Equal-time hierarchy for `n` photons in one packet.
///
/// Level `m` (1-based, stored at index `m - 1`) holds `P_m = ⟨m|σ₊σ₋|m⟩` and
/// `S_m = ⟨m-1|σ₋|m⟩`; level 1 is the single-photon amplitude, `S_1 = C`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockChain {
    pub grid: TimeGrid,
    pub n: usize,
    pub excitation: Vec<Vec<f64>>,
    pub s: Vec<Vec<C64>>,
}

impl FockChain {
    pub fn amplitude(&self) -> &[C64] {
        &self.s[0]
    }

    /// `P_n`, the excitation probability for the full input.
    pub fn top_excitation(&self) -> &[f64] {
        &self.excitation[self.n - 1]
    }

    pub fn top_s(&self) -> &[C64] {
        &self.s[self.n - 1]
    }
}

/// State `[C, P_2..P_n, S_2..S_n]`.
struct ChainSystem<'a> {
    drive: &'a Drive,
    params: ModelParams,
    g: f64,
    n: usize,
}

impl HalfStepSystem for ChainSystem<'_> {
    fn dim(&self) -> usize {
        2 * self.n - 1
    }

    fn rhs(&self, half: usize, y: &[C64], dy: &mut [C64]) {
        let a = self.drive.a[half];
        let kappa = self.params.kappa();
        let n = self.n;
        let c = y[0];
        dy[0] = -kappa * c - I * self.g * a;
        let (p, s) = y[1..].split_at(n - 1);
        let (dp, ds) = dy[1..].split_at_mut(n - 1);
        for m in 2..=n {
            let gm = self.g * (m as f64).sqrt();
            let i = m - 2;
            let p_below = if m == 2 { c.norm_sqr() } else { p[i - 1].re };
            dp[i] = C64::new(-self.params.gamma * p[i].re + 2.0 * (I * gm * a.conj() * s[i]).re, 0.0);
            ds[i] = -kappa * s[i] + 2.0 * I * gm * a * p_below - I * gm * a;
        }
    }
}

/// Solves the equal-time hierarchy of the `n`-photon Fock input built from
/// the leading packet of `spec` (the separation is ignored).
pub fn solve_fock_chain(params: &ModelParams, spec: &PulseSpec, grid: &TimeGrid, n: usize) -> Result<FockChain> {
    ensure(n >= 1, "n_photons", n as f64, "photon number must be positive")?;
    params.validate()?;
    spec.validate()?;
    grid.check_resolution(params, spec)?;

    let drive = Drive::new(spec, params.v_g, grid);
    let sys = ChainSystem { drive: &drive, params: *params, g: params.coupling(), n };
    let mut y = vec![C64::new(0.0, 0.0); sys.dim()];
    let mut rk = Rk4::new(sys.dim());
    let mut excitation = vec![Vec::with_capacity(grid.len()); n];
    let mut s = vec![Vec::with_capacity(grid.len()); n];
    let record = |y: &[C64], excitation: &mut Vec<Vec<f64>>, s: &mut Vec<Vec<C64>>| {
        excitation[0].push(y[0].norm_sqr());
        s[0].push(y[0]);
        for m in 2..=n {
            excitation[m - 1].push(y[m - 1].re);
            s[m - 1].push(y[n + m - 2]);
        }
    };
    record(&y, &mut excitation, &mut s);
    for k in 0..grid.steps {
        rk.step(&sys, k, grid.dt, &mut y);
        record(&y, &mut excitation, &mut s);
    }
    Ok(FockChain { grid: *grid, n, excitation, s })
}

/// Column state `[C, (G_m, K_m, D_m) for m = 2..n]` at fixed `t'`, with
/// `G_m = ⟨m|σ₊(t)σ₋(t')|m⟩`, `K_m = ⟨m-1|σ₊(t)σ₋(t)σ₋(t')|m⟩` and
/// `D_m = ⟨m-2|σ₋(t)σ₋(t')|m⟩`. Level one closes with `G_1 = C*(t) C(t')`
/// and `K_1 = D_1 = 0`.
struct ChainColumn<'a> {
    drive: &'a Drive,
    kappa: C64,
    gamma: f64,
    g: f64,
    n: usize,
    c0: C64,
    s0: Vec<C64>,
}

impl HalfStepSystem for ChainColumn<'_> {
    fn dim(&self) -> usize {
        1 + 3 * (self.n - 1)
    }

    fn rhs(&self, half: usize, y: &[C64], dy: &mut [C64]) {
        let a = self.drive.a[half];
        let kappa = self.kappa;
        let c = y[0];
        dy[0] = -kappa * c - I * self.g * a;
        let zero = C64::new(0.0, 0.0);
        for m in 2..=self.n {
            let b = 1 + 3 * (m - 2);
            let (gm, km, dm) = (y[b], y[b + 1], y[b + 2]);
            let (g_below, k_below) = if m == 2 { (c.conj() * self.c0, zero) } else { (y[b - 3], y[b - 2]) };
            let root = (m as f64).sqrt();
            let root_below = ((m - 1) as f64).sqrt();
            let coupling = self.g * root;
            dy[b] = -kappa.conj() * gm + I * coupling * a.conj() * (self.s0[m - 1] - 2.0 * km);
            dy[b + 1] = -self.gamma * km + I * self.g * root_below * a.conj() * dm - I * coupling * a * g_below;
            dy[b + 2] = -kappa * dm + 2.0 * I * coupling * a * k_below - I * coupling * a * self.s0[m - 2];
        }
    }
}

impl FockChain {
    /// Two-time surfaces of the top level, `G_n` and `D_n`, for `t >= t'`.
    ///
    /// For `n = 1` the correlation is separable and `D` vanishes.
    pub fn two_time(&self, params: &ModelParams, spec: &PulseSpec, options: TwoTimeOptions) -> Result<TwoTimeSurfaces> {
        let grid = &self.grid;
        options.check(grid)?;
        let n_nodes = grid.len();
        let stride = options.stride;
        if self.n == 1 {
            let c = self.amplitude();
            let zero = vec![C64::new(0.0, 0.0); n_nodes];
            return Ok(TwoTimeSurfaces {
                grid: *grid,
                g: options.keep_g.then(|| TriTable::separable(grid.dt, stride, c, c)),
                d: options.keep_d.then(|| TriTable::separable(grid.dt, stride, &zero, &zero)),
                d_column_sums: vec![0.0; n_nodes],
            });
        }
        params.validate()?;
        spec.validate()?;
        grid.check_resolution(params, spec)?;

        let drive = Drive::new(spec, params.v_g, grid);
        let n = self.n;
        let top = 1 + 3 * (n - 2);
        let columns: Vec<(Vec<C64>, Vec<C64>, f64)> = (0..n_nodes)
            .into_par_iter()
            .map(|k| {
                let sys = ChainColumn {
                    drive: &drive,
                    kappa: params.kappa(),
                    gamma: params.gamma,
                    g: params.coupling(),
                    n,
                    c0: self.s[0][k],
                    s0: self.s.iter().map(|s| s[k]).collect(),
                };
                let mut y = vec![C64::new(0.0, 0.0); sys.dim()];
                y[0] = self.s[0][k];
                for m in 2..=n {
                    y[1 + 3 * (m - 2)] = C64::new(self.excitation[m - 1][k], 0.0);
                }
                let stored = k % stride == 0;
                let (mut gs, mut ds, mut sum) = (Vec::new(), Vec::new(), 0.0);
                let mut rk = Rk4::new(sys.dim());
                for j in k..n_nodes {
                    if j > k {
                        rk.step(&sys, j - 1, grid.dt, &mut y);
                    }
                    sum += trapezoid_weight(j, n_nodes) * y[top + 2].norm_sqr();
                    if stored && (j - k) % stride == 0 {
                        if options.keep_g {
                            gs.push(y[top]);
                        }
                        if options.keep_d {
                            ds.push(y[top + 2]);
                        }
                    }
                }
                (gs, ds, sum)
            })
            .collect();

        let d_column_sums = columns.iter().map(|c| c.2).collect();
        let (mut g_cols, mut d_cols) = (Vec::new(), Vec::new());
        for (k, (gs, ds, _)) in columns.into_iter().enumerate() {
            if k % stride == 0 {
                if options.keep_g {
                    g_cols.push(gs);
                }
                if options.keep_d {
                    d_cols.push(ds);
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
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlators::{solve_equal_time, solve_single_photon, solve_two_time};

    fn setup(gamma: f64) -> (ModelParams, PulseSpec, TimeGrid) {
        let p = ModelParams::new(gamma, 0.0, 1.0).unwrap();
        let s = PulseSpec::new(1.0, -8.0, 0.0, 2).unwrap();
        let g = TimeGrid::new(0.04, 24.0).unwrap();
        (p, s, g)
    }

    #[test]
    fn zero_photons_is_rejected() {
        let (p, s, g) = setup(1.0);
        assert!(solve_fock_chain(&p, &s, &g, 0).is_err());
    }

    #[test]
    fn first_level_is_the_single_photon_amplitude() {
        let (p, s, g) = setup(1.0);
        let c = solve_single_photon(&p, &s, &g).unwrap();
        let f = solve_fock_chain(&p, &s, &g, 3).unwrap();
        for k in 0..g.len() {
            assert!((f.s[0][k] - c.alpha[k]).norm() < 1e-14);
            assert!((f.excitation[0][k] - c.alpha[k].norm_sqr()).abs() < 1e-14);
        }
    }

    #[test]
    fn two_photon_level_matches_the_pair_solver() {
        let (p, s, g) = setup(1.0);
        let c = solve_single_photon(&p, &s, &g).unwrap();
        let e = solve_equal_time(&p, &s, &g, &c).unwrap();
        let t = solve_two_time(&p, &s, &g, &c, &e, TwoTimeOptions::default()).unwrap();
        let f = solve_fock_chain(&p, &s, &g, 2).unwrap();
        let ft = f.two_time(&p, &s, TwoTimeOptions::default()).unwrap();
        for k in 0..g.len() {
            assert!((f.excitation[1][k] - e.excitation[k]).abs() < 1e-12);
            assert!((f.s[1][k] - e.s_alpha[k]).norm() < 1e-12);
        }
        let (a, b) = (t.g.unwrap(), ft.g.unwrap());
        let (da, db) = (t.d.unwrap(), ft.d.unwrap());
        let gmax = a.row_major().zip(b.row_major()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let dmax = da.row_major().zip(db.row_major()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(gmax < 1e-7 && dmax < 1e-12, "G {gmax:e}, D {dmax:e}");
    }

    #[test]
    fn excitation_bounded_at_every_level() {
        let (p, s, g) = setup(2.0);
        let f = solve_fock_chain(&p, &s, &g, 4).unwrap();
        for level in &f.excitation {
            assert!(level.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
        }
    }

    #[test]
    fn uncoupled_chain_is_zero() {
        let (p, s, g) = setup(0.0);
        let f = solve_fock_chain(&p, &s, &g, 3).unwrap();
        assert!(f.s.iter().flatten().all(|z| z.norm() == 0.0));
        let t = f.two_time(&p, &s, TwoTimeOptions::default()).unwrap();
        assert!(t.g.unwrap().row_major().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn diagonal_of_top_level_is_excitation() {
        let (p, s, g) = setup(1.0);
        let f = solve_fock_chain(&p, &s, &g, 3).unwrap();
        let t = f.two_time(&p, &s, TwoTimeOptions { stride: 3, keep_g: true, keep_d: true }).unwrap();
        let gt = t.g.unwrap();
        for c in 0..gt.nodes() {
            assert_eq!(gt.lower(c, c).re, f.excitation[2][3 * c]);
            assert_eq!(gt.lower(c, c).im, 0.0);
        }
    }
}
