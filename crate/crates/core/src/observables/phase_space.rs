use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::correlators::{CorrelatorTables, I};
use crate::model::envelope_a;
use crate::quadrature::trapezoid_weight;
use crate::{Error, Result};

/// Terms `c_i exp(-i v p τ_i)` with `τ_i = base + i step`.
#[derive(Clone, Debug, Default)]
pub(crate) struct Lattice {
    pub base: f64,
    pub step: f64,
    pub coeffs: Vec<C64>,
}

impl Lattice {
    fn eval(&self, vp: f64) -> C64 {
        let z = C64::from_polar(1.0, -vp * self.step);
        let mut acc = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * C64::from_polar(1.0, -vp * self.base)
    }

    fn mirrored(mut self) -> Self {
        self.base = -self.base;
        self.step = -self.step;
        self
    }
}

/// Scattered part of a phase-space distribution at fixed `x`, as a sum of
/// plane waves in `p`.
#[derive(Clone, Debug, Default)]
pub(crate) struct Profile {
    pub lattices: Vec<Lattice>,
}

impl Profile {
    pub fn eval(&self, vp: f64) -> C64 {
        self.lattices.iter().map(|l| l.eval(vp)).sum()
    }

    /// `∫dp` of the profile given `kernel(τ) = Σ_k w_k exp(-i v p_k τ)`.
    pub fn integrate(&self, kernel: impl Fn(f64) -> C64) -> C64 {
        let mut sum = C64::new(0.0, 0.0);
        for l in &self.lattices {
            for (i, &c) in l.coeffs.iter().enumerate() {
                if c != C64::new(0.0, 0.0) {
                    sum += c * kernel(l.base + i as f64 * l.step);
                }
            }
        }
        sum
    }
}

pub(crate) fn check_snapshot(tables: &CorrelatorTables, t: f64) -> Result<usize> {
    if !(t >= 0.0) || t > tables.t_max() * (1.0 + 1e-12) {
        return Err(Error::Usage(format!("snapshot time {t} outside the tables' range [0, {}]", tables.t_max())));
    }
    tables.grid.node_index(t).ok_or_else(|| {
        Error::Usage(format!("snapshot time {t} is not a node of the time grid (dt = {})", tables.grid.dt))
    })
}

fn is_origin(x: f64, tables: &CorrelatorTables) -> bool {
    x.abs() <= 1e-9 * tables.params.v_g * tables.grid.dt
}

/// `(Γ/4π) ∫_{-2|x|/v}^{2|x|/v} dτ exp(-i v p τ) G(t' + τ/2, t' - τ/2)` as a lattice
/// in `τ`; at `x = 0` only the `τ = 0` sample is kept, with half weight.
fn reemission(tables: &CorrelatorTables, x: f64, t_prime: f64) -> Vec<Lattice> {
    let table = &tables.correlation;
    let v = tables.params.v_g;
    let h = table.spacing();
    let pref = tables.params.gamma / (4.0 * PI);
    if t_prime < 0.0 || pref == 0.0 {
        return Vec::new();
    }
    let on_node = {
        let r = t_prime / h;
        ((r - r.round()).abs() < 1e-9).then_some(r.round() as usize)
    };
    let sample = |j: i64| -> C64 {
        let off = j as f64 * h;
        if t_prime - off.abs() < -1e-12 * h {
            return C64::new(0.0, 0.0);
        }
        match on_node {
            Some(c) => table.get((c as i64 + j) as usize, (c as i64 - j) as usize),
            None => table.at(t_prime + off, t_prime - off),
        }
    };
    if is_origin(x, tables) {
        return vec![Lattice { base: 0.0, step: 0.0, coeffs: vec![pref * h * sample(0)] }];
    }
    let span = x.abs() / (v * h);
    let mut big_j = (span + 1e-9).floor() as i64;
    let mut r = span - big_j as f64;
    if r < 1e-9 {
        r = 0.0;
    }
    if r > 1.0 - 1e-9 {
        big_j += 1;
        r = 0.0;
    }
    let limit = (t_prime / h + 1e-9).floor() as i64 + 1;
    let jmax = big_j.min(limit);
    let full = jmax == big_j;
    let end_weight = if big_j == 0 { r } else { 0.5 + 0.5 * r };
    let coeffs = (-jmax..=jmax)
        .map(|j| {
            let w = if full && j.abs() == big_j { end_weight } else { 1.0 };
            pref * 2.0 * h * w * sample(j)
        })
        .collect();
    let mut out = vec![Lattice { base: -2.0 * jmax as f64 * h, step: 2.0 * h, coeffs }];
    if full && r > 0.0 {
        let tau = 2.0 * x.abs() / v;
        let w = pref * 2.0 * h * 0.5 * r;
        let end = |s: f64| {
            let (a, b) = (t_prime + 0.5 * s, t_prime - 0.5 * s);
            if a < 0.0 || b < 0.0 { C64::new(0.0, 0.0) } else { table.at(a, b) }
        };
        out.push(Lattice { base: -tau, step: 2.0 * tau, coeffs: vec![w * end(-tau), w * end(tau)] });
    }
    out
}

/// Field-emitter interference of the transmitted mode, `x >= 0`.
fn interference(tables: &CorrelatorTables, t_prime: f64, k_snap: usize) -> Vec<Lattice> {
    let grid = &tables.grid;
    let (spec, v) = (&tables.spec, tables.params.v_g);
    let n = k_snap + 1;
    let coeffs: Vec<C64> = (0..n)
        .map(|k| {
            let s = grid.time(k);
            let h: C64 = tables
                .channels
                .iter()
                .map(|ch| ch.weight * envelope_a(2.0 * t_prime - s - ch.delay, spec, v).conj() * ch.amplitude[k])
                .sum();
            -I / PI * grid.dt * trapezoid_weight(k, n) * h
        })
        .collect();
    if coeffs.iter().all(|c| c.norm() == 0.0) {
        return Vec::new();
    }
    let direct = Lattice { base: 2.0 * t_prime, step: -2.0 * grid.dt, coeffs };
    let conj = Lattice {
        base: -2.0 * t_prime,
        step: 2.0 * grid.dt,
        coeffs: direct.coeffs.iter().map(|c| c.conj()).collect(),
    };
    vec![direct, conj]
}

/// Scattered part of `f_l` at `x`; empty for `x < 0`.
pub(crate) fn profile_l(tables: &CorrelatorTables, x: f64, t: f64, k_snap: usize) -> Profile {
    if x < 0.0 && !is_origin(x, tables) {
        return Profile::default();
    }
    let t_prime = t - x / tables.params.v_g;
    let mut lattices = reemission(tables, x, t_prime);
    lattices.extend(interference(tables, t_prime, k_snap));
    Profile { lattices }
}

/// `f_r` at `x`; empty for `x > 0`.
pub(crate) fn profile_r(tables: &CorrelatorTables, x: f64, t: f64) -> Profile {
    if x > 0.0 && !is_origin(x, tables) {
        return Profile::default();
    }
    let t_prime = t + x / tables.params.v_g;
    Profile { lattices: reemission(tables, x, t_prime).into_iter().map(Lattice::mirrored).collect() }
}

/// Transmitted-mode distribution `⟨f_l(x, p)⟩` at time `t`.
///
/// Free propagation for `x < 0`; for `x > 0` the re-emitted and interference
/// terms are added. `t` must be a node of the tables' time grid.
pub fn phase_space_l(x: f64, p: f64, t: f64, tables: &CorrelatorTables) -> Result<f64> {
    let k = check_snapshot(tables, t)?;
    let free = tables.free.phase_space(x, p, t, &tables.spec, tables.params.v_g);
    Ok(free + profile_l(tables, x, t, k).eval(tables.params.v_g * p).re)
}

/// Reflected-mode distribution `⟨f_r(x, p)⟩` at time `t`, zero for `x > 0`.
pub fn phase_space_r(x: f64, p: f64, t: f64, tables: &CorrelatorTables) -> Result<f64> {
    check_snapshot(tables, t)?;
    Ok(profile_r(tables, x, t).eval(tables.params.v_g * p).re)
}

/// Both distributions sampled on a rectangular grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceField {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub t_snap: f64,
    /// `f_l[i][j]` at `(x[i], p[j])`.
    pub f_l: Vec<Vec<f64>>,
    pub f_r: Vec<Vec<f64>>,
    /// Largest imaginary part discarded, relative to the largest `|f|`.
    pub imaginary_residue: f64,
}

impl PhaseSpaceField {
    pub fn min_l(&self) -> f64 {
        self.f_l.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_l(&self) -> f64 {
        self.f_l.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_r(&self) -> f64 {
        self.f_r.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_r(&self) -> f64 {
        self.f_r.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluates `f_l` and `f_r` on `x × p`, in parallel over `x`.
pub fn phase_space_field(tables: &CorrelatorTables, x: &[f64], p: &[f64], t: f64) -> Result<PhaseSpaceField> {
    let k = check_snapshot(tables, t)?;
    let v = tables.params.v_g;
    let rows: Vec<(Vec<f64>, Vec<f64>, f64, f64)> = x
        .par_iter()
        .map(|&xi| {
            let pl = profile_l(tables, xi, t, k);
            let pr = profile_r(tables, xi, t);
            let (mut fl, mut fr) = (Vec::with_capacity(p.len()), Vec::with_capacity(p.len()));
            let (mut imag, mut max) = (0.0f64, 0.0f64);
            for &pj in p {
                let free = tables.free.phase_space(xi, pj, t, &tables.spec, v);
                let l = free + pl.eval(v * pj);
                let r = pr.eval(v * pj);
                imag = imag.max(l.im.abs()).max(r.im.abs());
                max = max.max(l.re.abs()).max(r.re.abs());
                fl.push(l.re);
                fr.push(r.re);
            }
            (fl, fr, imag, max)
        })
        .collect();
    let imag = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let max = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    let (f_l, f_r) = rows.into_iter().map(|(l, r, _, _)| (l, r)).unzip();
    Ok(PhaseSpaceField {
        x: x.to_vec(),
        p: p.to_vec(),
        t_snap: t,
        f_l,
        f_r,
        imaginary_residue: if max > 0.0 { imag / max } else { 0.0 },
    })
}

/// Symmetric positions `i Δx`, `|i Δx| <= extent`, with `Δx` a multiple of the
/// distance light travels in one table spacing, so that every retarded time
/// `t ∓ x/v_g` falls on a stored node. About `points` positions are produced.
pub fn aligned_positions(extent: f64, points: usize, tables: &CorrelatorTables) -> Vec<f64> {
    let unit = tables.params.v_g * tables.correlation.spacing();
    let wanted = 2.0 * extent / (points.max(3) - 1) as f64;
    let step = unit * (wanted / unit).round().max(1.0);
    let half = (extent / step + 1e-9).floor() as i64;
    (-half..=half).map(|i| i as f64 * step).collect()
}
