//! Brute-force reference: the waveguide is discretised into `M` modes per
//! direction and the Schrödinger equation is integrated directly in the
//! one- and two-excitation sectors.
//!
//! Amplitudes are kept in the interaction picture of the free Hamiltonian
//! `Δσ₊σ₋ + Σ_d ω_d a†_d a_d`, so the couplings carry the phases
//! `u_d(t) = exp(i (ω_d - Δ) t)`. Mode `d < M` is the `l`-mode with momentum
//! `p_d`, mode `M + d` the `r`-mode with the same detuning `ω_d = v_g p_d`.
//!
//! The two-photon part is stored as the symmetric matrix `F` of
//! `½ Σ_ab F_ab a†_a a†_b |0⟩`, packed by rows of its upper triangle.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::correlators::I;
use crate::model::{amplitude_alpha, amplitude_beta, ModelParams, PulseSpec, TimeGrid};
use crate::{Error, Result};

/// Discretised waveguide: `M` midpoint modes on `[-p_max, p_max]` per direction.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteModel {
    pub params: ModelParams,
    pub modes: usize,
    pub p_max: f64,
    pub dp: f64,
    pub momenta: Vec<f64>,
    /// Per-mode coupling `g √dp`.
    pub g_disc: f64,
}

impl DiscreteModel {
    pub fn new(params: &ModelParams, modes: usize, p_max: f64) -> Result<Self> {
        params.validate()?;
        if modes < 2 || !(p_max > 0.0) {
            return Err(Error::Configuration(format!("need at least 2 modes and p_max > 0, got {modes}, {p_max}")));
        }
        let dp = 2.0 * p_max / modes as f64;
        let momenta = (0..modes).map(|j| -p_max + (j as f64 + 0.5) * dp).collect();
        Ok(Self { params: *params, modes, p_max, dp, momenta, g_disc: params.coupling() * dp.sqrt() })
    }

    /// Number of modes in both directions.
    pub fn total_modes(&self) -> usize {
        2 * self.modes
    }

    fn frequency(&self, d: usize) -> f64 {
        self.params.v_g * self.momenta[d % self.modes]
    }

    fn is_reflected(&self, d: usize) -> bool {
        d >= self.modes
    }

    /// Time after which the discrete spectrum revives, `2π / (v_g dp)`.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / (self.params.v_g * self.dp)
    }

    /// `w_d = g_d u_d(t)`.
    fn couplings(&self, t: f64, out: &mut [C64]) {
        for (d, w) in out.iter_mut().enumerate() {
            *w = C64::from_polar(self.g_disc, (self.frequency(d) - self.params.delta) * t);
        }
    }

    fn check_pulse(&self, spec: &PulseSpec) -> Result<()> {
        if self.p_max * spec.width < 8.0 - 1e-12 {
            return Err(Error::Configuration(format!(
                "momentum window ±{} does not hold the pulse bandwidth; need p_max >= {}",
                self.p_max,
                8.0 / spec.width
            )));
        }
        Ok(())
    }
}

/// State restricted to one or two excitations.
#[derive(Clone, Debug, PartialEq)]
pub enum SectorState {
    /// `e |e,0⟩ + Σ_d b_d |g,1_d⟩`.
    One { excited: C64, photons: Vec<C64> },
    /// `Σ_d E_d |e,1_d⟩ + ½ Σ_ab F_ab a†_a a†_b |g,0⟩`.
    Two { excited: Vec<C64>, pairs: Vec<C64> },
}

#[inline]
fn packed(a: usize, b: usize, n: usize) -> usize {
    debug_assert!(a <= b);
    a * n - a * (a + 1) / 2 + b
}

impl SectorState {
    pub fn norm_sqr(&self) -> f64 {
        match self {
            SectorState::One { excited, photons } => excited.norm_sqr() + photons.iter().map(|b| b.norm_sqr()).sum::<f64>(),
            SectorState::Two { excited, pairs } => {
                let n = excited.len();
                let mut s: f64 = excited.iter().map(|e| e.norm_sqr()).sum();
                for a in 0..n {
                    let row = packed(a, a, n);
                    s += 0.5 * pairs[row].norm_sqr();
                    s += pairs[row + 1..row + n - a].iter().map(|f| f.norm_sqr()).sum::<f64>();
                }
                s
            }
        }
    }

    /// `⟨σ₊σ₋⟩`.
    pub fn excitation(&self) -> f64 {
        match self {
            SectorState::One { excited, .. } => excited.norm_sqr(),
            SectorState::Two { excited, .. } => excited.iter().map(|e| e.norm_sqr()).sum(),
        }
    }

    /// Mean photon numbers `(N_l, N_r)`.
    pub fn photon_numbers(&self, disc: &DiscreteModel) -> (f64, f64) {
        let m = disc.modes;
        match self {
            SectorState::One { photons, .. } => {
                (photons[..m].iter().map(|b| b.norm_sqr()).sum(), photons[m..].iter().map(|b| b.norm_sqr()).sum())
            }
            SectorState::Two { excited, pairs } => {
                let n = excited.len();
                let mut counts = [0.0f64; 2];
                for (d, e) in excited.iter().enumerate() {
                    counts[disc.is_reflected(d) as usize] += e.norm_sqr();
                }
                for a in 0..n {
                    for b in a..n {
                        let f = pairs[packed(a, b, n)].norm_sqr();
                        if a == b {
                            counts[disc.is_reflected(a) as usize] += f;
                        } else {
                            counts[disc.is_reflected(a) as usize] += f;
                            counts[disc.is_reflected(b) as usize] += f;
                        }
                    }
                }
                (counts[0], counts[1])
            }
        }
    }
}

/// Discretised input state of `spec`: one photon in the leading packet, or
/// the normalised pair `ν a†_α a†_β |0⟩` for two photons.
pub fn build_initial_state(spec: &PulseSpec, disc: &DiscreteModel) -> Result<SectorState> {
    spec.validate()?;
    disc.check_pulse(spec)?;
    let m = disc.modes;
    let n = disc.total_modes();
    let root = disc.dp.sqrt();
    let alpha: Vec<C64> = disc.momenta.iter().map(|&p| amplitude_alpha(p, spec) * root).collect();
    match spec.n_photons {
        1 => {
            let mut photons = vec![C64::new(0.0, 0.0); n];
            photons[..m].copy_from_slice(&alpha);
            let norm = photons.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
            photons.iter_mut().for_each(|b| *b /= norm);
            Ok(SectorState::One { excited: C64::new(0.0, 0.0), photons })
        }
        2 => {
            let beta: Vec<C64> = disc.momenta.iter().map(|&p| amplitude_beta(p, spec) * root).collect();
            let mut pairs = vec![C64::new(0.0, 0.0); n * (n + 1) / 2];
            for a in 0..m {
                for b in a..m {
                    pairs[packed(a, b, n)] = alpha[a] * beta[b] + alpha[b] * beta[a];
                }
            }
            let mut state = SectorState::Two { excited: vec![C64::new(0.0, 0.0); n], pairs };
            let norm = state.norm_sqr().sqrt();
            if let SectorState::Two { pairs, .. } = &mut state {
                pairs.iter_mut().for_each(|f| *f /= norm);
            }
            Ok(state)
        }
        k => Err(Error::Configuration(format!("the discrete-mode propagator handles 1 or 2 photons, not {k}"))),
    }
}

/// Emitter excited, field empty.
pub fn excited_state(disc: &DiscreteModel) -> SectorState {
    SectorState::One { excited: C64::new(1.0, 0.0), photons: vec![C64::new(0.0, 0.0); disc.total_modes()] }
}

/// Normalisation of the discretised pair without explicit rescaling, to be
/// compared with `ν`.
pub fn discrete_nu(spec: &PulseSpec, disc: &DiscreteModel) -> f64 {
    let (mut na, mut nb, mut ab) = (0.0, 0.0, C64::new(0.0, 0.0));
    for &p in &disc.momenta {
        let (a, b) = (amplitude_alpha(p, spec), amplitude_beta(p, spec));
        na += a.norm_sqr() * disc.dp;
        nb += b.norm_sqr() * disc.dp;
        ab += a.conj() * b * disc.dp;
    }
    (na * nb + ab.norm_sqr()).sqrt().recip()
}

struct Workspace {
    w: Vec<C64>,
    k: [SectorState; 4],
    tmp: SectorState,
}

impl Workspace {
    fn new(state: &SectorState, disc: &DiscreteModel) -> Self {
        let zero = zeroed(state);
        Self {
            w: vec![C64::new(0.0, 0.0); disc.total_modes()],
            k: [zero.clone(), zero.clone(), zero.clone(), zero.clone()],
            tmp: zero,
        }
    }
}

fn zeroed(state: &SectorState) -> SectorState {
    match state {
        SectorState::One { photons, .. } => {
            SectorState::One { excited: C64::new(0.0, 0.0), photons: vec![C64::new(0.0, 0.0); photons.len()] }
        }
        SectorState::Two { excited, pairs } => SectorState::Two {
            excited: vec![C64::new(0.0, 0.0); excited.len()],
            pairs: vec![C64::new(0.0, 0.0); pairs.len()],
        },
    }
}

/// `dψ/dt = -i V(t) ψ` with couplings `w`.
fn derivative(w: &[C64], y: &SectorState, dy: &mut SectorState) {
    match (y, dy) {
        (SectorState::One { excited, photons }, SectorState::One { excited: de, photons: db }) => {
            let mut acc = C64::new(0.0, 0.0);
            for ((wd, b), dbd) in w.iter().zip(photons).zip(db.iter_mut()) {
                acc += wd.conj() * b;
                *dbd = -I * wd * excited;
            }
            *de = -I * acc;
        }
        (SectorState::Two { excited, pairs }, SectorState::Two { excited: de, pairs: df }) => {
            let n = excited.len();
            de.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
            let mut row = 0;
            for a in 0..n {
                let len = n - a;
                let (ea, wa, ca) = (excited[a], w[a], w[a].conj());
                let frow = &pairs[row..row + len];
                let dfrow = &mut df[row..row + len];
                let mut acc = ca * frow[0];
                dfrow[0] = -I * (wa * ea * 2.0);
                let (wt, et, dt_) = (&w[a + 1..], &excited[a + 1..], &mut de[a + 1..]);
                for i in 0..len - 1 {
                    let f = frow[i + 1];
                    acc += wt[i].conj() * f;
                    dt_[i] += ca * f;
                    dfrow[i + 1] = -I * (wt[i] * ea + wa * et[i]);
                }
                de[a] += acc;
                row += len;
            }
            de.iter_mut().for_each(|x| *x *= -I);
        }
        _ => unreachable!("sector mismatch"),
    }
}

fn axpy(out: &mut SectorState, y: &SectorState, k: &SectorState, h: f64) {
    fn lin(o: &mut [C64], y: &[C64], k: &[C64], h: f64) {
        for ((o, y), k) in o.iter_mut().zip(y).zip(k) {
            *o = y + k * h;
        }
    }
    match (out, y, k) {
        (SectorState::One { excited: o, photons: op }, SectorState::One { excited: y, photons: yp }, SectorState::One { excited: k, photons: kp }) => {
            *o = y + k * h;
            lin(op, yp, kp, h);
        }
        (SectorState::Two { excited: o, pairs: op }, SectorState::Two { excited: y, pairs: yp }, SectorState::Two { excited: k, pairs: kp }) => {
            lin(o, y, k, h);
            lin(op, yp, kp, h);
        }
        _ => unreachable!("sector mismatch"),
    }
}

fn parts(s: &SectorState) -> (&[C64], &[C64]) {
    match s {
        SectorState::One { excited, photons } => (std::slice::from_ref(excited), photons.as_slice()),
        SectorState::Two { excited, pairs } => (excited.as_slice(), pairs.as_slice()),
    }
}

fn combine(y: &mut SectorState, k: &[SectorState; 4], h: f64) {
    fn comb(y: &mut [C64], k: [&[C64]; 4], h: f64) {
        for i in 0..y.len() {
            y[i] += (k[0][i] + (k[1][i] + k[2][i]) * 2.0 + k[3][i]) * (h / 6.0);
        }
    }
    let (k0, k1, k2, k3) = (parts(&k[0]), parts(&k[1]), parts(&k[2]), parts(&k[3]));
    let (head, tail) = match y {
        SectorState::One { excited, photons } => (std::slice::from_mut(excited), photons.as_mut_slice()),
        SectorState::Two { excited, pairs } => (excited.as_mut_slice(), pairs.as_mut_slice()),
    };
    comb(head, [k0.0, k1.0, k2.0, k3.0], h);
    comb(tail, [k0.1, k1.1, k2.1, k3.1], h);
}

fn rk4_step(disc: &DiscreteModel, ws: &mut Workspace, y: &mut SectorState, t: f64, h: f64) {
    let Workspace { w, k, tmp } = ws;
    disc.couplings(t, w);
    derivative(w, y, &mut k[0]);
    disc.couplings(t + 0.5 * h, w);
    axpy(tmp, y, &k[0], 0.5 * h);
    derivative(w, tmp, &mut k[1]);
    axpy(tmp, y, &k[1], 0.5 * h);
    derivative(w, tmp, &mut k[2]);
    disc.couplings(t + h, w);
    axpy(tmp, y, &k[2], h);
    derivative(w, tmp, &mut k[3]);
    combine(y, k, h);
}

/// Observables recorded on every node of a propagation.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub excitation: Vec<f64>,
    pub n_l: Vec<f64>,
    pub n_r: Vec<f64>,
    /// Largest `|‖ψ‖² - ‖ψ(0)‖²|` seen.
    pub norm_drift: f64,
}

/// Result of [`propagate`].
#[derive(Clone, Debug)]
pub struct Propagation {
    pub trajectory: Trajectory,
    /// States at the requested nodes, in request order.
    pub snapshots: Vec<SectorState>,
    pub final_state: SectorState,
}

/// Integrates `state` from `t = 0` over `grid` with fixed-step RK4 (no
/// renormalisation). Fails when the norm drifts by more than `1e-6` or the
/// grid outlasts the recurrence time of the discrete spectrum.
pub fn propagate(state: &SectorState, disc: &DiscreteModel, grid: &TimeGrid, snapshots: &[usize]) -> Result<Propagation> {
    propagate_from(state, disc, 0.0, grid.dt, grid.steps, snapshots, true)
}

fn propagate_from(
    state: &SectorState,
    disc: &DiscreteModel,
    t0: f64,
    dt: f64,
    steps: usize,
    snapshots: &[usize],
    record_numbers: bool,
) -> Result<Propagation> {
    let t_end = t0 + dt * steps as f64;
    if t_end > 0.9 * disc.recurrence_time() {
        return Err(Error::Configuration(format!(
            "propagation to t = {t_end} exceeds the recurrence time {} of the discrete waveguide; use more modes",
            disc.recurrence_time()
        )));
    }
    let mut y = state.clone();
    let norm0 = y.norm_sqr();
    let mut ws = Workspace::new(&y, disc);
    let mut traj = Trajectory::default();
    let mut shots: Vec<Option<SectorState>> = vec![None; snapshots.len()];
    let mut record = |k: usize, y: &SectorState, traj: &mut Trajectory| {
        traj.times.push(t0 + dt * k as f64);
        traj.excitation.push(y.excitation());
        if record_numbers {
            let (l, r) = y.photon_numbers(disc);
            traj.n_l.push(l);
            traj.n_r.push(r);
        }
        traj.norm_drift = traj.norm_drift.max((y.norm_sqr() - norm0).abs());
        for (slot, &want) in shots.iter_mut().zip(snapshots) {
            if want == k {
                *slot = Some(y.clone());
            }
        }
    };
    record(0, &y, &mut traj);
    for k in 0..steps {
        rk4_step(disc, &mut ws, &mut y, t0 + dt * k as f64, dt);
        record(k + 1, &y, &mut traj);
    }
    if traj.norm_drift > 1e-6 {
        return Err(Error::Numerical(format!("norm drifted by {:.3e}; reduce the time step", traj.norm_drift)));
    }
    let snapshots = shots
        .into_iter()
        .zip(snapshots)
        .map(|(s, k)| s.ok_or_else(|| Error::Usage(format!("snapshot node {k} beyond the grid"))))
        .collect::<Result<_>>()?;
    Ok(Propagation { trajectory: traj, snapshots, final_state: y })
}

/// `⟨0|σ₋(t)σ₋(t')|2⟩` for `t = t' + i dt`, `i = 0..=steps`, from the
/// two-photon state at `t'`: the emitter is lowered and the resulting
/// one-excitation state is propagated on.
pub fn emission_amplitude(state_at: &SectorState, t_prime: f64, disc: &DiscreteModel, dt: f64, steps: usize) -> Result<Vec<C64>> {
    let SectorState::Two { excited, .. } = state_at else {
        return Err(Error::Usage("emission amplitudes need a two-photon state".into()));
    };
    let delta = disc.params.delta;
    let lowered = SectorState::One {
        excited: C64::new(0.0, 0.0),
        photons: excited.iter().map(|e| e * C64::from_polar(1.0, -delta * t_prime)).collect(),
    };
    let t_end = t_prime + dt * steps as f64;
    if t_end > 0.9 * disc.recurrence_time() {
        return Err(Error::Configuration(format!("t = {t_end} exceeds the recurrence time of the discrete waveguide")));
    }
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = lowered;
    let mut ws = Workspace::new(&y, disc);
    out.push(C64::new(0.0, 0.0));
    for k in 0..steps {
        let t = t_prime + dt * k as f64;
        rk4_step(disc, &mut ws, &mut y, t, dt);
        if let SectorState::One { excited, .. } = &y {
            out.push(excited * C64::from_polar(1.0, -delta * (t + dt)));
        }
    }
    Ok(out)
}

/// Decay rate of an initially excited emitter, from a least-squares fit of
/// `ln⟨σ₊σ₋⟩` over `t ∈ [1/Γ, 4/Γ]`.
pub fn fitted_decay_rate(disc: &DiscreteModel, dt: f64) -> Result<f64> {
    let gamma = disc.params.gamma;
    if !(gamma > 0.0) {
        return Err(Error::Configuration("decay fit needs Γ > 0".into()));
    }
    let grid = TimeGrid::new(dt, 4.0 / gamma)?;
    let run = propagate(&excited_state(disc), disc, &grid, &[])?;
    let pts: Vec<(f64, f64)> = run
        .trajectory
        .times
        .iter()
        .zip(&run.trajectory.excitation)
        .filter(|(t, _)| **t >= 1.0 / gamma)
        .map(|(t, p)| (*t, p.ln()))
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    Ok(-sxy / sxx)
}

/// One-body density matrix `⟨a†_j a_k⟩` of the `l`-modes at time `t`
/// (Schrödinger picture).
pub fn transmitted_density_matrix(state: &SectorState, disc: &DiscreteModel, t: f64) -> Vec<Vec<C64>> {
    let m = disc.modes;
    let mut rho = vec![vec![C64::new(0.0, 0.0); m]; m];
    match state {
        SectorState::One { photons, .. } => {
            for j in 0..m {
                for k in 0..m {
                    rho[j][k] = photons[j].conj() * photons[k];
                }
            }
        }
        SectorState::Two { excited, pairs } => {
            let n = excited.len();
            let f = |a: usize, b: usize| {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                pairs[packed(lo, hi, n)]
            };
            for j in 0..m {
                for k in 0..m {
                    let mut s = excited[j].conj() * excited[k];
                    for b in 0..n {
                        s += f(j, b).conj() * f(k, b);
                    }
                    rho[j][k] = s;
                }
            }
        }
    }
    for j in 0..m {
        for k in 0..m {
            rho[j][k] *= C64::from_polar(1.0, (disc.frequency(j) - disc.frequency(k)) * t);
        }
    }
    rho
}

/// Phase-space distribution of the `l`-modes at momentum
/// `p = (p_a + p_b)/2`, `a + b = sum`, from their density matrix.
pub fn wigner_from_density_matrix(rho: &[Vec<C64>], disc: &DiscreteModel, x: f64, sum: usize) -> (f64, f64) {
    let m = disc.modes;
    let p = -disc.p_max + (0.5 * sum as f64 + 0.5) * disc.dp;
    let mut acc = C64::new(0.0, 0.0);
    for a in sum.saturating_sub(m - 1)..=sum.min(m - 1) {
        let b = sum - a;
        let k = disc.momenta[a] - disc.momenta[b];
        acc += C64::from_polar(1.0, -k * x) * rho[a][b];
    }
    (p, acc.re / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(gamma: f64, modes: usize) -> DiscreteModel {
        DiscreteModel::new(&ModelParams::new(gamma, 0.0, 1.0).unwrap(), modes, 8.0).unwrap()
    }

    #[test]
    fn pair_state_is_normalised_and_matches_nu() {
        let d = disc(1.0, 128);
        for l in [0.0, 2.0] {
            let s = PulseSpec::new(1.0, -8.0, l, 2).unwrap();
            let st = build_initial_state(&s, &d).unwrap();
            assert!((st.norm_sqr() - 1.0).abs() < 1e-12);
            let nu = crate::model::normalization_nu(&s);
            assert!((discrete_nu(&s, &d) - nu).abs() < 1e-4, "L = {l}");
            let (nl, nr) = st.photon_numbers(&d);
            assert!((nl - 2.0).abs() < 1e-12 && nr == 0.0);
        }
    }

    #[test]
    fn uncoupled_field_is_untouched() {
        let d = disc(0.0, 64);
        let s = PulseSpec::new(1.0, -8.0, 0.0, 2).unwrap();
        let st = build_initial_state(&s, &d).unwrap();
        let run = propagate(&st, &d, &TimeGrid::new(0.05, 10.0).unwrap(), &[]).unwrap();
        assert!(run.trajectory.excitation.iter().all(|&p| p == 0.0));
        assert!(run.trajectory.n_l.iter().all(|&n| (n - 2.0).abs() < 1e-12));
        assert!(run.trajectory.n_r.iter().all(|&n| n.abs() < 1e-12));
    }

    #[test]
    fn excitation_number_is_conserved() {
        let d = disc(1.0, 64);
        let s = PulseSpec::new(1.0, -6.0, 1.0, 2).unwrap();
        let st = build_initial_state(&s, &d).unwrap();
        let run = propagate(&st, &d, &TimeGrid::new(0.005, 16.0).unwrap(), &[]).unwrap();
        let t = &run.trajectory;
        assert!(t.norm_drift < 1e-10, "{}", t.norm_drift);
        for i in 0..t.times.len() {
            assert!((t.n_l[i] + t.n_r[i] + t.excitation[i] - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn narrow_window_is_rejected() {
        let d = DiscreteModel::new(&ModelParams::new(1.0, 0.0, 1.0).unwrap(), 64, 4.0).unwrap();
        let s = PulseSpec::new(1.0, -8.0, 0.0, 1).unwrap();
        assert!(matches!(build_initial_state(&s, &d), Err(Error::Configuration(_))));
        let long = TimeGrid::new(0.1, 100.0).unwrap();
        let d = disc(1.0, 64);
        assert!(propagate(&excited_state(&d), &d, &long, &[]).is_err());
    }

    #[test]
    fn free_wigner_of_a_single_photon() {
        let d = disc(0.0, 256);
        let s = PulseSpec::new(1.0, -8.0, 0.0, 1).unwrap();
        let st = build_initial_state(&s, &d).unwrap();
        let rho = transmitted_density_matrix(&st, &d, 3.0);
        let (p, f) = wigner_from_density_matrix(&rho, &d, -5.0, 255);
        assert!(p.abs() < 1e-12);
        assert!((f - 1.0 / PI).abs() < 1e-9);
    }
}
