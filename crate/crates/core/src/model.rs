//! Physical parameters, the Gaussian input pulses and every closed-form
//! quantity of the initial state.
//!
//! Conventions: the emitter sits at `x = 0`, the `l`-mode travels towards
//! positive `x`, and a wavepacket `alpha_p` is carried into the time domain by
//! `A(t) = ∫dp exp(-i v_g p t) alpha_p`. The second packet of the two-photon
//! state is the first one displaced by `-L`, `beta_p = alpha_p exp(i p L)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{ensure, Error, Result};
use crate::quadrature::{default_momentum_grid, UniformGrid};

/// Emitter and waveguide constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Radiative decay rate into the waveguide (both directions together).
    pub gamma: f64,
    /// Emitter transition frequency minus the carrier frequency.
    pub delta: f64,
    /// Group velocity.
    pub v_g: f64,
}

impl ModelParams {
    pub fn new(gamma: f64, delta: f64, v_g: f64) -> Result<Self> {
        let p = Self { gamma, delta, v_g };
        p.validate()?;
        Ok(p)
    }

    /// Builds the parameters from the bare coupling `g`, using `Γ = 4π g² / v_g`.
    pub fn from_coupling(g: f64, delta: f64, v_g: f64) -> Result<Self> {
        ensure(v_g > 0.0, "v_g", v_g, "group velocity must be positive")?;
        Self::new(4.0 * PI * g * g / v_g, delta, v_g)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.gamma.is_finite() && self.gamma >= 0.0, "gamma", self.gamma, "decay rate must be finite and non-negative")?;
        ensure(self.delta.is_finite(), "delta", self.delta, "detuning must be finite")?;
        ensure(self.v_g.is_finite() && self.v_g > 0.0, "v_g", self.v_g, "group velocity must be positive")?;
        Ok(())
    }

    /// Waveguide-emitter coupling `g = sqrt(Γ v_g / 4π)`.
    pub fn coupling(&self) -> f64 {
        (self.gamma * self.v_g / (4.0 * PI)).sqrt()
    }

    /// Pulse bandwidth `Ω = v_g / w`.
    pub fn bandwidth(&self, spec: &PulseSpec) -> f64 {
        self.v_g / spec.width
    }

    /// `iΔ + Γ/2`, the complex damping of the lowering operator.
    pub(crate) fn kappa(&self) -> C64 {
        C64::new(0.5 * self.gamma, self.delta)
    }
}

/// Geometry of the Gaussian input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSpec {
    /// Spatial width `w`.
    pub width: f64,
    /// Initial centre of the leading packet (negative: left of the emitter).
    pub x0: f64,
    /// Separation `L` between the two packets of the two-photon state.
    pub separation: f64,
    /// Photon number of the input Fock state.
    pub n_photons: usize,
}

impl PulseSpec {
    pub fn new(width: f64, x0: f64, separation: f64, n_photons: usize) -> Result<Self> {
        let s = Self { width, x0, separation, n_photons };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.width.is_finite() && self.width > 0.0, "width", self.width, "pulse width must be positive")?;
        ensure(self.x0.is_finite() && self.x0 < 0.0, "x0", self.x0, "pulse must start left of the emitter")?;
        ensure(
            self.x0.abs() >= 6.0 * self.width,
            "x0",
            self.x0,
            "pulse must start at least 6 widths from the emitter",
        )?;
        ensure(self.separation.is_finite() && self.separation >= 0.0, "separation", self.separation, "separation must be non-negative")?;
        ensure(self.n_photons >= 1, "n_photons", self.n_photons as f64, "photon number must be positive")?;
        Ok(())
    }

    /// Same geometry with a different photon number.
    pub fn with_photons(mut self, n: usize) -> Self {
        self.n_photons = n;
        self
    }

    /// Same geometry with a different separation.
    pub fn with_separation(mut self, separation: f64) -> Self {
        self.separation = separation;
        self
    }
}

/// Uniform time grid `t_k = k dt`, `k = 0..=steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    /// Grid ending exactly at `t_max` whose step does not exceed `dt`.
    pub fn new(dt: f64, t_max: f64) -> Result<Self> {
        ensure(dt.is_finite() && dt > 0.0, "dt", dt, "time step must be positive")?;
        ensure(t_max.is_finite() && t_max > 0.0, "t_max", t_max, "end time must be positive")?;
        let steps = ((t_max / dt) - 1e-9).ceil().max(1.0) as usize;
        Ok(Self { dt: t_max / steps as f64, steps })
    }

    /// Grid with the default step `min(w/v_g, 1/Γ, 1/(|Δ|+Ω)) / 50`.
    pub fn with_default_step(params: &ModelParams, spec: &PulseSpec, t_max: f64) -> Result<Self> {
        Self::new(Self::default_step(params, spec), t_max)
    }

    /// Shortest time scale among pulse transit, decay and detuning oscillation.
    pub fn fastest_scale(params: &ModelParams, spec: &PulseSpec) -> f64 {
        let transit = spec.width / params.v_g;
        let decay = if params.gamma > 0.0 { 1.0 / params.gamma } else { f64::INFINITY };
        let detuning = 1.0 / (params.delta.abs() + params.bandwidth(spec));
        transit.min(decay).min(detuning)
    }

    pub fn default_step(params: &ModelParams, spec: &PulseSpec) -> f64 {
        Self::fastest_scale(params, spec) / 50.0
    }

    /// Rejects steps longer than the fastest time scale of the problem.
    pub fn check_resolution(&self, params: &ModelParams, spec: &PulseSpec) -> Result<()> {
        let limit = Self::fastest_scale(params, spec);
        if self.dt > limit {
            return Err(Error::Configuration(format!(
                "time step {} exceeds the fastest time scale {limit}; use dt <= {}",
                self.dt,
                Self::default_step(params, spec)
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.steps)
    }

    /// Number of nodes, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the node at time `t`, if `t` lies on the grid.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        let r = t / self.dt;
        let k = r.round();
        if (r - k).abs() < 1e-7 && k >= 0.0 && (k as usize) <= self.steps {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Same end time with the step halved.
    pub fn refined(&self) -> Self {
        Self { dt: self.dt / 2.0, steps: self.steps * 2 }
    }
}

/// Momentum amplitude of the leading packet,
/// `w^{1/2} π^{-1/4} exp(-w² p² / 2 - i p x0)`.
pub fn amplitude_alpha(p: f64, spec: &PulseSpec) -> C64 {
    let w = spec.width;
    let norm = w.sqrt() / PI.powf(0.25);
    C64::from_polar(norm * (-0.5 * w * w * p * p).exp(), -p * spec.x0)
}

/// Momentum amplitude of the trailing packet, `alpha_p exp(i p L)`.
pub fn amplitude_beta(p: f64, spec: &PulseSpec) -> C64 {
    amplitude_alpha(p, spec) * C64::from_polar(1.0, p * spec.separation)
}

/// Time-domain envelope of the leading packet at the emitter, closed form
/// `√2 π^{1/4} w^{-1/2} exp(-(x0 + v_g t)² / 2w²)`.
pub fn envelope_a(t: f64, spec: &PulseSpec, v_g: f64) -> C64 {
    let w = spec.width;
    let peak = 2f64.sqrt() * PI.powf(0.25) / w.sqrt();
    let u = (spec.x0 + v_g * t) / w;
    C64::new(peak * (-0.5 * u * u).exp(), 0.0)
}

/// Envelope of the trailing packet, `B(t) = A(t - L/v_g)`.
pub fn envelope_b(t: f64, spec: &PulseSpec, v_g: f64) -> C64 {
    envelope_a(t - spec.separation / v_g, spec, v_g)
}

fn envelope_by_quadrature(t: f64, v_g: f64, grid: &UniformGrid, amp: impl Fn(f64) -> C64) -> C64 {
    let samples: Vec<C64> = grid
        .nodes()
        .map(|p| C64::from_polar(1.0, -v_g * p * t) * amp(p))
        .collect();
    grid.integrate(&samples)
}

/// `A(t)` by trapezoid quadrature of `∫dp exp(-i v_g p t) alpha_p`.
pub fn envelope_a_quadrature(t: f64, spec: &PulseSpec, v_g: f64, grid: &UniformGrid) -> C64 {
    envelope_by_quadrature(t, v_g, grid, |p| amplitude_alpha(p, spec))
}

/// `B(t)` by trapezoid quadrature.
pub fn envelope_b_quadrature(t: f64, spec: &PulseSpec, v_g: f64, grid: &UniformGrid) -> C64 {
    envelope_by_quadrature(t, v_g, grid, |p| amplitude_beta(p, spec))
}

/// Overlap `χ = ∫dp alpha_p* beta_p` of the two packets.
///
/// Evaluated in the time domain through Parseval, `χ = (v_g/2π) ∫dt A*(t) B(t)`,
/// where the integrand is a product of two envelopes and keeps full relative
/// accuracy even when the overlap is exponentially small.
pub fn overlap_chi(spec: &PulseSpec) -> C64 {
    let v = 1.0;
    let w = spec.width;
    let t_a = -spec.x0 / v;
    let t_b = t_a + spec.separation / v;
    let (lo, hi) = (t_a - 14.0 * w / v, t_b + 14.0 * w / v);
    let n = (((hi - lo) / (w / (40.0 * v))).ceil() as usize).max(2) + 1;
    let sum: C64 = crate::quadrature::trapezoid_fn(lo, hi, n, |t| {
        envelope_a(t, spec, v).conj() * envelope_b(t, spec, v)
    });
    sum * (v / (2.0 * PI))
}

/// `χ` by direct momentum quadrature on `grid`.
pub fn overlap_chi_momentum(spec: &PulseSpec, grid: &UniformGrid) -> C64 {
    let samples: Vec<C64> = grid
        .nodes()
        .map(|p| amplitude_alpha(p, spec).conj() * amplitude_beta(p, spec))
        .collect();
    grid.integrate(&samples)
}

/// Normalisation of the two-photon state, `ν = (1 + |χ|²)^{-1/2}`.
pub fn normalization_nu(spec: &PulseSpec) -> f64 {
    (1.0 + overlap_chi(spec).norm_sqr()).sqrt().recip()
}

/// Default momentum grid of a pulse, `[-8/w, 8/w]`.
pub fn momentum_grid(spec: &PulseSpec) -> UniformGrid {
    default_momentum_grid(spec.width)
}

/// Configuration-space wavefunction of the leading packet, freely propagated to `t`.
fn packet(x: f64, t: f64, spec: &PulseSpec, v_g: f64) -> C64 {
    envelope_a(t - x / v_g, spec, v_g) / (2.0 * PI).sqrt()
}

/// Photon density of the two-photon input at `t = 0`.
pub fn initial_density(x: f64, spec: &PulseSpec) -> f64 {
    FreeField::for_spec(spec).density(x, 0.0, spec, 1.0)
}

/// Phase-space distribution of the freely propagating two-photon input.
///
/// Depends on `(x, t)` only through `X = x - x0 - v_g t`.
pub fn free_phase_space(x: f64, p: f64, t: f64, spec: &PulseSpec, v_g: f64) -> f64 {
    let chi = overlap_chi(spec);
    let nu2 = 1.0 / (1.0 + chi.norm_sqr());
    gaussian_pair_wigner(x - spec.x0 - v_g * t, p, spec, nu2, chi)
}

fn gaussian_pair_wigner(big_x: f64, p: f64, spec: &PulseSpec, nu2: f64, chi: C64) -> f64 {
    let w = spec.width;
    let l = spec.separation;
    let g = |u: f64| (-(u * u) / (w * w)).exp();
    let cross = 2.0 * (chi * C64::from_polar(1.0, -p * l)).re;
    nu2 / PI * (-(p * p * w * w)).exp() * (g(big_x) + g(big_x + l) + cross * g(big_x + 0.5 * l))
}

/// Freely propagating part of the input field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FreeField {
    /// `n` photons in one and the same packet (single photon for `n = 1`).
    Identical { n: usize },
    /// Two packets separated by `L`, with overlap `chi` and normalisation `ν²`.
    Pair { nu2: f64, chi: C64 },
}

impl FreeField {
    /// Input described by `spec`: a pair for two photons, identical packets otherwise.
    pub fn for_spec(spec: &PulseSpec) -> Self {
        if spec.n_photons == 2 {
            let chi = overlap_chi(spec);
            FreeField::Pair { nu2: 1.0 / (1.0 + chi.norm_sqr()), chi }
        } else {
            FreeField::Identical { n: spec.n_photons }
        }
    }

    pub fn photons(&self) -> f64 {
        match *self {
            FreeField::Identical { n } => n as f64,
            FreeField::Pair { .. } => 2.0,
        }
    }

    pub fn phase_space(&self, x: f64, p: f64, t: f64, spec: &PulseSpec, v_g: f64) -> f64 {
        let big_x = x - spec.x0 - v_g * t;
        match *self {
            FreeField::Identical { n } => {
                let w = spec.width;
                n as f64 / PI * (-(p * p * w * w) - big_x * big_x / (w * w)).exp()
            }
            FreeField::Pair { nu2, chi } => gaussian_pair_wigner(big_x, p, spec, nu2, chi),
        }
    }

    /// Configuration-space density, `⟨l†(x) l(x)⟩` of the free field.
    pub fn density(&self, x: f64, t: f64, spec: &PulseSpec, v_g: f64) -> f64 {
        let a = packet(x, t, spec, v_g);
        match *self {
            FreeField::Identical { n } => n as f64 * a.norm_sqr(),
            FreeField::Pair { nu2, chi } => {
                let b = packet(x + spec.separation, t, spec, v_g);
                nu2 * (a.norm_sqr() + b.norm_sqr() + 2.0 * (chi * b.conj() * a).re)
            }
        }
    }

    /// Momentum distribution `∫dx f(x, p)` of the free field.
    pub fn momentum_density(&self, p: f64, spec: &PulseSpec) -> f64 {
        let a2 = amplitude_alpha(p, spec).norm_sqr();
        match *self {
            FreeField::Identical { n } => n as f64 * a2,
            FreeField::Pair { nu2, chi } => {
                nu2 * a2 * (2.0 + 2.0 * (chi * C64::from_polar(1.0, -p * spec.separation)).re)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::trapezoid_fn;

    fn spec(l: f64) -> PulseSpec {
        PulseSpec::new(1.0, -10.0, l, 2).unwrap()
    }

    #[test]
    fn alpha_at_zero_momentum() {
        assert!((amplitude_alpha(0.0, &spec(0.0)) - C64::new(PI.powf(-0.25), 0.0)).norm() < 1e-15);
        let wide = PulseSpec::new(2.0, -20.0, 0.0, 2).unwrap();
        assert!((amplitude_alpha(0.0, &wide).re - 2f64.sqrt() * PI.powf(-0.25)).abs() < 1e-15);
        assert!((amplitude_alpha(0.0, &spec(0.0)).re - 0.75112).abs() < 1e-5);
        assert!((amplitude_alpha(0.0, &wide).re - 1.06225).abs() < 1e-5);
    }

    #[test]
    fn alpha_is_normalised() {
        let s = spec(0.0);
        let n: f64 = trapezoid_fn(-8.0, 8.0, 2049, |p| amplitude_alpha(p, &s).norm_sqr());
        assert!((n - 1.0).abs() < 1e-9);
    }

    #[test]
    fn beta_is_phase_shifted_alpha() {
        let s = spec(3.0);
        for p in [-1.3, 0.0, 0.7] {
            let r = amplitude_beta(p, &s) / amplitude_alpha(p, &s);
            assert!((r - C64::from_polar(1.0, 3.0 * p)).norm() < 1e-14);
        }
    }

    #[test]
    fn envelope_peak_and_tail() {
        let s = spec(0.0);
        let peak = envelope_a(10.0, &s, 1.0).re;
        assert!((peak - 2f64.sqrt() * PI.powf(0.25)).abs() < 1e-14);
        assert!(envelope_a(0.0, &s, 1.0).norm() <= (-50f64).exp() * peak);
    }

    #[test]
    fn overlap_limits() {
        assert!((overlap_chi(&spec(0.0)) - 1.0).norm() < 1e-12);
        assert!((overlap_chi(&spec(2.0)).re - (-1f64).exp()).abs() < 1e-12);
        assert!(overlap_chi(&spec(20.0)).norm() < 1e-20);
        assert!(overlap_chi(&spec(20.0)).norm() > 0.0);
    }

    #[test]
    fn nu_limits() {
        assert!((normalization_nu(&spec(0.0)) - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((normalization_nu(&spec(2.0)) - 0.938507).abs() < 1e-6);
        assert!((normalization_nu(&spec(40.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn free_phase_space_peak_value() {
        let s = spec(0.0);
        let t = 3.0;
        let v = free_phase_space(s.x0 + t, 0.0, t, &s, 1.0);
        assert!((v - 2.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn initial_density_coincident_pulses() {
        let s = spec(0.0);
        assert!((initial_density(s.x0, &s) - 2.0 / PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn interference_raises_the_midpoint() {
        let s = spec(2.0);
        let mid = s.x0 - 1.0;
        let independent = |x: f64| {
            ((-(x - s.x0).powi(2)).exp() + (-(x + 2.0 - s.x0).powi(2)).exp()) / PI.sqrt()
        };
        assert!(initial_density(mid, &s) > independent(mid));
        assert!(initial_density(s.x0, &s) < independent(s.x0));
    }

    #[test]
    fn grid_rounds_step_down() {
        let g = TimeGrid::new(0.3, 1.0).unwrap();
        assert_eq!(g.steps, 4);
        assert!((g.t_max() - 1.0).abs() < 1e-15);
        assert_eq!(g.node_index(0.5), Some(2));
        assert_eq!(g.node_index(0.6), None);
        assert_eq!(g.node_index(1.25), None);
    }

    #[test]
    fn default_step_tracks_fastest_scale() {
        let s = spec(0.0);
        let p = ModelParams::new(4.0, 0.0, 1.0).unwrap();
        assert!((TimeGrid::default_step(&p, &s) - 0.25 / 50.0).abs() < 1e-15);
        let p = ModelParams::new(0.5, 1.0, 1.0).unwrap();
        assert!((TimeGrid::default_step(&p, &s) - 0.5 / 50.0).abs() < 1e-15);
        let g = TimeGrid::new(0.2, 10.0).unwrap();
        assert!(g.check_resolution(&p, &s).is_ok());
        let g = TimeGrid::new(0.8, 10.0).unwrap();
        assert!(g.check_resolution(&p, &s).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(PulseSpec::new(1.0, -5.0, 0.0, 2).is_err());
        assert!(PulseSpec::new(1.0, 5.0, 0.0, 2).is_err());
        assert!(PulseSpec::new(0.0, -10.0, 0.0, 2).is_err());
        assert!(PulseSpec::new(1.0, -10.0, -1.0, 2).is_err());
        assert!(PulseSpec::new(1.0, -10.0, 0.0, 0).is_err());
        assert!(ModelParams::new(-1.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn coupling_round_trip() {
        let p = ModelParams::new(1.7, 0.2, 2.5).unwrap();
        let q = ModelParams::from_coupling(p.coupling(), 0.2, 2.5).unwrap();
        assert!((p.gamma - q.gamma).abs() < 1e-14);
        assert!((p.coupling().powi(2) - 1.7 * 2.5 / (4.0 * PI)).abs() < 1e-15);
    }
}
