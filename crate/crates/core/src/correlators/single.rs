use num_complex::Complex64 as C64;

use super::{Drive, I};
use crate::model::{envelope_a, envelope_b, ModelParams, PulseSpec, TimeGrid};
use crate::ode::{HalfStepSystem, Rk4};
use crate::Result;

/// `C_α(t) = ⟨0|σ₋(t)|1_α⟩` and `C_β(t)` on every grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct SinglePhotonAmps {
    pub grid: TimeGrid,
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
}

impl SinglePhotonAmps {
    /// `|C_α|²`, the excitation probability for a single-photon input.
    pub fn excitation(&self) -> Vec<f64> {
        self.alpha.iter().map(|c| c.norm_sqr()).collect()
    }
}

struct SingleSystem<'a> {
    drive: &'a Drive,
    kappa: C64,
    g: f64,
}

impl HalfStepSystem for SingleSystem<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, half: usize, y: &[C64], dy: &mut [C64]) {
        let (a, b) = (self.drive.a[half], self.drive.b[half]);
        dy[0] = -self.kappa * y[0] - I * self.g * a;
        dy[1] = -self.kappa * y[1] - I * self.g * b;
    }
}

/// Integrates `(∂t + iΔ + Γ/2) C = -i g A(t)` from `C(0) = 0`.
pub fn solve_single_photon(params: &ModelParams, spec: &PulseSpec, grid: &TimeGrid) -> Result<SinglePhotonAmps> {
    params.validate()?;
    spec.validate()?;
    grid.check_resolution(params, spec)?;

    let drive = Drive::new(spec, params.v_g, grid);
    let sys = SingleSystem { drive: &drive, kappa: params.kappa(), g: params.coupling() };
    let mut rk = Rk4::new(2);
    let mut y = [C64::new(0.0, 0.0); 2];
    let mut alpha = Vec::with_capacity(grid.len());
    let mut beta = Vec::with_capacity(grid.len());
    alpha.push(y[0]);
    beta.push(y[1]);
    for k in 0..grid.steps {
        rk.step(&sys, k, grid.dt, &mut y);
        alpha.push(y[0]);
        beta.push(y[1]);
    }
    Ok(SinglePhotonAmps { grid: *grid, alpha, beta })
}

/// `C_α(t)` from its integral representation
/// `-i g ∫_0^t exp(-(iΔ + Γ/2)(t - τ)) A(τ) dτ`, trapezoid with `nodes` points.
///
/// Independent of the ODE route; `trailing` selects `B` instead of `A`.
pub fn single_photon_quadrature(params: &ModelParams, spec: &PulseSpec, t: f64, nodes: usize, trailing: bool) -> C64 {
    if t <= 0.0 {
        return C64::new(0.0, 0.0);
    }
    let kappa = params.kappa();
    let integral: C64 = crate::quadrature::trapezoid_fn(0.0, t, nodes.max(2), |tau| {
        let env = if trailing { envelope_b(tau, spec, params.v_g) } else { envelope_a(tau, spec, params.v_g) };
        (-kappa * (t - tau)).exp() * env
    });
    -I * params.coupling() * integral
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(gamma: f64, l: f64) -> (ModelParams, PulseSpec, TimeGrid) {
        let p = ModelParams::new(gamma, 0.0, 1.0).unwrap();
        let s = PulseSpec::new(1.0, -10.0, l, 2).unwrap();
        let g = TimeGrid::new(0.02, 25.0).unwrap();
        (p, s, g)
    }

    #[test]
    fn no_coupling_no_amplitude() {
        let (_, s, g) = setup(0.0, 0.0);
        let p = ModelParams::new(0.0, 0.0, 1.0).unwrap();
        let c = solve_single_photon(&p, &s, &g).unwrap();
        assert!(c.alpha.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn trailing_amplitude_is_time_shifted() {
        let (p, s, g) = setup(1.0, 3.0);
        let c = solve_single_photon(&p, &s, &g).unwrap();
        let shift = g.node_index(3.0).unwrap();
        for k in shift..g.len() {
            assert!((c.beta[k] - c.alpha[k - shift]).norm() < 1e-12);
        }
    }

    #[test]
    fn ode_matches_integral_form() {
        let (p, s, g) = setup(1.0, 2.0);
        let c = solve_single_photon(&p, &s, &g).unwrap();
        let mut worst: f64 = 0.0;
        for k in (0..g.len()).step_by(25) {
            let t = g.time(k);
            let qa = single_photon_quadrature(&p, &s, t, 20_001, false);
            let qb = single_photon_quadrature(&p, &s, t, 20_001, true);
            worst = worst.max((qa - c.alpha[k]).norm()).max((qb - c.beta[k]).norm());
        }
        assert!(worst < 1e-6, "sup-norm difference {worst}");
    }

    #[test]
    fn bounded_by_one() {
        let (p, s, g) = setup(2.0, 0.0);
        let c = solve_single_photon(&p, &s, &g).unwrap();
        assert_eq!(c.alpha[0], C64::new(0.0, 0.0));
        assert!(c.excitation().iter().all(|&x| x <= 1.0));
    }

    #[test]
    fn coarse_grid_is_a_configuration_error() {
        let (p, s, _) = setup(1.0, 0.0);
        let g = TimeGrid::new(1.5, 20.0).unwrap();
        assert!(matches!(solve_single_photon(&p, &s, &g), Err(crate::Error::Configuration(_))));
    }
}
