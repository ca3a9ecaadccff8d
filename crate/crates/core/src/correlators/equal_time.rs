use num_complex::Complex64 as C64;

use super::{check_grid, Drive, SinglePhotonAmps, I};
use crate::model::{normalization_nu, overlap_chi, ModelParams, PulseSpec, TimeGrid};
use crate::ode::{HalfStepSystem, Rk4};
use crate::{Error, Result};

/// Equal-time quantities of the two-photon input `|2⟩ = ν a†_β a†_α |0⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct EqualTimeSet {
    pub grid: TimeGrid,
    /// `⟨σ₊σ₋⟩(t)`.
    pub excitation: Vec<f64>,
    /// `⟨1_α|σ₋(t)|2⟩`.
    pub s_alpha: Vec<C64>,
    /// `⟨1_β|σ₋(t)|2⟩`.
    pub s_beta: Vec<C64>,
}

/// State vector `[C_α, C_β, P, S_α, S_β]`; `P` is carried as a complex
/// number with zero imaginary part.
pub(crate) struct EqualTimeSystem<'a> {
    pub drive: &'a Drive,
    pub params: ModelParams,
    pub g: f64,
    pub nu: f64,
    pub chi: C64,
}

impl HalfStepSystem for EqualTimeSystem<'_> {
    fn dim(&self) -> usize {
        5
    }

    fn rhs(&self, half: usize, y: &[C64], dy: &mut [C64]) {
        let (a, b) = (self.drive.a[half], self.drive.b[half]);
        let kappa = self.params.kappa();
        let gn = self.g * self.nu;
        let (ca, cb, p, sa, sb) = (y[0], y[1], y[2], y[3], y[4]);

        dy[0] = -kappa * ca - I * self.g * a;
        dy[1] = -kappa * cb - I * self.g * b;

        let feed = I * gn * (a.conj() * sb + b.conj() * sa);
        dy[2] = C64::new(-self.params.gamma * p.re + 2.0 * feed.re, 0.0);

        let emitted = a * cb + b * ca;
        dy[3] = -kappa * sa + 2.0 * I * gn * ca.conj() * emitted - I * gn * (self.chi * a + b);
        dy[4] = -kappa * sb + 2.0 * I * gn * cb.conj() * emitted - I * gn * (a + self.chi.conj() * b);
    }
}

/// Integrates the closed set for `⟨σ₊σ₋⟩` and `⟨1_{α,β}|σ₋|2⟩` from zero.
///
/// The single-photon amplitudes are re-integrated alongside so that every
/// RK4 stage sees a consistent `C`; the nodes reproduce `singles` exactly.
pub fn solve_equal_time(
    params: &ModelParams,
    spec: &PulseSpec,
    grid: &TimeGrid,
    singles: &SinglePhotonAmps,
) -> Result<EqualTimeSet> {
    check_grid(grid, &singles.grid, "single-photon amplitudes")?;
    params.validate()?;
    spec.validate()?;
    grid.check_resolution(params, spec)?;

    let drive = Drive::new(spec, params.v_g, grid);
    let sys = EqualTimeSystem {
        drive: &drive,
        params: *params,
        g: params.coupling(),
        nu: normalization_nu(spec),
        chi: overlap_chi(spec),
    };
    let mut rk = Rk4::new(5);
    let mut y = [C64::new(0.0, 0.0); 5];
    let mut out = EqualTimeSet {
        grid: *grid,
        excitation: Vec::with_capacity(grid.len()),
        s_alpha: Vec::with_capacity(grid.len()),
        s_beta: Vec::with_capacity(grid.len()),
    };
    let push = |y: &[C64; 5], out: &mut EqualTimeSet| {
        out.excitation.push(y[2].re);
        out.s_alpha.push(y[3]);
        out.s_beta.push(y[4]);
    };
    push(&y, &mut out);
    for k in 0..grid.steps {
        rk.step(&sys, k, grid.dt, &mut y);
        if (y[0] - singles.alpha[k + 1]).norm() > 1e-12 || (y[1] - singles.beta[k + 1]).norm() > 1e-12 {
            return Err(Error::Usage(
                "single-photon amplitudes do not belong to these parameters".into(),
            ));
        }
        push(&y, &mut out);
    }
    Ok(out)
}
