//! Classical fixed-step fourth-order Runge-Kutta.
//!
//! Right-hand sides are addressed by half-step index: a step starting at
//! node `k` evaluates its stages at half indices `2k`, `2k + 1` and `2k + 2`,
//! which lets drivers be tabulated once on the half grid.

use num_complex::Complex64 as C64;

pub trait HalfStepSystem {
    fn dim(&self) -> usize;

    /// Writes `dy/dt` at time `half * dt / 2` into `dy`.
    fn rhs(&self, half: usize, y: &[C64], dy: &mut [C64]);
}

/// Reusable RK4 stage storage.
pub struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); dim];
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z }
    }

    /// Advances `y` from node `node` to `node + 1`.
    pub fn step<S: HalfStepSystem + ?Sized>(&mut self, sys: &S, node: usize, dt: f64, y: &mut [C64]) {
        let h = 2 * node;
        let n = y.len();
        debug_assert_eq!(n, sys.dim());

        sys.rhs(h, y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + self.k1[i] * (0.5 * dt);
        }
        sys.rhs(h + 1, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + self.k2[i] * (0.5 * dt);
        }
        sys.rhs(h + 1, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + self.k3[i] * dt;
        }
        sys.rhs(h + 2, &self.tmp, &mut self.k4);
        for i in 0..n {
            y[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * (dt / 6.0);
        }
    }
}
