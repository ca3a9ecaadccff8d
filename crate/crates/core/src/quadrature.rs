//! Composite trapezoid rules and the uniform grids they run on.

use num_complex::Complex64 as C64;
use std::ops::{Add, Mul};

/// Composite trapezoid rule over uniformly spaced samples.
pub fn trapezoid<T>(samples: &[T], step: f64) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    match samples.len() {
        0 | 1 => T::default(),
        n => {
            let inner = samples[1..n - 1].iter().fold(T::default(), |acc, &v| acc + v);
            (inner + (samples[0] + samples[n - 1]) * 0.5) * step
        }
    }
}

/// Trapezoid rule applied to `f` sampled on `n` uniform points of `[a, b]`.
pub fn trapezoid_fn<T, F>(a: f64, b: f64, n: usize, f: F) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    assert!(n >= 2, "trapezoid needs at least two nodes");
    let h = (b - a) / (n - 1) as f64;
    let samples: Vec<T> = (0..n).map(|i| f(a + i as f64 * h)).collect();
    trapezoid(&samples, h)
}

/// Trapezoid weight of node `i` out of `n` (unit spacing).
#[inline]
pub fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if n < 2 {
        0.0
    } else if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// How the endpoints of a uniform grid are weighted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    /// Closed grid, half weight on both ends.
    Trapezoid,
    /// Periodic grid: one period, every node weighted equally.
    Periodic,
}

/// Uniform one-dimensional grid carrying its own quadrature weights.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
    pub rule: Rule,
}

impl UniformGrid {
    /// `len` nodes spanning `[start, end]` inclusive.
    pub fn closed(start: f64, end: f64, len: usize) -> Self {
        assert!(len >= 2 && end > start, "closed grid needs len >= 2 and end > start");
        Self {
            start,
            step: (end - start) / (len - 1) as f64,
            len,
            rule: Rule::Trapezoid,
        }
    }

    /// `len` nodes covering one period `[-period/2, period/2)`, centred on zero.
    pub fn periodic(period: f64, len: usize) -> Self {
        assert!(len >= 1 && period > 0.0);
        let step = period / len as f64;
        Self {
            start: -((len / 2) as f64) * step,
            step,
            len,
            rule: Rule::Periodic,
        }
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.node(i))
    }

    pub fn end(&self) -> f64 {
        self.node(self.len - 1)
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        match self.rule {
            Rule::Trapezoid => trapezoid_weight(i, self.len) * self.step,
            Rule::Periodic => self.step,
        }
    }

    pub fn integrate<T>(&self, samples: &[T]) -> T
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    {
        assert_eq!(samples.len(), self.len);
        samples
            .iter()
            .enumerate()
            .fold(T::default(), |acc, (i, &v)| acc + v * self.weight(i))
    }

    /// `sum_k w_k exp(-i scale p_k tau)`: the discrete momentum integral of a plane wave.
    pub fn plane_wave_sum(&self, scale: f64, tau: f64) -> C64 {
        let step = C64::from_polar(1.0, -scale * self.step * tau);
        let mut phase = C64::from_polar(1.0, -scale * self.start * tau);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.len {
            acc += phase * self.weight(i);
            phase *= step;
        }
        acc
    }
}

/// Default momentum quadrature for a pulse of width `w`: `[-8/w, 8/w]`.
pub fn default_momentum_grid(width: f64) -> UniformGrid {
    UniformGrid::closed(-8.0 / width, 8.0 / width, 1025)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let v = trapezoid_fn(0.0, 2.0, 3, |x: f64| 3.0 * x + 1.0);
        assert!((v - 8.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_integral() {
        let v: f64 = trapezoid_fn(-10.0, 10.0, 401, |x: f64| (-x * x).exp());
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn periodic_grid_plane_wave_sum_is_a_kronecker_delta() {
        let h = 0.04;
        let n = 64;
        let g = UniformGrid::periodic(2.0 * std::f64::consts::PI / h, n);
        let full = 2.0 * std::f64::consts::PI / h;
        assert!((g.plane_wave_sum(1.0, 0.0) - full).norm() < 1e-10);
        for j in 1..n {
            assert!(g.plane_wave_sum(1.0, j as f64 * h).norm() < 1e-9, "j = {j}");
        }
    }

    #[test]
    fn short_grids_integrate_to_zero() {
        assert_eq!(trapezoid::<f64>(&[], 1.0), 0.0);
        assert_eq!(trapezoid(&[2.0], 1.0), 0.0);
    }
}
