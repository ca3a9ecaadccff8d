//! Lower-triangular storage of two-time functions `F(t_j, t_k)`, `j >= k`.

use num_complex::Complex64 as C64;

/// Two-time table on a (possibly coarsened) copy of the time grid.
///
/// Column `c` holds `F(t_j, t_k)` for `k = c * stride` and `j = k, k + stride, ..`;
/// the upper triangle follows from `F(t, t') = F(t', t)*`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriTable {
    dt: f64,
    stride: usize,
    nodes: usize,
    columns: Vec<Vec<C64>>,
}

impl TriTable {
    /// Assembles a table from its columns; column `c` must hold `nodes - c` entries.
    pub fn from_columns(dt: f64, stride: usize, columns: Vec<Vec<C64>>) -> Self {
        let nodes = columns.len();
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), nodes - c, "column {c} has the wrong length");
        }
        Self { dt, stride, nodes, columns }
    }

    /// Table of a separable function `F(t, t') = u(t)* v(t')` sampled on every `stride`-th node.
    pub fn separable(dt: f64, stride: usize, u: &[C64], v: &[C64]) -> Self {
        let coarse: Vec<usize> = (0..u.len()).step_by(stride).collect();
        let columns = coarse
            .iter()
            .enumerate()
            .map(|(c, &k)| coarse[c..].iter().map(|&j| u[j].conj() * v[k]).collect())
            .collect();
        Self::from_columns(dt, stride, columns)
    }

    /// Fine-grid step.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Number of stored (coarse) nodes per axis.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Spacing of the stored nodes.
    pub fn spacing(&self) -> f64 {
        self.dt * self.stride as f64
    }

    pub fn t_max(&self) -> f64 {
        self.spacing() * (self.nodes - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nodes * (self.nodes + 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.nodes == 0
    }

    pub fn column(&self, c: usize) -> &[C64] {
        &self.columns[c]
    }

    /// Entry at coarse indices, `j >= k`.
    #[inline]
    pub fn lower(&self, j: usize, k: usize) -> C64 {
        debug_assert!(j >= k);
        self.columns[k][j - k]
    }

    /// Entry at coarse indices in either triangle.
    #[inline]
    pub fn get(&self, j: usize, k: usize) -> C64 {
        if j >= k {
            self.lower(j, k)
        } else {
            self.lower(k, j).conj()
        }
    }

    /// Bilinear interpolation at arbitrary times; zero when either time is negative.
    pub fn at(&self, t: f64, s: f64) -> C64 {
        let h = self.spacing();
        if t < -1e-12 * h || s < -1e-12 * h {
            return C64::new(0.0, 0.0);
        }
        let last = (self.nodes - 1) as f64;
        let snap = |r: f64| if (r - r.round()).abs() < 1e-9 { r.round() } else { r };
        let u = snap(t / h).clamp(0.0, last);
        let v = snap(s / h).clamp(0.0, last);
        let (j0, k0) = (u.floor() as usize, v.floor() as usize);
        let (j1, k1) = ((j0 + 1).min(self.nodes - 1), (k0 + 1).min(self.nodes - 1));
        let (fu, fv) = (u - j0 as f64, v - k0 as f64);
        self.get(j0, k0) * ((1.0 - fu) * (1.0 - fv))
            + self.get(j1, k0) * (fu * (1.0 - fv))
            + self.get(j0, k1) * ((1.0 - fu) * fv)
            + self.get(j1, k1) * (fu * fv)
    }

    /// Entries in row-major order, `(j, k)` for `k <= j`.
    pub fn row_major(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.nodes).flat_map(move |j| (0..=j).map(move |k| self.lower(j, k)))
    }

    /// Rebuilds a table from row-major entries.
    pub fn from_row_major(dt: f64, stride: usize, nodes: usize, data: &[C64]) -> Self {
        assert_eq!(data.len(), nodes * (nodes + 1) / 2);
        let mut columns: Vec<Vec<C64>> = (0..nodes).map(|c| Vec::with_capacity(nodes - c)).collect();
        let mut it = data.iter();
        for j in 0..nodes {
            for col in columns.iter_mut().take(j + 1) {
                col.push(*it.next().unwrap());
            }
        }
        Self { dt, stride, nodes, columns }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TriTable {
        let u: Vec<C64> = (0..6).map(|i| C64::new(i as f64, 0.5 * i as f64)).collect();
        let v: Vec<C64> = (0..6).map(|i| C64::new(1.0, -(i as f64))).collect();
        TriTable::separable(0.1, 1, &u, &v)
    }

    #[test]
    fn hermitian_access() {
        let t = sample();
        assert_eq!(t.get(1, 4), t.get(4, 1).conj());
        assert_eq!(t.len(), 21);
    }

    #[test]
    fn bilinear_matches_nodes_and_is_zero_for_negative_times() {
        let t = sample();
        assert_eq!(t.at(0.3, 0.2), t.get(3, 2));
        assert_eq!(t.at(-0.01, 0.2), C64::new(0.0, 0.0));
        let mid = t.at(0.35, 0.2);
        let expect = (t.get(3, 2) + t.get(4, 2)) * 0.5;
        assert!((mid - expect).norm() < 1e-12);
    }

    #[test]
    fn row_major_round_trip() {
        let t = sample();
        let data: Vec<C64> = t.row_major().collect();
        assert_eq!(TriTable::from_row_major(0.1, 1, 6, &data), t);
    }

    #[test]
    fn strided_separable_table() {
        let u: Vec<C64> = (0..7).map(|i| C64::new(i as f64, 0.0)).collect();
        let t = TriTable::separable(0.1, 3, &u, &u);
        assert_eq!(t.nodes(), 3);
        assert_eq!(t.lower(2, 1), C64::new(18.0, 0.0));
        assert!((t.t_max() - 0.6).abs() < 1e-12);
    }
}
