use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic frequency lattice `{j / L}` standing in for the horizontal plane.
///
/// Index `k` along one direction maps to the integer wavenumber `k` for
/// `k < modes/2` and `k - modes` otherwise. The Nyquist entry `-modes/2`
/// has no conjugate partner and is held at zero by every routine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub dim_h: usize,
    pub box_len: f64,
    pub modes: usize,
}

impl FrequencyGrid {
    pub fn new(dim_h: usize, box_len: f64, modes: usize) -> Result<Self> {
        if dim_h != 1 && dim_h != 2 {
            return Err(Error::Grid(format!("horizontal dimension {dim_h} not in {{1, 2}}")));
        }
        if modes < 4 || modes % 2 != 0 {
            return Err(Error::Grid(format!("mode count {modes} must be even and >= 4")));
        }
        if !(box_len > 0.0) {
            return Err(Error::Grid(format!("box length {box_len} must be positive")));
        }
        Ok(Self { dim_h, box_len, modes })
    }

    /// Number of lattice points (equal to the number of physical points).
    pub fn len(&self) -> usize {
        self.modes.pow(self.dim_h as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Box volume `L^{n-1}`.
    pub fn volume(&self) -> f64 {
        self.box_len.powi(self.dim_h as i32)
    }

    pub fn xi_max(&self) -> f64 {
        self.modes as f64 / (2.0 * self.box_len)
    }

    fn signed(&self, k: usize) -> i64 {
        let m = self.modes as i64;
        let k = k as i64;
        if k < m / 2 {
            k
        } else {
            k - m
        }
    }

    fn unsigned(&self, j: i64) -> usize {
        j.rem_euclid(self.modes as i64) as usize
    }

    /// Integer wavenumbers of lattice index `idx` (second slot 0 when `dim_h = 1`).
    pub fn wavenumbers(&self, idx: usize) -> [i64; 2] {
        if self.dim_h == 1 {
            [self.signed(idx), 0]
        } else {
            [self.signed(idx / self.modes), self.signed(idx % self.modes)]
        }
    }

    pub fn index_of(&self, j: [i64; 2]) -> usize {
        if self.dim_h == 1 {
            self.unsigned(j[0])
        } else {
            self.unsigned(j[0]) * self.modes + self.unsigned(j[1])
        }
    }

    pub fn xi(&self, idx: usize) -> [f64; 2] {
        let j = self.wavenumbers(idx);
        [j[0] as f64 / self.box_len, j[1] as f64 / self.box_len]
    }

    pub fn xi_abs(&self, idx: usize) -> f64 {
        let x = self.xi(idx);
        x[0].hypot(x[1])
    }

    /// Index of `-xi`.
    pub fn neg(&self, idx: usize) -> usize {
        let j = self.wavenumbers(idx);
        self.index_of([-j[0], -j[1]])
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        let half = self.modes as i64 / 2;
        let j = self.wavenumbers(idx);
        j[0] == -half || (self.dim_h == 2 && j[1] == -half)
    }

    /// One representative of each pair `{xi, -xi}` (including `xi = 0`), Nyquist excluded.
    pub fn is_canonical(&self, idx: usize) -> bool {
        if self.is_nyquist(idx) {
            return false;
        }
        let j = self.wavenumbers(idx);
        j[0] > 0 || (j[0] == 0 && j[1] >= 0)
    }

    pub fn canonical_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_canonical(i)).collect()
    }

    /// 2/3-rule mask: true when the mode survives dealiasing.
    pub fn keeps(&self, idx: usize) -> bool {
        let cut = (self.modes / 3) as i64;
        let j = self.wavenumbers(idx);
        j[0].abs() <= cut && j[1].abs() <= cut && !self.is_nyquist(idx)
    }

    /// Physical coordinates of grid point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let h = self.box_len / self.modes as f64;
        if self.dim_h == 1 {
            [idx as f64 * h, 0.0]
        } else {
            [(idx / self.modes) as f64 * h, (idx % self.modes) as f64 * h]
        }
    }
}

/// Chebyshev–Gauss–Lobatto nodes on `[0, b]` with Clenshaw–Curtis weights and
/// the collocation derivative matrix.
#[derive(Clone, Debug)]
pub struct VerticalGrid {
    pub depth: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major `nz × nz` first-derivative matrix in `x_n`.
    pub diff: Vec<f64>,
    bary: Vec<f64>,
}

impl VerticalGrid {
    pub fn new(depth: f64, nz: usize) -> Result<Self> {
        if nz < 4 {
            return Err(Error::Grid(format!("vertical node count {nz} must be >= 4")));
        }
        if !(depth > 0.0) {
            return Err(Error::Grid(format!("depth {depth} must be positive")));
        }
        let n = nz - 1;
        // t_j = cos(pi j / n) runs from 1 down to -1; x = b (1 - t) / 2 ascends.
        let t: Vec<f64> = (0..nz).map(|j| (PI * j as f64 / n as f64).cos()).collect();
        let mut nodes: Vec<f64> = t.iter().map(|&t| 0.5 * depth * (1.0 - t)).collect();
        nodes[0] = 0.0;
        nodes[n] = depth;

        let c = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
        let sgn = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
        let mut dt = vec![0.0; nz * nz];
        for i in 0..nz {
            for j in 0..nz {
                if i != j {
                    dt[i * nz + j] = c(i) / c(j) * sgn(i + j) / (t[i] - t[j]);
                }
            }
        }
        for i in 0..nz {
            let s: f64 = (0..nz).filter(|&j| j != i).map(|j| dt[i * nz + j]).sum();
            dt[i * nz + i] = -s;
        }
        let scale = -2.0 / depth;
        let diff = dt.iter().map(|v| v * scale).collect();

        let weights = clenshaw_curtis(n).into_iter().map(|w| 0.5 * depth * w).collect();
        let bary = (0..nz)
            .map(|j| sgn(j) * if j == 0 || j == n { 0.5 } else { 1.0 })
            .collect();
        Ok(Self { depth, nodes, weights, diff, bary })
    }

    pub fn nz(&self) -> usize {
        self.nodes.len()
    }

    /// Collocation derivative of nodal values.
    pub fn differentiate<T>(&self, v: &[T], out: &mut [T])
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let nz = self.nz();
        for i in 0..nz {
            let row = &self.diff[i * nz..(i + 1) * nz];
            let mut acc = T::default();
            for (d, &x) in row.iter().zip(v) {
                acc = acc + x * *d;
            }
            out[i] = acc;
        }
    }

    pub fn integrate<T>(&self, v: &[T]) -> T
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let mut acc = T::default();
        for (w, &x) in self.weights.iter().zip(v) {
            acc = acc + x * *w;
        }
        acc
    }

    /// Barycentric interpolation weights mapping nodal values to the value at `x`.
    pub fn interp_row(&self, x: f64) -> Vec<f64> {
        let nz = self.nz();
        let mut row = vec![0.0; nz];
        if let Some(j) = self.nodes.iter().position(|&xj| (x - xj).abs() < 1e-14 * self.depth) {
            row[j] = 1.0;
            return row;
        }
        let mut denom = 0.0;
        for j in 0..nz {
            let w = self.bary[j] / (x - self.nodes[j]);
            row[j] = w;
            denom += w;
        }
        for r in row.iter_mut() {
            *r /= denom;
        }
        row
    }

    /// Interpolation matrix (row-major, `targets.len() × nz`).
    pub fn interp_matrix(&self, targets: &[f64]) -> Vec<f64> {
        targets.iter().flat_map(|&x| self.interp_row(x)).collect()
    }

    pub fn interpolate<T>(&self, v: &[T], x: f64) -> T
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let row = self.interp_row(x);
        let mut acc = T::default();
        for (r, &y) in row.iter().zip(v) {
            acc = acc + y * *r;
        }
        acc
    }
}

/// Clenshaw–Curtis weights for the `n + 1` points `cos(pi j / n)` on `[-1, 1]`.
fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    let theta = |j: usize| PI * j as f64 / nf;
    if n % 2 == 0 {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for (j, wj) in w.iter_mut().enumerate().take(n).skip(1) {
            let mut v = 1.0;
            for k in 1..n / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta(j)).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
            v -= (nf * theta(j)).cos() / (nf * nf - 1.0);
            *wj = 2.0 * v / nf;
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for (j, wj) in w.iter_mut().enumerate().take(n).skip(1) {
            let mut v = 1.0;
            for k in 1..=(n - 1) / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta(j)).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
            *wj = 2.0 * v / nf;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_contains_zero_and_is_symmetric() {
        let g = FrequencyGrid::new(2, 10.0, 8).unwrap();
        assert_eq!(g.xi(0), [0.0, 0.0]);
        for i in 0..g.len() {
            let x = g.xi(i);
            let y = g.xi(g.neg(i));
            if !g.is_nyquist(i) {
                assert_eq!([-x[0], -x[1]], y);
            }
        }
        assert!((g.xi_max() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn canonical_half_covers_lattice() {
        for dim in [1, 2] {
            let g = FrequencyGrid::new(dim, 3.0, 12).unwrap();
            let mut seen = vec![false; g.len()];
            for i in g.canonical_indices() {
                seen[i] = true;
                seen[g.neg(i)] = true;
            }
            for i in 0..g.len() {
                assert_eq!(seen[i], !g.is_nyquist(i), "index {i}");
            }
        }
    }

    #[test]
    fn vertical_grid_endpoints_and_weights() {
        for nz in [5, 8, 33, 64] {
            let v = VerticalGrid::new(0.7, nz).unwrap();
            assert_eq!(v.nodes[0], 0.0);
            assert_eq!(v.nodes[nz - 1], 0.7);
            let s: f64 = v.weights.iter().sum();
            assert!((s - 0.7).abs() < 1e-12);
            assert!(v.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn derivative_and_quadrature_exact_for_polynomials() {
        let v = VerticalGrid::new(2.0, 12).unwrap();
        let f: Vec<f64> = v.nodes.iter().map(|&x| x.powi(7) - 3.0 * x * x).collect();
        let mut df = vec![0.0; 12];
        v.differentiate(&f, &mut df);
        for (x, d) in v.nodes.iter().zip(&df) {
            let exact = 7.0 * x.powi(6) - 6.0 * x;
            assert!((d - exact).abs() < 1e-9 * (1.0 + exact.abs()));
        }
        let int = v.integrate(&f);
        let exact = 2f64.powi(8) / 8.0 - 8.0;
        assert!((int - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn interpolation_reproduces_smooth_function() {
        let v = VerticalGrid::new(1.0, 32).unwrap();
        let f: Vec<f64> = v.nodes.iter().map(|&x| (3.0 * x).sin()).collect();
        for x in [0.013, 0.5, 0.77, 0.999] {
            assert!((v.interpolate(&f, x) - (3.0 * x).sin()).abs() < 1e-13);
        }
    }
}
