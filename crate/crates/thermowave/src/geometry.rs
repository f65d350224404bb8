//! Flattening map `F(x) = (x', x_n (1 + eta(x')/b))`, its derived fields and surface geometry.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::spectral::{Pseudo, SurfaceSpectral};

/// `A` and `J` on the strip grid, stored per `(point, node)`.
///
/// Direction `n - 1` is vertical. For `n = 2` the third row and column of each
/// matrix are identity padding.
#[derive(Clone, Debug)]
pub struct FlatteningFields {
    pub dim: usize,
    pub a_field: Vec<Matrix3<f64>>,
    pub j_field: Vec<f64>,
    pub eta_bound: f64,
    /// Physical `eta` and its horizontal gradient at each grid point.
    pub eta: Vec<f64>,
    pub grad_eta: Vec<[f64; 2]>,
}

impl FlatteningFields {
    #[inline]
    pub fn a(&self, pt: usize, z: usize, nz: usize) -> &Matrix3<f64> {
        &self.a_field[pt * nz + z]
    }

    /// Largest `|det(A) J - 1|` over the grid.
    pub fn jacobian_defect(&self) -> f64 {
        self.a_field
            .iter()
            .zip(&self.j_field)
            .map(|(a, j)| (a.determinant() * j - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub fn build_flattening(eta: &SurfaceSpectral, ps: &Pseudo) -> Result<FlatteningFields> {
    let n = ps.fg.dim_h + 1;
    let b = ps.vg.depth;
    let nz = ps.nz();
    let e = ps.surf_to_phys(eta);
    let eta_bound = e.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if eta_bound >= 0.5 * b {
        return Err(Error::SurfaceTooLarge { max_eta: eta_bound, limit: 0.5 * b });
    }
    let grads: Vec<Vec<f64>> = (0..n - 1).map(|j| ps.surf_to_phys(&ps.surf_dx(eta, j))).collect();
    let np = ps.points();
    let mut grad_eta = vec![[0.0; 2]; np];
    for (pt, g) in grad_eta.iter_mut().enumerate() {
        for j in 0..n - 1 {
            g[j] = grads[j][pt];
        }
    }
    let mut a_field = Vec::with_capacity(np * nz);
    let mut j_field = Vec::with_capacity(np * nz);
    for pt in 0..np {
        let denom = b + e[pt];
        for &xn in &ps.vg.nodes {
            let mut a = Matrix3::identity();
            for i in 0..n - 1 {
                a[(i, n - 1)] = -xn * grad_eta[pt][i] / denom;
            }
            a[(n - 1, n - 1)] = b / denom;
            a_field.push(a);
            j_field.push(1.0 + e[pt] / b);
        }
    }
    Ok(FlatteningFields { dim: n, a_field, j_field, eta_bound, eta: e, grad_eta })
}

/// `F(x)` for a point of the flat strip given `eta(x')`.
pub fn flatten_forward(xn: f64, eta_at: f64, depth: f64) -> f64 {
    xn * (1.0 + eta_at / depth)
}

/// Inverse of the vertical part of the map: `y_n b / (b + eta(y'))`.
pub fn flatten_inverse(yn: f64, eta_at: f64, depth: f64) -> f64 {
    yn * depth / (depth + eta_at)
}

/// `H(eta) = div'[(1 + |grad' eta|^2)^{-1/2} grad' eta]`, pseudospectral and dealiased.
pub fn mean_curvature(eta: &SurfaceSpectral, ps: &Pseudo) -> SurfaceSpectral {
    let dh = ps.fg.dim_h;
    let grads: Vec<Vec<f64>> = (0..dh).map(|j| ps.surf_to_phys(&ps.surf_dx(eta, j))).collect();
    let np = ps.points();
    let mut out = SurfaceSpectral::zeros(1, ps.fg.len());
    for j in 0..dh {
        let w: Vec<f64> = (0..np)
            .map(|pt| {
                let g2: f64 = (0..dh).map(|k| grads[k][pt] * grads[k][pt]).sum();
                grads[j][pt] / (1.0 + g2).sqrt()
            })
            .collect();
        let ws = ps.surf_to_spec(&w, 1);
        out.axpy(1.0, &ps.surf_dx(&ws, j));
    }
    out
}

/// `N(eta) = (-grad' eta, 1)` with `n` components.
pub fn surface_normal(eta: &SurfaceSpectral, ps: &Pseudo) -> SurfaceSpectral {
    let dh = ps.fg.dim_h;
    let nh = ps.fg.len();
    let mut out = SurfaceSpectral::zeros(dh + 1, nh);
    for j in 0..dh {
        let g = ps.surf_dx(eta, j);
        for h in 0..nh {
            *out.at_mut(j, h) = -g.at(0, h);
        }
    }
    *out.at_mut(dh, ps.fg.index_of([0, 0])) = 1.0.into();
    out
}
