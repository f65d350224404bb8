//! Per-frequency first-order system `y' = A y + z`, `M y(0) + N y(b) = d` for
//! `y = (phi, psi, delta, q, phi', delta')`.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64 as C64;

use super::expm::{matrix_exponential, norm1, M6};
use crate::error::{Error, Result};
use crate::model::PhysicalParams;

fn r(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Transport and Marangoni placement for one member of the Stokes–heat family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coupling {
    pub gamma_tilde: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl Coupling {
    /// Adjoint problem producing the symbols: `(gamma, 0, sigma1)`.
    pub fn adjoint(p: &PhysicalParams) -> Self {
        Self { gamma_tilde: p.gamma, alpha1: 0.0, alpha2: p.sigma1 }
    }

    /// Problem inverted inside the linear solver: `(-gamma, sigma1, 0)`.
    pub fn forward(p: &PhysicalParams) -> Self {
        Self { gamma_tilde: -p.gamma, alpha1: p.sigma1, alpha2: 0.0 }
    }
}

pub fn assemble_bulk_matrix(xi: [f64; 2], p: &PhysicalParams, gamma_tilde: f64) -> M6 {
    let k = xi[0].hypot(xi[1]);
    let k2 = 4.0 * PI * PI * k * k;
    let tr = C64::new(0.0, gamma_tilde * 2.0 * PI * xi[0]);
    let mut a = M6::zeros();
    a[(0, 4)] = r(1.0);
    a[(1, 0)] = r(-2.0 * PI * k);
    a[(2, 5)] = r(1.0);
    a[(3, 1)] = r(-p.mu * k2) - tr;
    a[(3, 4)] = r(-p.mu * 2.0 * PI * k);
    a[(4, 0)] = r(k2) + tr / p.mu;
    a[(4, 3)] = r(-2.0 * PI * k / p.mu);
    a[(5, 2)] = r(k2) + tr / p.kappa;
    a
}

/// Boundary blocks `(N1, N2)`; the full `N` is `[[0, 0], [N1, N2]]` and `M = diag(I, 0)`.
///
/// Row 1 is the tangential stress, row 2 the normal stress, row 3 the heat flux.
/// The tangential row picks up `-2 pi alpha1 |xi| delta` from `alpha1 grad' theta`
/// paired with `i xi/|xi|`; the heat row picks up `2 pi alpha2 |xi| phi`.
pub fn boundary_blocks(xi: [f64; 2], p: &PhysicalParams, alpha1: f64, alpha2: f64) -> (Matrix3<C64>, Matrix3<C64>) {
    let k = xi[0].hypot(xi[1]);
    let w = 2.0 * PI * k;
    let mut n1 = Matrix3::zeros();
    n1[(0, 1)] = r(p.mu * w);
    n1[(0, 2)] = r(-alpha1 * w);
    n1[(1, 0)] = r(2.0 * p.mu * w);
    n1[(2, 0)] = r(alpha2 * w);
    let mut n2 = Matrix3::zeros();
    n2[(0, 1)] = r(-p.mu);
    n2[(1, 0)] = r(1.0);
    n2[(2, 2)] = r(p.kappa);
    (n1, n2)
}

pub fn assemble_boundary(xi: [f64; 2], p: &PhysicalParams, alpha1: f64, alpha2: f64) -> (M6, M6) {
    let (n1, n2) = boundary_blocks(xi, p, alpha1, alpha2);
    let mut m = M6::zeros();
    let mut n = M6::zeros();
    for i in 0..3 {
        m[(i, i)] = r(1.0);
        for j in 0..3 {
            n[(3 + i, j)] = n1[(i, j)];
            n[(3 + i, 3 + j)] = n2[(i, j)];
        }
    }
    (m, n)
}

/// `B = M + N exp(bA)` with its block inverse and 1-norm condition number.
#[derive(Clone, Debug)]
pub struct BoundaryOperator {
    pub b: M6,
    pub b_inv: M6,
    pub cond: f64,
}

/// Assemble `B` from a precomputed `exp(bA)`.
pub fn boundary_operator(xi: [f64; 2], p: &PhysicalParams, c: &Coupling, exp_ba: &M6, threshold: f64) -> Result<BoundaryOperator> {
    let (n1, n2) = boundary_blocks(xi, p, c.alpha1, c.alpha2);
    let c1 = exp_ba.fixed_view::<3, 3>(0, 0).into_owned();
    let c2 = exp_ba.fixed_view::<3, 3>(0, 3).into_owned();
    let c3 = exp_ba.fixed_view::<3, 3>(3, 0).into_owned();
    let c4 = exp_ba.fixed_view::<3, 3>(3, 3).into_owned();
    let b3 = n1 * c1 + n2 * c3;
    let b4 = n1 * c2 + n2 * c4;
    let xi_abs = xi[0].hypot(xi[1]);
    let b4_inv = b4
        .try_inverse()
        .ok_or(Error::NumericallySingular { xi_abs, cond: f64::INFINITY })?;
    let lower = -(b4_inv * b3);
    let mut b = M6::zeros();
    let mut b_inv = M6::zeros();
    for i in 0..3 {
        b[(i, i)] = r(1.0);
        b_inv[(i, i)] = r(1.0);
        for j in 0..3 {
            b[(3 + i, j)] = b3[(i, j)];
            b[(3 + i, 3 + j)] = b4[(i, j)];
            b_inv[(3 + i, j)] = lower[(i, j)];
            b_inv[(3 + i, 3 + j)] = b4_inv[(i, j)];
        }
    }
    let cond = norm1(&b) * norm1(&b_inv);
    if !cond.is_finite() || cond > threshold {
        return Err(Error::NumericallySingular { xi_abs, cond });
    }
    Ok(BoundaryOperator { b, b_inv, cond })
}

pub fn assemble_b(xi: [f64; 2], p: &PhysicalParams, c: &Coupling, threshold: f64) -> Result<BoundaryOperator> {
    let a = assemble_bulk_matrix(xi, p, c.gamma_tilde);
    boundary_operator(xi, p, c, &matrix_exponential(&a, p.depth), threshold)
}
