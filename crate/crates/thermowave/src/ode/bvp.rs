//! Forced boundary-value solves for the per-frequency system, by the
//! variation-of-constants formula or by Chebyshev collocation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::expm::{matrix_exponential, M6};
use super::system::{assemble_boundary, assemble_bulk_matrix, boundary_operator, BoundaryOperator, Coupling};
use crate::error::{Error, Result};
use crate::model::PhysicalParams;
use crate::spectral::VerticalGrid;

pub type V6 = SVector<C64, 6>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Matexp,
    Collocation,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Matexp => "matexp",
            Backend::Collocation => "collocation",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveOptions {
    /// Use collocation when `2 pi |xi| b` exceeds this.
    pub backend_split: f64,
    /// Condition number above which `B` counts as numerically singular.
    pub cond_threshold: f64,
    /// Gauss–Legendre points per panel in the Duhamel integral.
    pub gl_order: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { backend_split: 30.0, cond_threshold: 1e12, gl_order: 8 }
    }
}

impl SolveOptions {
    pub fn preferred_backend(&self, xi: [f64; 2], depth: f64) -> Backend {
        if 2.0 * PI * xi[0].hypot(xi[1]) * depth > self.backend_split {
            Backend::Collocation
        } else {
            Backend::Matexp
        }
    }
}

/// Data for one frequency of the stress-divergence problem
/// `gt d_1 w + div(rI - mu D w) = f`, `div w = g`, `gt d_1 theta - kappa Lap theta = l`,
/// with boundary stress `k` and flux `m`, already projected on the longitudinal direction.
pub struct BvpData<'a> {
    pub f1: &'a [C64],
    pub f2: &'a [C64],
    pub g: &'a [C64],
    pub l: &'a [C64],
    pub k1: C64,
    pub k2: C64,
    pub m: C64,
}

/// Forcing profile `z` on the vertical nodes plus boundary vector `d`.
#[derive(Clone, Debug)]
pub struct BvpSpec {
    pub xi: [f64; 2],
    pub coupling: Coupling,
    pub z: Vec<V6>,
    pub d: V6,
}

impl BvpSpec {
    pub fn homogeneous(xi: [f64; 2], coupling: Coupling, nz: usize, d: V6) -> Self {
        Self { xi, coupling, z: vec![V6::zeros(); nz], d }
    }

    /// Build `z` and `d` from physical data. Because the bulk operator is
    /// `div(mu D w)` rather than `mu Lap w`, nonzero `g` feeds the tangential row
    /// with `2 pi |xi| g` and the normal row with an extra `mu g'`.
    pub fn from_data(xi: [f64; 2], p: &PhysicalParams, coupling: Coupling, vg: &VerticalGrid, data: &BvpData) -> Self {
        let nz = vg.nz();
        let w = 2.0 * PI * xi[0].hypot(xi[1]);
        let mut dg = vec![C64::default(); nz];
        vg.differentiate(data.g, &mut dg);
        let z = (0..nz)
            .map(|j| {
                V6::new(
                    C64::default(),
                    data.g[j],
                    C64::default(),
                    data.f2[j] + dg[j] * (2.0 * p.mu),
                    -data.f1[j] / p.mu + data.g[j] * w,
                    -data.l[j] / p.kappa,
                )
            })
            .collect();
        let d = V6::new(
            C64::default(),
            C64::default(),
            C64::default(),
            data.k1,
            data.k2 + data.g[nz - 1] * (2.0 * p.mu),
            data.m,
        );
        Self { xi, coupling, z, d }
    }
}

#[derive(Clone, Debug)]
pub struct Profile {
    pub y: Vec<V6>,
    pub backend: Backend,
    pub cond: f64,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

struct Quadrature {
    step: Vec<M6>,
    kernel: Vec<M6>,
    weights: Vec<f64>,
    interp: Vec<f64>,
    order: usize,
}

/// Largest `2 pi |xi|` times segment length between restarts of the Duhamel formula.
const SEGMENT_GROWTH: f64 = 1.5;

/// Variation-of-constants solver: `y(x) = exp((x-x_k)A) y(x_k) + int_{x_k}^x exp((x-t)A) z(t) dt`
/// on segments `[x_k, x_{k+1}]`, with the segment endpoints tied together by continuity and
/// the boundary rows `M y(0) + N y(b) = d`.
///
/// A single segment is the textbook formula `y = exp(xA) B^{-1}(d - N I(b)) + I(x)`; it loses
/// about `e^{4 pi |xi| b}` in relative accuracy, so the layer is cut wherever the exponential
/// would grow by more than `e^1.5`.
pub struct MatexpPropagator {
    /// Node indices of the segment endpoints, from `0` to `nz - 1`.
    breaks: Vec<usize>,
    /// Segment of each node; a break node belongs to the segment it starts.
    seg_of: Vec<usize>,
    /// `exp((x_j - x_k)A)` from the start of the node's segment.
    node_exp: Vec<M6>,
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    pub boundary: BoundaryOperator,
    quad: Option<Quadrature>,
    nz: usize,
}

fn segment_breaks(xi: [f64; 2], vg: &VerticalGrid) -> Vec<usize> {
    let nz = vg.nz();
    let w = 2.0 * PI * xi[0].hypot(xi[1]) * vg.depth;
    let k = ((w / SEGMENT_GROWTH).ceil() as usize).clamp(1, nz - 1);
    let mut breaks = vec![0];
    for i in 1..k {
        let target = vg.depth * i as f64 / k as f64;
        let j = vg.nodes.iter().position(|&x| x >= target).unwrap_or(nz - 1);
        if j > *breaks.last().unwrap() && j < nz - 1 {
            breaks.push(j);
        }
    }
    breaks.push(nz - 1);
    breaks
}

impl MatexpPropagator {
    /// Homogeneous solver (node exponentials only).
    pub fn homogeneous(xi: [f64; 2], p: &PhysicalParams, c: &Coupling, vg: &VerticalGrid, opts: &SolveOptions) -> Result<Self> {
        let nz = vg.nz();
        let a = assemble_bulk_matrix(xi, p, c.gamma_tilde);
        let boundary = boundary_operator(xi, p, c, &matrix_exponential(&a, vg.depth), opts.cond_threshold)?;
        let (m, n) = assemble_boundary(xi, p, c.alpha1, c.alpha2);
        let breaks = segment_breaks(xi, vg);
        let nseg = breaks.len() - 1;
        let mut seg_of = vec![0; nz];
        for k in 0..nseg {
            for s in &mut seg_of[breaks[k]..breaks[k + 1]] {
                *s = k;
            }
        }
        seg_of[nz - 1] = nseg - 1;
        let node_exp: Vec<M6> = (0..nz)
            .map(|j| matrix_exponential(&a, vg.nodes[j] - vg.nodes[breaks[seg_of[j]]]))
            .collect();

        // unknowns y(x_k) for every break; boundary rows first, then continuity
        let size = 6 * (nseg + 1);
        let mut g = DMatrix::<C64>::zeros(size, size);
        for i in 0..6 {
            for j in 0..6 {
                g[(i, j)] = m[(i, j)];
                g[(i, 6 * nseg + j)] += n[(i, j)];
            }
        }
        for k in 0..nseg {
            let e = matrix_exponential(&a, vg.nodes[breaks[k + 1]] - vg.nodes[breaks[k]]);
            for i in 0..6 {
                let row = 6 * (k + 1) + i;
                g[(row, 6 * (k + 1) + i)] = C64::new(1.0, 0.0);
                for j in 0..6 {
                    g[(row, 6 * k + j)] = -e[(i, j)];
                }
            }
        }
        let lu = g.lu();
        if !lu.is_invertible() {
            return Err(Error::NumericallySingular { xi_abs: xi[0].hypot(xi[1]), cond: f64::INFINITY });
        }
        Ok(Self { breaks, seg_of, node_exp, lu, boundary, quad: None, nz })
    }

    pub fn new(xi: [f64; 2], p: &PhysicalParams, c: &Coupling, vg: &VerticalGrid, opts: &SolveOptions) -> Result<Self> {
        let mut s = Self::homogeneous(xi, p, c, vg, opts)?;
        let a = assemble_bulk_matrix(xi, p, c.gamma_tilde);
        let (gx, gw) = gauss_legendre(opts.gl_order);
        let nz = vg.nz();
        let mut step = Vec::with_capacity(nz - 1);
        let mut kernel = Vec::with_capacity((nz - 1) * gx.len());
        let mut weights = Vec::with_capacity((nz - 1) * gx.len());
        let mut targets = Vec::with_capacity((nz - 1) * gx.len());
        for pnl in 0..nz - 1 {
            let (x0, x1) = (vg.nodes[pnl], vg.nodes[pnl + 1]);
            let h = x1 - x0;
            step.push(matrix_exponential(&a, h));
            for (&t, &w) in gx.iter().zip(&gw) {
                let tt = x0 + 0.5 * h * (1.0 + t);
                kernel.push(matrix_exponential(&a, x1 - tt));
                weights.push(0.5 * h * w);
                targets.push(tt);
            }
        }
        let interp = vg.interp_matrix(&targets);
        s.quad = Some(Quadrature { step, kernel, weights, interp, order: gx.len() });
        Ok(s)
    }

    /// Condition number of the single-segment boundary operator `B`.
    pub fn cond(&self) -> f64 {
        self.boundary.cond
    }

    pub fn solve_homogeneous(&self, d: &V6) -> Vec<V6> {
        self.assemble(&vec![V6::zeros(); self.nz], d)
    }

    pub fn solve(&self, z: &[V6], d: &V6) -> Vec<V6> {
        let q = self.quad.as_ref().expect("propagator built without quadrature");
        let nz = self.nz;
        // particular solution restarted from zero at every break
        let mut part = vec![V6::zeros(); nz];
        let mut acc = V6::zeros();
        for pnl in 0..nz - 1 {
            if self.breaks.contains(&pnl) {
                acc = V6::zeros();
            } else {
                acc = q.step[pnl] * acc;
            }
            for k in 0..q.order {
                let row = pnl * q.order + k;
                let mut zt = V6::zeros();
                for (j, zj) in z.iter().enumerate() {
                    let c = q.interp[row * nz + j];
                    if c != 0.0 {
                        zt += zj * C64::new(c, 0.0);
                    }
                }
                acc += q.kernel[row] * zt * C64::new(q.weights[row], 0.0);
            }
            part[pnl + 1] = acc;
        }
        self.assemble(&part, d)
    }

    /// `part[j]` is the particular solution at node `j` from the start of the segment ending
    /// at or containing `j`.
    fn assemble(&self, part: &[V6], d: &V6) -> Vec<V6> {
        let nseg = self.breaks.len() - 1;
        let mut rhs = DVector::<C64>::zeros(6 * (nseg + 1));
        for i in 0..6 {
            rhs[i] = d[i];
        }
        for k in 0..nseg {
            let end = part[self.breaks[k + 1]];
            for i in 0..6 {
                rhs[6 * (k + 1) + i] = end[i];
            }
        }
        let ys = self.lu.solve(&rhs).expect("factorization checked at construction");
        let at = |k: usize| V6::from_fn(|i, _| ys[6 * k + i]);
        (0..self.nz)
            .map(|j| {
                if let Ok(k) = self.breaks.binary_search(&j) {
                    at(k)
                } else {
                    self.node_exp[j] * at(self.seg_of[j]) + part[j]
                }
            })
            .collect()
    }
}

/// Rectangular Chebyshev collocation: the ODE is imposed on `nz - 1`
/// first-kind Chebyshev points (resampled from the nodal polynomial) and the six
/// boundary rows complete the square system.
pub struct CollocationSolver {
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    resample: Vec<f64>,
    nz: usize,
    pub cond: f64,
}

impl CollocationSolver {
    pub fn new(xi: [f64; 2], p: &PhysicalParams, c: &Coupling, vg: &VerticalGrid, opts: &SolveOptions) -> Result<Self> {
        let nz = vg.nz();
        let m = nz - 1;
        let a = assemble_bulk_matrix(xi, p, c.gamma_tilde);
        let (mb, nb) = assemble_boundary(xi, p, c.alpha1, c.alpha2);
        let targets: Vec<f64> = (0..m)
            .map(|k| 0.5 * vg.depth * (1.0 - (PI * (2 * k + 1) as f64 / (2 * m) as f64).cos()))
            .collect();
        let pm = vg.interp_matrix(&targets);
        let mut pd = vec![0.0; m * nz];
        for k in 0..m {
            for j in 0..nz {
                pd[k * nz + j] = (0..nz).map(|l| pm[k * nz + l] * vg.diff[l * nz + j]).sum();
            }
        }
        let size = 6 * nz;
        let mut k_mat = DMatrix::<C64>::zeros(size, size);
        for ci in 0..6 {
            for k in 0..m {
                let row = ci * m + k;
                for j in 0..nz {
                    k_mat[(row, ci * nz + j)] += C64::new(pd[k * nz + j], 0.0);
                    for cj in 0..6 {
                        let acj = a[(ci, cj)];
                        if acj != C64::default() {
                            k_mat[(row, cj * nz + j)] -= acj * pm[k * nz + j];
                        }
                    }
                }
            }
        }
        for i in 0..6 {
            let row = 6 * m + i;
            for cj in 0..6 {
                k_mat[(row, cj * nz)] += mb[(i, cj)];
                k_mat[(row, cj * nz + nz - 1)] += nb[(i, cj)];
            }
        }
        let norm1 = (0..size).map(|j| k_mat.column(j).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max);
        let lu = k_mat.lu();
        // lower bound on ||K^{-1}||_1 from a few probe vectors
        let mut inv_est: f64 = 0.0;
        for probe in 0..3 {
            let x = DVector::<C64>::from_fn(size, |i, _| {
                let s = match probe {
                    0 => 1.0,
                    1 => if i % 2 == 0 { 1.0 } else { -1.0 },
                    _ => ((i * 7 + 3) % 11) as f64 / 5.0 - 1.0,
                };
                C64::new(s, 0.0)
            });
            let nx: f64 = x.iter().map(|v| v.norm()).sum();
            let y = lu.solve(&x).ok_or(Error::IllConditionedCollocation { cond: f64::INFINITY })?;
            let ny: f64 = y.iter().map(|v| v.norm()).sum();
            inv_est = inv_est.max(ny / nx);
        }
        let cond = norm1 * inv_est;
        if !cond.is_finite() || cond > opts.cond_threshold {
            return Err(Error::IllConditionedCollocation { cond });
        }
        Ok(Self { lu, resample: pm, nz, cond })
    }

    pub fn solve(&self, z: &[V6], d: &V6) -> Vec<V6> {
        let nz = self.nz;
        let m = nz - 1;
        let mut rhs = DVector::<C64>::zeros(6 * nz);
        for ci in 0..6 {
            for k in 0..m {
                let mut s = C64::default();
                for j in 0..nz {
                    s += z[j][ci] * self.resample[k * nz + j];
                }
                rhs[ci * m + k] = s;
            }
        }
        for i in 0..6 {
            rhs[6 * m + i] = d[i];
        }
        let sol = self.lu.solve(&rhs).expect("factorization checked at construction");
        (0..nz).map(|j| V6::from_fn(|ci, _| sol[ci * nz + j])).collect()
    }
}

/// A factored solver for one frequency, whichever backend applies.
pub enum ForcedSolver {
    Matexp(MatexpPropagator),
    Collocation(CollocationSolver),
}

impl ForcedSolver {
    /// Prefer the backend by frequency; fall back to collocation when `B` is too ill-conditioned.
    pub fn new(xi: [f64; 2], p: &PhysicalParams, c: &Coupling, vg: &VerticalGrid, opts: &SolveOptions) -> Result<Self> {
        match opts.preferred_backend(xi, p.depth) {
            Backend::Matexp => match MatexpPropagator::new(xi, p, c, vg, opts) {
                Ok(m) => Ok(Self::Matexp(m)),
                Err(Error::NumericallySingular { .. }) => Ok(Self::Collocation(CollocationSolver::new(xi, p, c, vg, opts)?)),
                Err(e) => Err(e),
            },
            Backend::Collocation => Ok(Self::Collocation(CollocationSolver::new(xi, p, c, vg, opts)?)),
        }
    }

    pub fn with_backend(backend: Backend, xi: [f64; 2], p: &PhysicalParams, c: &Coupling, vg: &VerticalGrid, opts: &SolveOptions) -> Result<Self> {
        Ok(match backend {
            Backend::Matexp => Self::Matexp(MatexpPropagator::new(xi, p, c, vg, opts)?),
            Backend::Collocation => Self::Collocation(CollocationSolver::new(xi, p, c, vg, opts)?),
        })
    }

    pub fn backend(&self) -> Backend {
        match self {
            Self::Matexp(_) => Backend::Matexp,
            Self::Collocation(_) => Backend::Collocation,
        }
    }

    pub fn cond(&self) -> f64 {
        match self {
            Self::Matexp(m) => m.cond(),
            Self::Collocation(c) => c.cond,
        }
    }

    pub fn solve(&self, z: &[V6], d: &V6) -> Profile {
        let y = match self {
            Self::Matexp(m) => m.solve(z, d),
            Self::Collocation(c) => c.solve(z, d),
        };
        Profile { y, backend: self.backend(), cond: self.cond() }
    }
}

pub fn solve_forced_bvp(spec: &BvpSpec, p: &PhysicalParams, vg: &VerticalGrid, backend: Backend, opts: &SolveOptions) -> Result<Profile> {
    if spec.z.len() != vg.nz() {
        return Err(Error::SizeMismatch { expected: vg.nz(), got: spec.z.len() });
    }
    let s = ForcedSolver::with_backend(backend, spec.xi, p, &spec.coupling, vg, opts)?;
    Ok(s.solve(&spec.z, &spec.d))
}

/// Scalar transverse problem `gt 2 pi i xi_1 t - mu (t'' - 4 pi^2 |xi|^2 t) = f`,
/// `-mu t'(b) = k`, `t(0) = 0`, by square collocation with boundary rows.
pub struct TransverseSolver {
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    nz: usize,
    pub cond: f64,
}

impl TransverseSolver {
    pub fn new(xi: [f64; 2], p: &PhysicalParams, gamma_tilde: f64, vg: &VerticalGrid, opts: &SolveOptions) -> Result<Self> {
        let nz = vg.nz();
        let k2 = 4.0 * PI * PI * (xi[0] * xi[0] + xi[1] * xi[1]);
        let diag = C64::new(p.mu * k2, gamma_tilde * 2.0 * PI * xi[0]);
        let d = &vg.diff;
        let mut k = DMatrix::<C64>::zeros(nz, nz);
        for i in 1..nz - 1 {
            for j in 0..nz {
                let d2: f64 = (0..nz).map(|l| d[i * nz + l] * d[l * nz + j]).sum();
                k[(i, j)] = C64::new(-p.mu * d2, 0.0);
            }
            k[(i, i)] += diag;
        }
        k[(0, 0)] = C64::new(1.0, 0.0);
        for j in 0..nz {
            k[(nz - 1, j)] = C64::new(-p.mu * d[(nz - 1) * nz + j], 0.0);
        }
        let norm1 = (0..nz).map(|j| k.column(j).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max);
        let inv = k.clone().try_inverse().ok_or(Error::IllConditionedCollocation { cond: f64::INFINITY })?;
        let inv1 = (0..nz).map(|j| inv.column(j).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max);
        let cond = norm1 * inv1;
        if !cond.is_finite() || cond > opts.cond_threshold {
            return Err(Error::IllConditionedCollocation { cond });
        }
        Ok(Self { lu: k.lu(), nz, cond })
    }

    /// Solve with bottom value `t(0) = bottom` (zero for the physical problem).
    pub fn solve_with_bottom(&self, f: &[C64], k: C64, bottom: C64) -> Vec<C64> {
        let mut rhs = DVector::from_column_slice(f);
        rhs[0] = bottom;
        rhs[self.nz - 1] = k;
        self.lu.solve(&rhs).expect("factorization checked at construction").iter().copied().collect()
    }

    pub fn solve(&self, f: &[C64], k: C64) -> Vec<C64> {
        self.solve_with_bottom(f, k, C64::default())
    }
}

pub fn solve_transverse(
    xi: [f64; 2],
    p: &PhysicalParams,
    gamma_tilde: f64,
    vg: &VerticalGrid,
    f_transverse: &[C64],
    k_transverse: C64,
    opts: &SolveOptions,
) -> Result<Vec<C64>> {
    if p.dim != 3 {
        return Err(Error::InvalidParams(vec!["transverse solve needs dim = 3".into()]));
    }
    Ok(TransverseSolver::new(xi, p, gamma_tilde, vg, opts)?.solve(f_transverse, k_transverse))
}
