//! Physical parameters, constitutive closures and the admissibility gates.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::VerticalGrid;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalParams {
    pub mu: f64,
    pub kappa: f64,
    pub grav: f64,
    pub depth: f64,
    pub gamma: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub dim: usize,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { mu: 1.0, kappa: 1.0, grav: 1.0, depth: 1.0, gamma: 1.0, sigma0: 1.0, sigma1: 0.1, dim: 2 }
    }
}

impl PhysicalParams {
    /// `(mu, kappa, b, gamma, g, sigma0, sigma1)` ordering used in the reference tables.
    pub fn from_tuple(t: (f64, f64, f64, f64, f64, f64, f64), dim: usize) -> Self {
        Self { mu: t.0, kappa: t.1, depth: t.2, gamma: t.3, grav: t.4, sigma0: t.5, sigma1: t.6, dim }
    }

    pub fn dim_h(&self) -> usize {
        self.dim - 1
    }
}

/// Every violated admissibility constraint; empty means admissible.
pub fn validate_params(p: &PhysicalParams) -> Vec<String> {
    let mut v = Vec::new();
    let mut pos = |x: f64, name: &str| {
        if !(x > 0.0) || !x.is_finite() {
            v.push(format!("{name} must be positive"));
        }
    };
    pos(p.mu, "mu");
    pos(p.kappa, "kappa");
    pos(p.grav, "grav");
    pos(p.depth, "depth");
    pos(p.sigma0, "sigma0");
    if p.gamma == 0.0 || !p.gamma.is_finite() {
        v.push("gamma must be nonzero".into());
    }
    if !p.sigma1.is_finite() {
        v.push("sigma1 must be finite".into());
    }
    if p.dim != 2 && p.dim != 3 {
        v.push("dim must be 2 or 3".into());
    }
    v
}

pub fn ensure_valid(p: &PhysicalParams) -> Result<()> {
    let v = validate_params(p);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParams(v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViscosityLaw {
    Newtonian,
    Tempdep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeatLaw {
    Fourier,
    Tempdep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensionLaw {
    Linear,
    Smooth,
}

/// Viscous stress `Gamma(r, M) = m(r) M`, heat flux `Phi(r, z) = -k(r) z` and surface tension `sigma(r)`.
///
/// The temperature-dependent laws are `m(r) = mu exp(-tanh(r)/2)`,
/// `k(r) = kappa exp(3 tanh(r)/10)` and `sigma(r) = sigma0 + sigma1 tanh(r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstitutiveSet {
    pub visc: ViscosityLaw,
    pub heat: HeatLaw,
    pub tension: TensionLaw,
    mu: f64,
    kappa: f64,
    sigma0: f64,
    sigma1: f64,
}

impl ConstitutiveSet {
    pub fn new(p: &PhysicalParams, visc: ViscosityLaw, heat: HeatLaw, tension: TensionLaw) -> Self {
        Self { visc, heat, tension, mu: p.mu, kappa: p.kappa, sigma0: p.sigma0, sigma1: p.sigma1 }
    }

    pub fn newtonian(p: &PhysicalParams) -> Self {
        Self::new(p, ViscosityLaw::Newtonian, HeatLaw::Fourier, TensionLaw::Linear)
    }

    pub fn viscosity(&self, r: f64) -> f64 {
        match self.visc {
            ViscosityLaw::Newtonian => self.mu,
            ViscosityLaw::Tempdep => self.mu * (-0.5 * r.tanh()).exp(),
        }
    }

    pub fn conductivity(&self, r: f64) -> f64 {
        match self.heat {
            HeatLaw::Fourier => self.kappa,
            HeatLaw::Tempdep => self.kappa * (0.3 * r.tanh()).exp(),
        }
    }

    pub fn gamma_visc(&self, r: f64, m: &Matrix3<f64>) -> Matrix3<f64> {
        m * self.viscosity(r)
    }

    pub fn phi_heat(&self, r: f64, z: &Vector3<f64>) -> Vector3<f64> {
        z * -self.conductivity(r)
    }

    pub fn sigma_fn(&self, r: f64) -> f64 {
        match self.tension {
            TensionLaw::Linear => self.sigma0 + self.sigma1 * r,
            TensionLaw::Smooth => self.sigma0 + self.sigma1 * r.tanh(),
        }
    }

    pub fn sigma_deriv(&self, r: f64) -> f64 {
        match self.tension {
            TensionLaw::Linear => self.sigma1,
            TensionLaw::Smooth => self.sigma1 / r.cosh().powi(2),
        }
    }

    /// Soft check that the heat flux vanishes at zero gradient for sampled temperatures.
    pub fn heat_flux_vanishes_at_zero_gradient(&self) -> bool {
        (-20..=20).all(|i| self.phi_heat(i as f64 * 0.25, &Vector3::zeros()).norm() == 0.0)
    }

    pub fn stress_vanishes_at_zero_strain(&self) -> bool {
        (-20..=20).all(|i| self.gamma_visc(i as f64 * 0.25, &Matrix3::zeros()).norm() == 0.0)
    }
}

/// Worst relative deviation of central differences at `(0, 0)` from `mu M` and `-kappa z`.
pub fn verify_constitutive_linearization(c: &ConstitutiveSet, p: &PhysicalParams, h: f64) -> f64 {
    let n = p.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..8 {
        let mut m = Matrix3::<f64>::zeros();
        let mut z = Vector3::<f64>::zeros();
        for i in 0..n {
            z[i] = rng.gen_range(-1.0..1.0);
            for j in i..n {
                let v = rng.gen_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let theta: f64 = rng.gen_range(-1.0..1.0);
        let scale = (theta * theta + m.norm_squared()).sqrt();
        let (theta_m, m) = (theta / scale, m / scale);
        let zs = (theta * theta + z.norm_squared()).sqrt();
        let (theta_z, z) = (theta / zs, z / zs);

        let dg = (c.gamma_visc(h * theta_m, &(m * h)) - c.gamma_visc(-h * theta_m, &(m * -h))) / (2.0 * h);
        let target = m * p.mu;
        worst = worst.max((dg - target).norm() / target.norm());

        let dp = (c.phi_heat(h * theta_z, &(z * h)) - c.phi_heat(-h * theta_z, &(z * -h))) / (2.0 * h);
        let target = z * -p.kappa;
        worst = worst.max((dp - target).norm() / target.norm());
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QNormEstimate {
    pub q1: f64,
    pub q2: f64,
    pub method: String,
    /// `(|xi|, fiber norm)` for every sample.
    pub samples: Vec<(f64, f64)>,
}

impl QNormEstimate {
    pub fn scaled(&self, factor: f64) -> Self {
        Self { q1: self.q1 * factor, q2: self.q2 * factor, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GateOutcome {
    pub pass: bool,
    pub margin: f64,
}

/// `max{q1^2/4, q2^2/4} sigma1^2 < 2 mu kappa`, with slack `2 mu kappa - lhs`.
pub fn check_parameter_gate(p: &PhysicalParams, est: &QNormEstimate) -> GateOutcome {
    let lhs = (est.q1 * est.q1 / 4.0).max(est.q2 * est.q2 / 4.0) * p.sigma1 * p.sigma1;
    let margin = 2.0 * p.mu * p.kappa - lhs;
    GateOutcome { pass: margin > 0.0, margin }
}

/// Operator norm of the trace pairing on one frequency fiber.
///
/// Both forms factor into a vector trace functional `v -> 2 pi |xi| v_L(b)` and a
/// scalar trace `theta -> theta(b)`; each supremum is `sqrt(e^T G^{-1} e)` for the
/// fiber Gram matrix `G`, assembled exactly on a doubled Chebyshev grid.
fn fiber_norm(vg: &VerticalGrid, xi: f64) -> Result<f64> {
    if xi == 0.0 {
        return Ok(0.0);
    }
    let nz = vg.nz();
    let fine = VerticalGrid::new(vg.depth, 2 * nz)?;
    let nf = fine.nz();
    let p = vg.interp_matrix(&fine.nodes);
    // derivative sampled on the fine grid: P D
    let mut pd = vec![0.0; nf * nz];
    for i in 0..nf {
        for j in 0..nz {
            pd[i * nz + j] = (0..nz).map(|k| p[i * nz + k] * vg.diff[k * nz + j]).sum();
        }
    }
    let unknown = nz - 1; // node 0 pinned to zero
    let k2 = 4.0 * PI * PI * xi * xi;

    // scalar: int (1 + 4 pi^2 xi^2)|t|^2 + |t'|^2
    let mut gs = DMatrix::<f64>::zeros(unknown, unknown);
    for a in 0..unknown {
        for b in 0..unknown {
            let (ja, jb) = (a + 1, b + 1);
            let mut s = 0.0;
            for q in 0..nf {
                s += fine.weights[q]
                    * ((1.0 + k2) * p[q * nz + ja] * p[q * nz + jb] + pd[q * nz + ja] * pd[q * nz + jb]);
            }
            gs[(a, b)] = s;
        }
    }
    let chol = gs.cholesky().ok_or(Error::DegenerateGram)?;
    let mut e = DVector::<f64>::zeros(unknown);
    e[unknown - 1] = 1.0;
    let t_theta = e.dot(&chol.solve(&e)).sqrt();

    // vector (a, c): int 8 pi^2 xi^2 |a|^2 + |a' + 2 pi i xi c|^2 + 2 |c'|^2
    let w = 2.0 * PI * xi;
    let dimv = 2 * unknown;
    let mut gv = DMatrix::<C64>::zeros(dimv, dimv);
    for q in 0..nf {
        let wq = fine.weights[q];
        // rows of the three integrand pieces as linear forms in (a, c)
        let mut l1 = vec![C64::default(); dimv];
        let mut l2 = vec![C64::default(); dimv];
        let mut l3 = vec![C64::default(); dimv];
        for j in 0..unknown {
            let jj = j + 1;
            l1[j] = C64::new((2.0 * k2).sqrt() * p[q * nz + jj], 0.0);
            l2[j] = C64::new(pd[q * nz + jj], 0.0);
            l2[unknown + j] = C64::new(0.0, w * p[q * nz + jj]);
            l3[unknown + j] = C64::new(2f64.sqrt() * pd[q * nz + jj], 0.0);
        }
        for l in [&l1, &l2, &l3] {
            for a in 0..dimv {
                if l[a] == C64::default() {
                    continue;
                }
                for b in 0..dimv {
                    gv[(a, b)] += l[a].conj() * l[b] * wq;
                }
            }
        }
    }
    let chol = gv.cholesky().ok_or(Error::DegenerateGram)?;
    let mut e = DVector::<C64>::zeros(dimv);
    e[unknown - 1] = C64::new(1.0, 0.0);
    let t_v = w * e.dotc(&chol.solve(&e)).re.sqrt();
    Ok(t_v * t_theta)
}

/// Supremum over sampled `|xi|` of the fiberwise operator norms of the boundary forms.
/// This is a lower bound for the true norms.
pub fn estimate_q_norms(vg: &VerticalGrid, freq_samples: &[f64]) -> Result<QNormEstimate> {
    if freq_samples.is_empty() {
        return Err(Error::Grid("no frequency samples".into()));
    }
    let mut samples = Vec::with_capacity(freq_samples.len());
    let mut sup: f64 = 0.0;
    for &xi in freq_samples {
        let v = fiber_norm(vg, xi.abs())?;
        sup = sup.max(v);
        samples.push((xi.abs(), v));
    }
    Ok(QNormEstimate {
        q1: sup,
        q2: sup,
        method: format!(
            "fiber Rayleigh quotients on {} Chebyshev nodes, Gram matrices on {} nodes, {} samples",
            vg.nz(),
            2 * vg.nz(),
            freq_samples.len()
        ),
        samples,
    })
}

/// Geometric sample set between `lo` and `hi` (inclusive).
pub fn geometric_samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let r = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (r * i as f64).exp()).collect()
}
