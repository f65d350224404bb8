//! External sources: whole-space bulk force, stress and heat (composed with the
//! flattening map each iteration) and their horizontal-only counterparts.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Vertical dependence of a whole-space pattern, in the physical height `y_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Vertical {
    Const,
    Gaussian { center: f64, width: f64 },
}

impl Vertical {
    pub fn eval(&self, yn: f64) -> f64 {
        match *self {
            Vertical::Const => 1.0,
            Vertical::Gaussian { center, width } => (-((yn - center) / width).powi(2)).exp(),
        }
    }
}

/// `(a cos + b sin)(2 pi j . x' / L) v(y_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub wavenumber: [i64; 2],
    pub cos: f64,
    pub sin: f64,
    pub vertical: Vertical,
}

impl Pattern {
    pub fn cosine(j: i64, a: f64) -> Self {
        Self { wavenumber: [j, 0], cos: a, sin: 0.0, vertical: Vertical::Const }
    }

    pub fn sine(j: i64, a: f64) -> Self {
        Self { wavenumber: [j, 0], cos: 0.0, sin: a, vertical: Vertical::Const }
    }

    pub fn with_vertical(mut self, v: Vertical) -> Self {
        self.vertical = v;
        self
    }

    pub fn eval(&self, x: [f64; 2], yn: f64, box_len: f64) -> f64 {
        let ph = 2.0 * PI * (self.wavenumber[0] as f64 * x[0] + self.wavenumber[1] as f64 * x[1]) / box_len;
        (self.cos * ph.cos() + self.sin * ph.sin()) * self.vertical.eval(yn)
    }

    pub fn eval_flat(&self, x: [f64; 2], box_len: f64) -> f64 {
        let ph = 2.0 * PI * (self.wavenumber[0] as f64 * x[0] + self.wavenumber[1] as f64 * x[1]) / box_len;
        self.cos * ph.cos() + self.sin * ph.sin()
    }
}

fn sum(ps: &[Pattern], x: [f64; 2], yn: f64, l: f64) -> f64 {
    ps.iter().map(|p| p.eval(x, yn, l)).sum()
}

fn sum_flat(ps: &[Pattern], x: [f64; 2], l: f64) -> f64 {
    ps.iter().map(|p| p.eval_flat(x, l)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForcingPreset {
    None,
    HeatOnly,
    StressOnly,
    BulkForce,
    Mixed,
}

/// Forcing tuple. Every value is multiplied by `amplitude`. Stress tensors are
/// stored row-major with `n * n` entries and must be symmetric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForcingData {
    pub dim: usize,
    pub box_len: f64,
    pub amplitude: f64,
    pub bulk_force: Vec<Vec<Pattern>>,
    pub flat_force: Vec<Vec<Pattern>>,
    pub bulk_stress: Vec<Vec<Pattern>>,
    pub flat_stress: Vec<Vec<Pattern>>,
    pub bulk_heat: Vec<Pattern>,
    pub flat_heat: Vec<Pattern>,
}

impl ForcingData {
    pub fn zero(dim: usize, box_len: f64) -> Self {
        Self {
            dim,
            box_len,
            amplitude: 0.0,
            bulk_force: vec![vec![]; dim],
            flat_force: vec![vec![]; dim],
            bulk_stress: vec![vec![]; dim * dim],
            flat_stress: vec![vec![]; dim * dim],
            bulk_heat: vec![],
            flat_heat: vec![],
        }
    }

    /// Single-mode presets along `x_1` at wavenumber `j`.
    pub fn preset(kind: ForcingPreset, dim: usize, box_len: f64, depth: f64, j: i64, amplitude: f64) -> Self {
        let mut f = Self::zero(dim, box_len);
        f.amplitude = amplitude;
        let n = dim;
        let mid = Vertical::Gaussian { center: 0.5 * depth, width: 0.5 * depth };
        let top = Vertical::Gaussian { center: depth, width: 0.5 * depth };
        let heat = |f: &mut Self| f.flat_heat.push(Pattern::cosine(j, 1.0));
        let stress = |f: &mut Self| f.flat_stress[n * n - 1].push(Pattern::cosine(j, 1.0));
        let bulk = |f: &mut Self| {
            f.bulk_force[0].push(Pattern::sine(j, 1.0).with_vertical(mid));
            f.bulk_force[n - 1].push(Pattern::cosine(j, 1.0).with_vertical(mid));
        };
        match kind {
            ForcingPreset::None => f.amplitude = 0.0,
            ForcingPreset::HeatOnly => heat(&mut f),
            ForcingPreset::StressOnly => stress(&mut f),
            ForcingPreset::BulkForce => bulk(&mut f),
            ForcingPreset::Mixed => {
                heat(&mut f);
                stress(&mut f);
                bulk(&mut f);
                f.bulk_heat.push(Pattern::cosine(j, 0.5).with_vertical(top));
                f.flat_force[0].push(Pattern::sine(j, 0.5));
                // symmetric tangential stress
                f.flat_stress[n - 1].push(Pattern::sine(j, 0.25));
                f.flat_stress[(n - 1) * n].push(Pattern::sine(j, 0.25));
            }
        }
        f
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self { amplitude, ..self.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    /// `x -> f(x - dx e_1)` for every pattern.
    pub fn translated(&self, dx: f64) -> Self {
        let shift = |p: &Pattern| {
            let ph = 2.0 * PI * p.wavenumber[0] as f64 * dx / self.box_len;
            let (c, s) = (ph.cos(), ph.sin());
            Pattern { cos: p.cos * c - p.sin * s, sin: p.sin * c + p.cos * s, ..*p }
        };
        let map = |v: &Vec<Vec<Pattern>>| v.iter().map(|c| c.iter().map(shift).collect()).collect();
        Self {
            bulk_force: map(&self.bulk_force),
            flat_force: map(&self.flat_force),
            bulk_stress: map(&self.bulk_stress),
            flat_stress: map(&self.flat_stress),
            bulk_heat: self.bulk_heat.iter().map(shift).collect(),
            flat_heat: self.flat_heat.iter().map(shift).collect(),
            ..self.clone()
        }
    }

    /// Largest horizontal wavenumber used (for the dealiasing check).
    pub fn max_wavenumber(&self) -> i64 {
        let all = self
            .bulk_force
            .iter()
            .chain(&self.flat_force)
            .chain(&self.bulk_stress)
            .chain(&self.flat_stress)
            .flatten()
            .chain(&self.bulk_heat)
            .chain(&self.flat_heat);
        all.map(|p| p.wavenumber[0].abs().max(p.wavenumber[1].abs())).max().unwrap_or(0)
    }

    /// `f(F(x)) + f_flat(x')` at physical height `yn`.
    pub fn force_at(&self, x: [f64; 2], yn: f64) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                self.amplitude
                    * (sum(&self.bulk_force[i], x, yn, self.box_len) + sum_flat(&self.flat_force[i], x, self.box_len))
            })
            .collect()
    }

    /// Total surface stress tensor (row-major) at the deformed surface height `yn`.
    pub fn stress_at(&self, x: [f64; 2], yn: f64) -> Vec<f64> {
        (0..self.dim * self.dim)
            .map(|k| {
                self.amplitude
                    * (sum(&self.bulk_stress[k], x, yn, self.box_len) + sum_flat(&self.flat_stress[k], x, self.box_len))
            })
            .collect()
    }

    pub fn heat_at(&self, x: [f64; 2], yn: f64) -> f64 {
        self.amplitude * (sum(&self.bulk_heat, x, yn, self.box_len) + sum_flat(&self.flat_heat, x, self.box_len))
    }
}
