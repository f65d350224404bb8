//! Physical-space products for pseudospectral evaluation of nonlinear terms.
//!
//! Physical arrays use the layout `(component, point, node)` with the node
//! index fastest, matching [`SpectralField`].

use num_complex::Complex64 as C64;

use super::field::{dealias, dealias_surface, ddx, Fourier, SpectralField, SurfaceSpectral};
use super::grid::{FrequencyGrid, VerticalGrid};

#[derive(Clone)]
pub struct Pseudo {
    pub fg: FrequencyGrid,
    pub vg: VerticalGrid,
    pub fourier: Fourier,
}

impl Pseudo {
    pub fn new(fg: &FrequencyGrid, vg: &VerticalGrid) -> Self {
        Self { fg: fg.clone(), vg: vg.clone(), fourier: Fourier::new(fg) }
    }

    pub fn points(&self) -> usize {
        self.fg.len()
    }

    pub fn nz(&self) -> usize {
        self.vg.nz()
    }

    pub fn to_phys(&self, f: &SpectralField) -> Vec<f64> {
        self.fourier.inverse(f).expect("field matches grid")
    }

    /// Forward transform followed by the 2/3 truncation.
    pub fn to_spec(&self, phys: &[f64], comps: usize) -> SpectralField {
        let mut f = self.fourier.forward(phys, comps, self.nz()).expect("array matches grid");
        dealias(&mut f, &self.fg);
        f
    }

    /// As [`Pseudo::to_spec`], also returning the relative energy removed by the truncation.
    pub fn to_spec_with_tail(&self, phys: &[f64], comps: usize) -> (SpectralField, f64) {
        let mut f = self.fourier.forward(phys, comps, self.nz()).expect("array matches grid");
        let tail = super::field::dealias_tail(&f, &self.fg);
        dealias(&mut f, &self.fg);
        (f, tail)
    }

    pub fn surf_to_phys(&self, s: &SurfaceSpectral) -> Vec<f64> {
        self.fourier.inverse_surface(s).expect("field matches grid")
    }

    pub fn surf_to_spec(&self, phys: &[f64], comps: usize) -> SurfaceSpectral {
        let mut s = self.fourier.forward_surface(phys, comps).expect("array matches grid");
        dealias_surface(&mut s, &self.fg);
        s
    }

    /// Horizontal derivative `d/dx_j`.
    pub fn dx(&self, f: &SpectralField, j: usize) -> SpectralField {
        let mut out = f.clone();
        for c in 0..f.comps {
            for h in 0..f.nh {
                let k = ddx(&self.fg, h, j);
                out.profile_mut(c, h).iter_mut().for_each(|v| *v *= k);
            }
        }
        out
    }

    /// Vertical collocation derivative.
    pub fn dz(&self, f: &SpectralField) -> SpectralField {
        let mut out = f.clone();
        for c in 0..f.comps {
            for h in 0..f.nh {
                self.vg.differentiate(f.profile(c, h), out.profile_mut(c, h));
            }
        }
        out
    }

    /// Derivative along direction `k` of an `n`-dimensional strip (`k = n - 1` is vertical).
    pub fn d(&self, f: &SpectralField, k: usize, n: usize) -> SpectralField {
        if k + 1 == n {
            self.dz(f)
        } else {
            self.dx(f, k)
        }
    }

    pub fn surf_dx(&self, s: &SurfaceSpectral, j: usize) -> SurfaceSpectral {
        let mut out = s.clone();
        for c in 0..s.comps {
            for h in 0..s.nh {
                *out.at_mut(c, h) *= ddx(&self.fg, h, j);
            }
        }
        out
    }

    /// Physical values of one component of a bulk field.
    pub fn comp_phys(&self, f: &SpectralField, c: usize) -> Vec<f64> {
        self.to_phys(&f.component(c))
    }

    /// Top-node slice `(point)` of a single-component physical array.
    pub fn top(&self, phys: &[f64]) -> Vec<f64> {
        let nz = self.nz();
        (0..self.points()).map(|i| phys[i * nz + nz - 1]).collect()
    }

    /// Broadcast a surface physical array along the vertical.
    pub fn lift(&self, surf: &[f64]) -> Vec<f64> {
        let nz = self.nz();
        surf.iter().flat_map(|&v| std::iter::repeat(v).take(nz)).collect()
    }
}

/// Evaluate a bulk spectral field at an arbitrary point `(x', x_n)`.
pub fn evaluate_at(f: &SpectralField, c: usize, fg: &FrequencyGrid, vg: &VerticalGrid, xh: [f64; 2], xn: f64) -> f64 {
    let row = vg.interp_row(xn);
    let mut acc = C64::default();
    for h in 0..f.nh {
        let prof = f.profile(c, h);
        let v: C64 = prof.iter().zip(&row).map(|(p, r)| p * r).sum();
        if v == C64::default() {
            continue;
        }
        let xi = fg.xi(h);
        let ph = 2.0 * std::f64::consts::PI * (xi[0] * xh[0] + xi[1] * xh[1]);
        acc += v * C64::from_polar(1.0, ph);
    }
    acc.re
}

pub fn evaluate_surface_at(s: &SurfaceSpectral, c: usize, fg: &FrequencyGrid, xh: [f64; 2]) -> f64 {
    let mut acc = C64::default();
    for h in 0..s.nh {
        let v = s.at(c, h);
        if v == C64::default() {
            continue;
        }
        let xi = fg.xi(h);
        let ph = 2.0 * std::f64::consts::PI * (xi[0] * xh[0] + xi[1] * xh[1]);
        acc += v * C64::from_polar(1.0, ph);
    }
    acc.re
}
