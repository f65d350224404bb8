use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use super::grid::{FrequencyGrid, VerticalGrid};
use crate::error::{Error, Result};

/// Horizontal Fourier coefficients on every vertical node.
///
/// Layout is `(component, xi index, node)` with the node index fastest, so a
/// vertical profile `data[c][xi][..]` is a contiguous slice.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub comps: usize,
    pub nh: usize,
    pub nz: usize,
    pub data: Vec<C64>,
    pub real_flag: bool,
}

impl SpectralField {
    pub fn zeros(comps: usize, nh: usize, nz: usize) -> Self {
        Self { comps, nh, nz, data: vec![C64::default(); comps * nh * nz], real_flag: true }
    }

    pub fn like(fg: &FrequencyGrid, vg: &VerticalGrid, comps: usize) -> Self {
        Self::zeros(comps, fg.len(), vg.nz())
    }

    #[inline]
    pub fn offset(&self, c: usize, h: usize) -> usize {
        (c * self.nh + h) * self.nz
    }

    pub fn profile(&self, c: usize, h: usize) -> &[C64] {
        let o = self.offset(c, h);
        &self.data[o..o + self.nz]
    }

    pub fn profile_mut(&mut self, c: usize, h: usize) -> &mut [C64] {
        let o = self.offset(c, h);
        let nz = self.nz;
        &mut self.data[o..o + nz]
    }

    /// Values on the top node `x_n = b`.
    pub fn top_trace(&self) -> SurfaceSpectral {
        let mut s = SurfaceSpectral::zeros(self.comps, self.nh);
        for c in 0..self.comps {
            for h in 0..self.nh {
                s.data[c * self.nh + h] = self.data[self.offset(c, h) + self.nz - 1];
            }
        }
        s
    }

    pub fn component(&self, c: usize) -> SpectralField {
        let o = self.offset(c, 0);
        let len = self.nh * self.nz;
        SpectralField {
            comps: 1,
            nh: self.nh,
            nz: self.nz,
            data: self.data[o..o + len].to_vec(),
            real_flag: self.real_flag,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= a);
        out
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += y * a;
        }
    }

    /// Largest deviation from Hermitian symmetry `v(-xi) = conj(v(xi))`.
    pub fn hermitian_defect(&self, fg: &FrequencyGrid) -> f64 {
        let mut worst: f64 = 0.0;
        for c in 0..self.comps {
            for h in 0..self.nh {
                let hn = fg.neg(h);
                for z in 0..self.nz {
                    let a = self.data[self.offset(c, h) + z];
                    let b = self.data[self.offset(c, hn) + z];
                    worst = worst.max((a - b.conj()).norm());
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Horizontal Fourier coefficients of surface quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceSpectral {
    pub comps: usize,
    pub nh: usize,
    pub data: Vec<C64>,
    pub real_flag: bool,
}

impl SurfaceSpectral {
    pub fn zeros(comps: usize, nh: usize) -> Self {
        Self { comps, nh, data: vec![C64::default(); comps * nh], real_flag: true }
    }

    #[inline]
    pub fn at(&self, c: usize, h: usize) -> C64 {
        self.data[c * self.nh + h]
    }

    #[inline]
    pub fn at_mut(&mut self, c: usize, h: usize) -> &mut C64 {
        &mut self.data[c * self.nh + h]
    }

    pub fn component(&self, c: usize) -> SurfaceSpectral {
        SurfaceSpectral {
            comps: 1,
            nh: self.nh,
            data: self.data[c * self.nh..(c + 1) * self.nh].to_vec(),
            real_flag: self.real_flag,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= a);
        out
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += y * a;
        }
    }

    pub fn hermitian_defect(&self, fg: &FrequencyGrid) -> f64 {
        let mut worst: f64 = 0.0;
        for c in 0..self.comps {
            for h in 0..self.nh {
                let a = self.at(c, h);
                let b = self.at(c, fg.neg(h));
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Horizontal FFT plans for one lattice.
///
/// Physical values `f(x_j)` relate to coefficients by `f(x) = sum_k c_k e^{2 pi i xi_k x}`,
/// so the forward map divides by the point count.
#[derive(Clone)]
pub struct Fourier {
    grid: FrequencyGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fourier {
    pub fn new(grid: &FrequencyGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid: grid.clone(),
            fwd: planner.plan_fft_forward(grid.modes),
            inv: planner.plan_fft_inverse(grid.modes),
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    fn transform(&self, buf: &mut [C64], forward: bool) {
        let plan = if forward { &self.fwd } else { &self.inv };
        let m = self.grid.modes;
        if self.grid.dim_h == 1 {
            plan.process(buf);
        } else {
            // rows (second index contiguous), then columns
            plan.process(buf);
            let mut col = vec![C64::default(); m];
            for j in 0..m {
                for i in 0..m {
                    col[i] = buf[i * m + j];
                }
                plan.process(&mut col);
                for i in 0..m {
                    buf[i * m + j] = col[i];
                }
            }
        }
    }

    /// In-place forward transform of one horizontal slice.
    pub fn forward_slice(&self, buf: &mut [C64]) {
        self.transform(buf, true);
        let s = 1.0 / self.grid.len() as f64;
        buf.iter_mut().for_each(|v| *v *= s);
    }

    /// In-place inverse transform of one horizontal slice.
    pub fn inverse_slice(&self, buf: &mut [C64]) {
        self.transform(buf, false);
    }

    /// Physical array laid out `(component, point, node)` to spectral coefficients.
    pub fn forward(&self, phys: &[f64], comps: usize, nz: usize) -> Result<SpectralField> {
        let nh = self.grid.len();
        if phys.len() != comps * nh * nz {
            return Err(Error::SizeMismatch { expected: comps * nh * nz, got: phys.len() });
        }
        let mut out = SpectralField::zeros(comps, nh, nz);
        let mut buf = vec![C64::default(); nh];
        for c in 0..comps {
            for z in 0..nz {
                for h in 0..nh {
                    buf[h] = C64::new(phys[(c * nh + h) * nz + z], 0.0);
                }
                self.forward_slice(&mut buf);
                for h in 0..nh {
                    out.data[(c * nh + h) * nz + z] = buf[h];
                }
            }
        }
        Ok(out)
    }

    /// Spectral coefficients back to a real physical array (imaginary parts dropped).
    pub fn inverse(&self, field: &SpectralField) -> Result<Vec<f64>> {
        let nh = self.grid.len();
        if field.nh != nh {
            return Err(Error::SizeMismatch { expected: nh, got: field.nh });
        }
        let (comps, nz) = (field.comps, field.nz);
        let mut out = vec![0.0; comps * nh * nz];
        let mut buf = vec![C64::default(); nh];
        for c in 0..comps {
            for z in 0..nz {
                for h in 0..nh {
                    buf[h] = field.data[(c * nh + h) * nz + z];
                }
                self.inverse_slice(&mut buf);
                for h in 0..nh {
                    out[(c * nh + h) * nz + z] = buf[h].re;
                }
            }
        }
        Ok(out)
    }

    pub fn forward_surface(&self, phys: &[f64], comps: usize) -> Result<SurfaceSpectral> {
        let f = self.forward(phys, comps, 1)?;
        Ok(SurfaceSpectral { comps, nh: f.nh, data: f.data, real_flag: true })
    }

    pub fn inverse_surface(&self, s: &SurfaceSpectral) -> Result<Vec<f64>> {
        let f = SpectralField { comps: s.comps, nh: s.nh, nz: 1, data: s.data.clone(), real_flag: true };
        self.inverse(&f)
    }
}

/// `2 pi i xi_j` for horizontal direction `j`, zero on the Nyquist entries.
pub fn ddx(fg: &FrequencyGrid, h: usize, j: usize) -> C64 {
    if fg.is_nyquist(h) {
        return C64::default();
    }
    C64::new(0.0, 2.0 * std::f64::consts::PI * fg.xi(h)[j])
}

/// Zero every mode removed by the 2/3 rule.
pub fn dealias(field: &mut SpectralField, fg: &FrequencyGrid) {
    for c in 0..field.comps {
        for h in 0..field.nh {
            if !fg.keeps(h) {
                field.profile_mut(c, h).iter_mut().for_each(|v| *v = C64::default());
            }
        }
    }
}

pub fn dealias_surface(s: &mut SurfaceSpectral, fg: &FrequencyGrid) {
    for c in 0..s.comps {
        for h in 0..s.nh {
            if !fg.keeps(h) {
                *s.at_mut(c, h) = C64::default();
            }
        }
    }
}

/// Energy in modes dropped by the 2/3 rule relative to the total.
pub fn dealias_tail(field: &SpectralField, fg: &FrequencyGrid) -> f64 {
    let (mut tail, mut total) = (0.0, 0.0);
    for c in 0..field.comps {
        for h in 0..field.nh {
            let e: f64 = field.profile(c, h).iter().map(|v| v.norm_sqr()).sum();
            total += e;
            if !fg.keeps(h) {
                tail += e;
            }
        }
    }
    if total > 0.0 {
        (tail / total).sqrt()
    } else {
        0.0
    }
}
