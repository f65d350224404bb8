//! Grids, transforms, norms and field I/O.

mod field;
mod grid;
pub mod io;
pub mod norms;
mod pseudo;

pub use field::{dealias, dealias_surface, dealias_tail, ddx, Fourier, SpectralField, SurfaceSpectral};
pub use grid::{FrequencyGrid, VerticalGrid};
pub use pseudo::{evaluate_at, evaluate_surface_at, Pseudo};
pub use norms::{
    check_divergence_trace, hdot_neg1, sobolev_norm, surface_sobolev_norm, x_norm, DivergenceTraceReport,
};

/// Data tuple `(f, g, l, k, h, m)`: bulk force, divergence, heat source, surface
/// stress, kinematic datum and surface heat flux.
#[derive(Clone, Debug, PartialEq)]
pub struct YData {
    pub f: SpectralField,
    pub g: SpectralField,
    pub l: SpectralField,
    pub k: SurfaceSpectral,
    pub h: SurfaceSpectral,
    pub m: SurfaceSpectral,
}

impl YData {
    pub fn zeros(n: usize, fg: &FrequencyGrid, vg: &VerticalGrid) -> Self {
        let nh = fg.len();
        Self {
            f: SpectralField::like(fg, vg, n),
            g: SpectralField::like(fg, vg, 1),
            l: SpectralField::like(fg, vg, 1),
            k: SurfaceSpectral::zeros(n, nh),
            h: SurfaceSpectral::zeros(1, nh),
            m: SurfaceSpectral::zeros(1, nh),
        }
    }

    pub fn dim(&self) -> usize {
        self.f.comps
    }

    pub fn axpy(&mut self, a: f64, o: &Self) {
        self.f.axpy(a, &o.f);
        self.g.axpy(a, &o.g);
        self.l.axpy(a, &o.l);
        self.k.axpy(a, &o.k);
        self.h.axpy(a, &o.h);
        self.m.axpy(a, &o.m);
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            f: self.f.scaled(a),
            g: self.g.scaled(a),
            l: self.l.scaled(a),
            k: self.k.scaled(a),
            h: self.h.scaled(a),
            m: self.m.scaled(a),
        }
    }

    pub fn diff(&self, o: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, o);
        out
    }

    /// Squared `Y^s` norm, including the `H^{-1}` gap term (may be infinite).
    pub fn norm_sq(&self, fg: &FrequencyGrid, vg: &VerticalGrid, s: f64) -> f64 {
        norms::sobolev_sq(&self.f, fg, vg, s)
            + norms::sobolev_sq(&self.g, fg, vg, s + 1.0)
            + norms::sobolev_sq(&self.l, fg, vg, s)
            + norms::surface_sobolev_sq(&self.k, fg, s + 0.5)
            + norms::surface_sobolev_sq(&self.h, fg, s + 1.5)
            + norms::surface_sobolev_sq(&self.m, fg, s + 0.5)
            + check_divergence_trace(self, fg, vg).hdot_neg1.powi(2)
    }

    pub fn norm(&self, fg: &FrequencyGrid, vg: &VerticalGrid, s: f64) -> f64 {
        self.norm_sq(fg, vg, s).sqrt()
    }

    pub fn hermitian_defect(&self, fg: &FrequencyGrid) -> f64 {
        [
            self.f.hermitian_defect(fg),
            self.g.hermitian_defect(fg),
            self.l.hermitian_defect(fg),
            self.k.hermitian_defect(fg),
            self.h.hermitian_defect(fg),
            self.m.hermitian_defect(fg),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}
