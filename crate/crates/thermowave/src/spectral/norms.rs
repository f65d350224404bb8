//! Box analogues of the Sobolev-type norms used for states and data.
//!
//! All sums carry the box volume `L^{n-1}`, so a single mode `c e^{2 pi i xi x}`
//! plus its conjugate has the physical `L^2` norm of `2 Re(c e^{...})` over the box.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::field::{SpectralField, SurfaceSpectral};
use super::grid::{FrequencyGrid, VerticalGrid};
use super::YData;

/// Zero-mode magnitude above which `h - int g` is treated as outside `H^{-1}`.
pub const ZERO_MODE_EPS: f64 = 1e-10;

fn bracket(xi_abs: f64) -> f64 {
    1.0 + xi_abs * xi_abs
}

/// Squared `H^s` norm of a bulk field; vertical derivatives up to `floor(s)` are
/// weighted by `(1+|xi|^2)^(s-j)`.
pub fn sobolev_sq(field: &SpectralField, fg: &FrequencyGrid, vg: &VerticalGrid, s: f64) -> f64 {
    let nz = vg.nz();
    let jmax = s.floor() as usize;
    let mut a = vec![C64::default(); nz];
    let mut b = vec![C64::default(); nz];
    let mut total = 0.0;
    for c in 0..field.comps {
        for h in 0..field.nh {
            let prof = field.profile(c, h);
            if prof.iter().all(|v| *v == C64::default()) {
                continue;
            }
            let w = bracket(fg.xi_abs(h));
            a.copy_from_slice(prof);
            for j in 0..=jmax {
                if j > 0 {
                    vg.differentiate(&a, &mut b);
                    std::mem::swap(&mut a, &mut b);
                }
                let e: Vec<f64> = a.iter().map(|v| v.norm_sqr()).collect();
                total += w.powf(s - j as f64) * vg.integrate(&e);
            }
        }
    }
    total * fg.volume()
}

pub fn sobolev_norm(field: &SpectralField, fg: &FrequencyGrid, vg: &VerticalGrid, s: f64) -> f64 {
    sobolev_sq(field, fg, vg, s).sqrt()
}

pub fn surface_sobolev_sq(f: &SurfaceSpectral, fg: &FrequencyGrid, s: f64) -> f64 {
    let mut total = 0.0;
    for c in 0..f.comps {
        for h in 0..f.nh {
            total += bracket(fg.xi_abs(h)).powf(s) * f.at(c, h).norm_sqr();
        }
    }
    total * fg.volume()
}

pub fn surface_sobolev_norm(f: &SurfaceSpectral, fg: &FrequencyGrid, s: f64) -> f64 {
    surface_sobolev_sq(f, fg, s).sqrt()
}

/// Free-surface weight: `(xi_1^2 + |xi|^4)/|xi|^2` inside the unit ball, `(1+|xi|^2)^t` outside.
pub fn x_weight(xi: [f64; 2], t: f64) -> f64 {
    let r2 = xi[0] * xi[0] + xi[1] * xi[1];
    if r2 == 0.0 {
        0.0
    } else if r2 < 1.0 {
        (xi[0] * xi[0] + r2 * r2) / r2
    } else {
        (1.0 + r2).powf(t)
    }
}

pub fn x_sq(eta: &SurfaceSpectral, fg: &FrequencyGrid, t: f64) -> f64 {
    let mut total = 0.0;
    for c in 0..eta.comps {
        for h in 0..eta.nh {
            total += x_weight(fg.xi(h), t) * eta.at(c, h).norm_sqr();
        }
    }
    total * fg.volume()
}

pub fn x_norm(eta: &SurfaceSpectral, fg: &FrequencyGrid, t: f64) -> f64 {
    x_sq(eta, fg, t).sqrt()
}

/// Homogeneous `H^{-1}` seminorm; `f64::INFINITY` when the zero mode exceeds [`ZERO_MODE_EPS`].
pub fn hdot_neg1(f: &SurfaceSpectral, fg: &FrequencyGrid) -> f64 {
    let mut total = 0.0;
    for c in 0..f.comps {
        for h in 0..f.nh {
            let r = fg.xi_abs(h);
            if r == 0.0 {
                if f.at(c, h).norm() > ZERO_MODE_EPS {
                    return f64::INFINITY;
                }
                continue;
            }
            total += f.at(c, h).norm_sqr() / (r * r);
        }
    }
    (total * fg.volume()).sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceTraceReport {
    /// `h - int_0^b g` per frequency.
    #[serde(skip)]
    pub gap: SurfaceSpectral,
    /// Homogeneous `H^{-1}` seminorm of the gap (infinite when the zero mode is obstructed).
    pub hdot_neg1: f64,
    pub zero_mode: f64,
}

pub fn check_divergence_trace(data: &YData, fg: &FrequencyGrid, vg: &VerticalGrid) -> DivergenceTraceReport {
    let nh = fg.len();
    let mut gap = SurfaceSpectral::zeros(1, nh);
    for h in 0..nh {
        gap.data[h] = data.h.at(0, h) - vg.integrate(data.g.profile(0, h));
    }
    let zero_mode = gap.data[0].norm();
    DivergenceTraceReport { hdot_neg1: hdot_neg1(&gap, fg), zero_mode, gap }
}
