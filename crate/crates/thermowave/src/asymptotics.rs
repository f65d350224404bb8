//! Low-frequency coefficients of the symbols, lower bounds on `rho` and
//! high-frequency decay ratios, each reported as a sampled claim.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PhysicalParams;
use crate::ode::{solve_symbol, SolveOptions, SymbolEntry, SymbolTable};
use crate::spectral::{FrequencyGrid, VerticalGrid};

/// Which symbol quantity is divided by `|xi|^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Selector {
    /// `omega_{v_n}` at the surface.
    VnTrace,
    /// `omega_{v_n}(., x_n)` in the bulk.
    VnAt { xn: f64 },
    /// `omega_phi` at the surface.
    PhiTrace,
    /// `omega_q(., x_n) - 1`.
    QAt { xn: f64 },
    /// `|omega_{v'}(., x_n)|^2`.
    TangentialSq { xn: f64 },
}

impl Selector {
    pub fn label(&self) -> String {
        match *self {
            Selector::VnTrace => "vn_trace".into(),
            Selector::VnAt { xn } => format!("vn_at_{xn}"),
            Selector::PhiTrace => "phi_trace".into(),
            Selector::QAt { xn } => format!("q_at_{xn}"),
            Selector::TangentialSq { xn } => format!("tangential_sq_at_{xn}"),
        }
    }

    fn value(&self, e: &SymbolEntry, vg: &VerticalGrid) -> C64 {
        match *self {
            Selector::VnTrace => e.vn_trace(),
            Selector::VnAt { xn } => vg.interpolate(&e.vn, xn),
            Selector::PhiTrace => e.phi_trace(),
            Selector::QAt { xn } => vg.interpolate(&e.q, xn) - 1.0,
            Selector::TangentialSq { xn } => vg.interpolate(&e.long, xn).norm_sqr().into(),
        }
    }

    /// Closed-form `|xi|^2` coefficient.
    pub fn predicted(&self, p: &PhysicalParams) -> f64 {
        let (b, mu, pi2) = (p.depth, p.mu, PI * PI);
        match *self {
            Selector::VnTrace => -4.0 * pi2 * b.powi(3) / (3.0 * mu),
            Selector::VnAt { xn } => -2.0 * (3.0 * b - xn) * xn * xn * pi2 / (3.0 * mu),
            Selector::PhiTrace => -2.0 * p.sigma1 * pi2 * b.powi(3) / (mu * p.kappa),
            Selector::QAt { xn } => -2.0 * b * b * pi2 - 4.0 * b * pi2 * xn + 2.0 * pi2 * xn * xn,
            Selector::TangentialSq { xn } => 4.0 * pi2 * (b - 0.5 * xn).powi(2) * xn * xn / (mu * mu),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientFit {
    pub selector: Selector,
    pub xi_seq: Vec<f64>,
    /// Raw `value / |xi|^2` (real parts).
    pub raw: Vec<f64>,
    pub fitted: f64,
    /// Imaginary part of the extrapolated limit.
    pub fitted_imag: f64,
    pub error_bar: f64,
}

/// Richardson extrapolation of `value(xi)/|xi|^2` along `xi = (x, 0)` for the geometric
/// sequence `xi_seq` (decreasing, constant ratio). Remainders are taken as a power series
/// in `|xi|` starting at first order.
pub fn fit_lf_coefficient(
    sel: Selector,
    p: &PhysicalParams,
    vg: &VerticalGrid,
    xi_seq: &[f64],
    opts: &SolveOptions,
) -> Result<CoefficientFit> {
    if xi_seq.len() < 2 {
        return Err(Error::Config("need at least two frequencies to extrapolate".into()));
    }
    let r = xi_seq[0] / xi_seq[1];
    let geometric = xi_seq.windows(2).all(|w| ((w[0] / w[1]) / r - 1.0).abs() < 1e-9) && r > 1.0;
    if !geometric {
        return Err(Error::Config("frequency sequence must be geometric and decreasing".into()));
    }
    let vals: Vec<C64> = xi_seq
        .iter()
        .map(|&x| solve_symbol([x, 0.0], p, vg, opts).map(|e| sel.value(&e, vg) / (x * x)))
        .collect::<Result<_>>()?;
    let diag = richardson(&vals, r);
    let m = diag.len() - 1;
    let err = (diag[m] - diag[m - 1]).norm();
    if m >= 2 {
        let prev = (diag[m - 1] - diag[m - 2]).norm();
        if err > prev && err > 1e-8 * diag[m].norm() {
            return Err(Error::NonConvergent(diag.iter().map(|z| z.re).collect()));
        }
    }
    Ok(CoefficientFit {
        selector: sel,
        xi_seq: xi_seq.to_vec(),
        raw: vals.iter().map(|z| z.re).collect(),
        fitted: diag[m].re,
        fitted_imag: diag[m].im,
        error_bar: err,
    })
}

/// Diagonal of the Richardson table for step ratio `r` and error orders 1, 2, ...
fn richardson(vals: &[C64], r: f64) -> Vec<C64> {
    let mut row: Vec<C64> = vals.to_vec();
    let mut diag = vec![row[0]];
    for k in 1..vals.len() {
        let f = r.powi(k as i32);
        row = row.windows(2).map(|w| (w[1] * f - w[0]) / (f - 1.0)).collect();
        diag.push(row[0]);
    }
    diag
}

/// One verdict line of a report.
#[derive(Clone, Debug, Serialize)]
pub struct ClaimRow {
    pub claim: String,
    pub predicted: Option<f64>,
    pub fitted: f64,
    /// Positive when the claim holds; the distance to the pass threshold.
    pub margin: f64,
    pub verdict: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AsymptoticReport {
    pub rows: Vec<ClaimRow>,
    pub xi_samples: Vec<f64>,
}

impl AsymptoticReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.verdict)
    }
}

/// Standard low-frequency claims: surface traces, `omega_q` at `b/4, b/2, b`,
/// the tangential square at `b/4, b/2` and the bulk `omega_{v_n}` at `b/2`.
pub fn standard_selectors(p: &PhysicalParams) -> Vec<Selector> {
    let b = p.depth;
    let mut v = vec![Selector::VnTrace, Selector::PhiTrace, Selector::VnAt { xn: 0.5 * b }];
    for f in [0.25, 0.5, 1.0] {
        v.push(Selector::QAt { xn: f * b });
    }
    for f in [0.25, 0.5] {
        v.push(Selector::TangentialSq { xn: f * b });
    }
    v
}

/// Fit every selector and compare against its closed form at relative tolerance `rel_tol`.
pub fn lf_report(p: &PhysicalParams, vg: &VerticalGrid, xi_seq: &[f64], rel_tol: f64, opts: &SolveOptions) -> Result<AsymptoticReport> {
    let sels = standard_selectors(p);
    let fits: Vec<Result<CoefficientFit>> = sels.par_iter().map(|&s| fit_lf_coefficient(s, p, vg, xi_seq, opts)).collect();
    let mut rep = AsymptoticReport { rows: vec![], xi_samples: xi_seq.to_vec() };
    for fit in fits {
        let fit = fit?;
        let pred = fit.selector.predicted(p);
        let rel = (fit.fitted - pred).abs() / pred.abs().max(f64::MIN_POSITIVE);
        rep.rows.push(ClaimRow {
            claim: format!("lf:{}", fit.selector.label()),
            predicted: Some(pred),
            fitted: fit.fitted,
            margin: rel_tol - rel,
            verdict: rel <= rel_tol,
        });
    }
    Ok(rep)
}

/// Infima of `|rho|^2/(xi_1^2 + |xi|^4)` over `0 < |xi| <= 1` and `|rho|^2/(1 + |xi|^2)` over `|xi| > 1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RhoBounds {
    pub low_inf: f64,
    pub high_inf: f64,
    pub low_count: usize,
    pub high_count: usize,
}

pub fn check_rho_bounds(table: &SymbolTable) -> RhoBounds {
    let fg = &table.fg;
    let mut out = RhoBounds { low_inf: f64::INFINITY, high_inf: f64::INFINITY, low_count: 0, high_count: 0 };
    for (i, e) in table.entries.iter().enumerate() {
        if fg.is_nyquist(i) || e.xi == [0.0, 0.0] {
            continue;
        }
        let k2 = e.xi[0] * e.xi[0] + e.xi[1] * e.xi[1];
        let r2 = e.rho.norm_sqr();
        if k2 <= 1.0 {
            out.low_inf = out.low_inf.min(r2 / (e.xi[0] * e.xi[0] + k2 * k2));
            out.low_count += 1;
        } else {
            out.high_inf = out.high_inf.min(r2 / (1.0 + k2));
            out.high_count += 1;
        }
    }
    out
}

pub const DECAY_NAMES: [&str; 5] = ["int_v_sq", "vn_trace", "int_phi_sq", "phi_trace", "int_q_sq"];

/// Suprema over `1 < |xi| <= xi_max` of the five scaled decay ratios, in [`DECAY_NAMES`] order.
pub fn check_highfreq_decay(table: &SymbolTable) -> [f64; 5] {
    let vg = &table.vg;
    let mut sup = [0.0f64; 5];
    for (i, e) in table.entries.iter().enumerate() {
        let k = e.xi[0].hypot(e.xi[1]);
        if table.fg.is_nyquist(i) || k <= 1.0 {
            continue;
        }
        let sq = |v: &[C64]| vg.integrate(&v.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
        let w = (1.0 + k * k).sqrt();
        let ratios = [
            (sq(&e.long) + sq(&e.vn)) * k.powi(3),
            e.vn_trace().norm() * k,
            sq(&e.phi) * k.powi(3),
            e.phi_trace().norm() * w,
            sq(&e.q) * w,
        ];
        for (s, r) in sup.iter_mut().zip(ratios) {
            *s = s.max(r);
        }
    }
    sup
}

fn rel_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// `rho` and decay claims from a table and its refinement (box and modes doubled).
pub fn bounds_report(coarse: &SymbolTable, fine: &SymbolTable, stab_tol: f64) -> AsymptoticReport {
    let mut rep = AsymptoticReport::default();
    let (a, b) = (check_rho_bounds(coarse), check_rho_bounds(fine));
    for (name, x, y) in [("rho_low", a.low_inf, b.low_inf), ("rho_high", a.high_inf, b.high_inf)] {
        let ch = rel_change(x, y);
        rep.rows.push(ClaimRow {
            claim: format!("bound:{name}"),
            predicted: None,
            fitted: y,
            margin: stab_tol - ch,
            verdict: y > 0.0 && x > 0.0 && y.is_finite() && ch <= stab_tol,
        });
    }
    let (da, db) = (check_highfreq_decay(coarse), check_highfreq_decay(fine));
    for k in 0..5 {
        let ch = rel_change(da[k], db[k]);
        rep.rows.push(ClaimRow {
            claim: format!("decay:{}", DECAY_NAMES[k]),
            predicted: None,
            fitted: db[k],
            margin: stab_tol - ch,
            verdict: db[k].is_finite() && db[k] > 0.0 && ch <= stab_tol,
        });
    }
    rep
}

/// Build the table on `fg` and on the grid with doubled box and mode count.
pub fn refined_tables(p: &PhysicalParams, fg: &FrequencyGrid, vg: &VerticalGrid, opts: &SolveOptions) -> Result<(SymbolTable, SymbolTable)> {
    let fine = FrequencyGrid::new(fg.dim_h, 2.0 * fg.box_len, 2 * fg.modes)?;
    Ok((SymbolTable::build(p, fg, vg, opts)?, SymbolTable::build(p, &fine, vg, opts)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_removes_linear_and_quadratic_terms() {
        let f = |h: f64| C64::new(3.0 + 2.0 * h - 5.0 * h * h + h.powi(3), 0.0);
        let d = richardson(&[f(0.4), f(0.2), f(0.1)], 2.0);
        assert!((d[2].re - 3.0).abs() < 0.4f64.powi(3));
        assert!((d[2].re - 3.0).abs() < (d[1].re - 3.0).abs());
    }

    #[test]
    fn vn_trace_coefficient_default_params() {
        let p = PhysicalParams::default();
        let vg = VerticalGrid::new(p.depth, 24).unwrap();
        let fit = fit_lf_coefficient(Selector::VnTrace, &p, &vg, &[1e-2, 5e-3, 2.5e-3], &SolveOptions::default()).unwrap();
        let pred = -4.0 * PI * PI / 3.0;
        assert!((pred + 13.159).abs() < 1e-3);
        assert!((fit.fitted - pred).abs() < 0.01 * pred.abs(), "{} vs {pred}", fit.fitted);
    }

    #[test]
    fn surface_and_bulk_vn_coefficients_agree_at_the_top() {
        let p = PhysicalParams::default();
        assert!((Selector::VnAt { xn: p.depth }.predicted(&p) - Selector::VnTrace.predicted(&p)).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_geometric_sequences() {
        let p = PhysicalParams::default();
        let vg = VerticalGrid::new(1.0, 16).unwrap();
        assert!(fit_lf_coefficient(Selector::PhiTrace, &p, &vg, &[1e-2, 4e-3, 2.5e-3], &SolveOptions::default()).is_err());
    }

    #[test]
    fn rho_bounds_positive_and_symmetric() {
        let p = PhysicalParams::default();
        let fg = FrequencyGrid::new(1, 2.0 * PI * 4.0, 64).unwrap();
        let vg = VerticalGrid::new(1.0, 24).unwrap();
        let t = SymbolTable::build(&p, &fg, &vg, &SolveOptions::default()).unwrap();
        let b = check_rho_bounds(&t);
        assert!(b.low_inf > 0.0 && b.high_inf > 0.0);
        assert!(b.low_count > 0 && b.high_count > 0);
        for i in (0..fg.len()).filter(|&i| !fg.is_nyquist(i)) {
            let j = fg.neg(i);
            assert_eq!(t.get(j).rho, t.get(i).rho.conj());
        }
        // gamma only enters through xi_1: at xi_1 = 0 the sign is irrelevant
        let q = PhysicalParams { dim: 3, ..p };
        let a = solve_symbol([0.0, 0.4], &q, &vg, &SolveOptions::default()).unwrap();
        let c = solve_symbol([0.0, 0.4], &PhysicalParams { gamma: -1.0, ..q }, &vg, &SolveOptions::default()).unwrap();
        assert!((a.rho.norm() - c.rho.norm()).abs() < 1e-12 * a.rho.norm());
    }

    #[test]
    fn decay_ratios_bounded_at_half_resolution() {
        let p = PhysicalParams::default();
        let vg = VerticalGrid::new(1.0, 32).unwrap();
        let fg = FrequencyGrid::new(1, 2.0 * PI * 2.0, 64).unwrap();
        let (c, f) = refined_tables(&p, &fg, &vg, &SolveOptions::default()).unwrap();
        let rep = bounds_report(&c, &f, 0.1);
        for r in &rep.rows {
            assert!(r.fitted.is_finite() && r.fitted > 0.0, "{r:?}");
        }
    }
}
