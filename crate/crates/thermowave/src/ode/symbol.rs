//! Fourier symbols of the adjoint normal-stress problem and the surface multiplier `rho`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::bvp::{Backend, CollocationSolver, MatexpPropagator, SolveOptions, V6};
use super::system::Coupling;
use crate::error::{Error, Result};
use crate::model::PhysicalParams;
use crate::spectral::{FrequencyGrid, VerticalGrid};

/// Symbols at one frequency. `long` is the longitudinal amplitude `phi`, so that the
/// tangential velocity symbol is `-i phi xi/|xi|`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolEntry {
    pub xi: [f64; 2],
    pub e_long: [f64; 2],
    pub long: Vec<C64>,
    pub vn: Vec<C64>,
    pub phi: Vec<C64>,
    pub q: Vec<C64>,
    pub rho: C64,
    pub backend: Backend,
    pub cond: f64,
}

impl SymbolEntry {
    pub fn zero_frequency(nz: usize) -> Self {
        Self {
            xi: [0.0, 0.0],
            e_long: [0.0, 0.0],
            long: vec![C64::default(); nz],
            vn: vec![C64::default(); nz],
            phi: vec![C64::default(); nz],
            q: vec![C64::new(1.0, 0.0); nz],
            rho: C64::default(),
            backend: Backend::Matexp,
            cond: 1.0,
        }
    }

    pub fn vn_trace(&self) -> C64 {
        *self.vn.last().unwrap()
    }

    pub fn phi_trace(&self) -> C64 {
        *self.phi.last().unwrap()
    }

    pub fn q_trace(&self) -> C64 {
        *self.q.last().unwrap()
    }

    /// Horizontal velocity symbol at node `j`.
    pub fn tangential(&self, j: usize) -> [C64; 2] {
        let v = C64::new(0.0, -1.0) * self.long[j];
        [v * self.e_long[0], v * self.e_long[1]]
    }

    pub fn conj_mirror(&self) -> Self {
        let cj = |v: &Vec<C64>| v.iter().map(|z| z.conj()).collect::<Vec<_>>();
        Self {
            xi: [-self.xi[0], -self.xi[1]],
            e_long: [-self.e_long[0], -self.e_long[1]],
            // phi = i u'.e_L is invariant under (xi, u) -> (-xi, conj u) up to conjugation
            long: cj(&self.long),
            vn: cj(&self.vn),
            phi: cj(&self.phi),
            q: cj(&self.q),
            rho: self.rho.conj(),
            backend: self.backend,
            cond: self.cond,
        }
    }

    fn from_profile(xi: [f64; 2], p: &PhysicalParams, y: &[V6], backend: Backend, cond: f64) -> Self {
        let k = xi[0].hypot(xi[1]);
        let comp = |c: usize| y.iter().map(|v| v[c]).collect::<Vec<_>>();
        let vn = comp(1);
        let trace = *vn.last().unwrap();
        let rho = C64::new(p.sigma0 * 4.0 * PI * PI * k * k + p.grav, 0.0) * trace.conj()
            + C64::new(0.0, p.gamma * 2.0 * PI * xi[0]);
        Self {
            xi,
            e_long: [xi[0] / k, xi[1] / k],
            long: comp(0),
            vn,
            phi: comp(2),
            q: comp(3),
            rho,
            backend,
            cond,
        }
    }
}

fn unit_normal_stress() -> V6 {
    let mut d = V6::zeros();
    d[4] = C64::new(1.0, 0.0);
    d
}

/// Symbols with a fixed backend (no fallback).
pub fn solve_symbol_with(xi: [f64; 2], p: &PhysicalParams, vg: &VerticalGrid, backend: Backend, opts: &SolveOptions) -> Result<SymbolEntry> {
    if xi == [0.0, 0.0] {
        return Ok(SymbolEntry::zero_frequency(vg.nz()));
    }
    let c = Coupling::adjoint(p);
    let d = unit_normal_stress();
    let (y, cond) = match backend {
        Backend::Matexp => {
            let m = MatexpPropagator::homogeneous(xi, p, &c, vg, opts)?;
            (m.solve_homogeneous(&d), m.cond())
        }
        Backend::Collocation => {
            let s = CollocationSolver::new(xi, p, &c, vg, opts)?;
            (s.solve(&vec![V6::zeros(); vg.nz()], &d), s.cond)
        }
    };
    Ok(SymbolEntry::from_profile(xi, p, &y, backend, cond))
}

/// Symbols with the backend chosen by frequency, retrying with collocation when `B`
/// is numerically singular.
pub fn solve_symbol(xi: [f64; 2], p: &PhysicalParams, vg: &VerticalGrid, opts: &SolveOptions) -> Result<SymbolEntry> {
    match opts.preferred_backend(xi, p.depth) {
        Backend::Matexp => match solve_symbol_with(xi, p, vg, Backend::Matexp, opts) {
            Err(Error::NumericallySingular { .. }) => solve_symbol_with(xi, p, vg, Backend::Collocation, opts),
            r => r,
        },
        Backend::Collocation => solve_symbol_with(xi, p, vg, Backend::Collocation, opts),
    }
}

/// Symbols over a whole lattice. The canonical half is solved in parallel and the
/// rest filled by conjugation, so `rho(-xi) = conj(rho(xi))` holds exactly.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    pub fg: FrequencyGrid,
    pub vg: VerticalGrid,
    pub params: PhysicalParams,
    pub entries: Vec<SymbolEntry>,
}

impl SymbolTable {
    pub fn build(p: &PhysicalParams, fg: &FrequencyGrid, vg: &VerticalGrid, opts: &SolveOptions) -> Result<Self> {
        let direct: Vec<usize> = (0..fg.len()).filter(|&i| fg.is_canonical(i) || fg.is_nyquist(i)).collect();
        let solved: Vec<Result<SymbolEntry>> = direct.par_iter().map(|&i| solve_symbol(fg.xi(i), p, vg, opts)).collect();
        let mut slots: Vec<Option<SymbolEntry>> = vec![None; fg.len()];
        for (&i, r) in direct.iter().zip(solved) {
            slots[i] = Some(r?);
        }
        for i in 0..fg.len() {
            if slots[i].is_none() {
                let mirror = slots[fg.neg(i)].as_ref().expect("canonical partner solved").conj_mirror();
                slots[i] = Some(mirror);
            }
        }
        Ok(Self { fg: fg.clone(), vg: vg.clone(), params: *p, entries: slots.into_iter().map(Option::unwrap).collect() })
    }

    pub fn get(&self, idx: usize) -> &SymbolEntry {
        &self.entries[idx]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// CSV: `xi_index,xi1,xi2,vn_re,vn_im,phi_re,phi_im,q_re,q_im,rho_re,rho_im,backend,cond`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "xi_index", "xi1", "xi2", "vn_re", "vn_im", "phi_re", "phi_im", "q_re", "q_im", "rho_re", "rho_im", "backend", "cond",
        ])?;
        for (i, e) in self.entries.iter().enumerate() {
            let (vn, ph, q) = (e.vn_trace(), e.phi_trace(), e.q_trace());
            let mut rec = vec![i.to_string(), format!("{:e}", e.xi[0]), format!("{:e}", e.xi[1])];
            for z in [vn, ph, q, e.rho] {
                rec.push(format!("{:e}", z.re));
                rec.push(format!("{:e}", z.im));
            }
            rec.push(e.backend.to_string());
            rec.push(format!("{:e}", e.cond));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_frequency_closed_form() {
        let p = PhysicalParams::default();
        let vg = VerticalGrid::new(1.0, 16).unwrap();
        let e = solve_symbol([0.0, 0.0], &p, &vg, &SolveOptions::default()).unwrap();
        assert!(e.q.iter().all(|&v| v == C64::new(1.0, 0.0)));
        assert_eq!(e.rho, C64::default());
    }

    #[test]
    fn bottom_conditions_and_incompressibility() {
        let p = PhysicalParams::default();
        let vg = VerticalGrid::new(1.0, 32).unwrap();
        for xi in [[0.05, 0.0], [0.7, 0.0], [3.0, 0.0]] {
            let e = solve_symbol(xi, &p, &vg, &SolveOptions::default()).unwrap();
            assert!(e.long[0].norm() < 1e-10 && e.vn[0].norm() < 1e-10 && e.phi[0].norm() < 1e-10);
            let mut dvn = vec![C64::default(); 32];
            vg.differentiate(&e.vn, &mut dvn);
            let scale = e.long.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
            for j in 0..32 {
                let r = e.long[j] * (2.0 * PI * xi[0]) + dvn[j];
                assert!(r.norm() < 1e-8 * (1.0 + scale * 2.0 * PI * xi[0]), "{xi:?} {j} {}", r.norm());
            }
            assert!(e.vn_trace().re < 0.0);
        }
    }

    #[test]
    fn backends_agree() {
        let p = PhysicalParams { mu: 2.0, kappa: 0.5, depth: 0.7, gamma: -1.0, grav: 9.8, sigma0: 0.5, sigma1: -0.2, dim: 2 };
        let vg = VerticalGrid::new(p.depth, 40).unwrap();
        let o = SolveOptions::default();
        for k in [0.01, 0.3, 1.0, 2.2] {
            let a = solve_symbol_with([k, 0.0], &p, &vg, Backend::Matexp, &o).unwrap();
            let b = solve_symbol_with([k, 0.0], &p, &vg, Backend::Collocation, &o).unwrap();
            let rel = |x: C64, y: C64| (x - y).norm() / x.norm().max(1e-300);
            assert!(rel(a.vn_trace(), b.vn_trace()) < 1e-8, "{k}");
            assert!(rel(a.phi_trace(), b.phi_trace()) < 1e-8, "{k}");
            assert!(rel(a.rho, b.rho) < 1e-8, "{k}");
        }
    }

    #[test]
    fn table_is_conjugate_symmetric() {
        let p = PhysicalParams { dim: 3, ..Default::default() };
        let fg = FrequencyGrid::new(2, 4.0, 8).unwrap();
        let vg = VerticalGrid::new(1.0, 16).unwrap();
        let t = SymbolTable::build(&p, &fg, &vg, &SolveOptions::default()).unwrap();
        for i in 0..fg.len() {
            if fg.is_nyquist(i) {
                continue;
            }
            let j = fg.neg(i);
            assert_eq!(t.get(j).rho, t.get(i).rho.conj());
            let (a, b) = (t.get(i).tangential(5), t.get(j).tangential(5));
            assert!((a[0] - b[0].conj()).norm() < 1e-14 && (a[1] - b[1].conj()).norm() < 1e-14);
        }
    }
}
