//! Frozen-Jacobian iteration `X <- X - Upsilon^{-1} R(X)` from `X = 0`.

use serde::Serialize;

use super::forcing::ForcingData;
use super::residual::nonlinear_residual;
use crate::error::{Error, Result};
use crate::linear::{LinearSolver, LinearState};
use crate::model::ConstitutiveSet;
use crate::spectral::{norms, Pseudo};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardOptions {
    pub tol: f64,
    pub maxiter: usize,
    /// Sobolev index of the data-space norm.
    pub s: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { tol: 1e-9, maxiter: 50, s: 2.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    Diverged,
    NotConverged,
    SurfaceTooLarge,
}

/// Residual history and final state of one solve. Residuals are kept on failure too.
#[derive(Clone, Debug, Serialize)]
pub struct SolveTrace {
    pub status: SolveStatus,
    pub iterations: usize,
    pub amplitude: f64,
    pub residuals: Vec<f64>,
    pub factors: Vec<f64>,
    pub max_eta: f64,
    pub eta_limit: f64,
    pub eta_x_norm: f64,
    pub alias_tail: f64,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub state: LinearState,
}

impl SolveTrace {
    /// Largest contraction factor after the first step.
    pub fn worst_factor(&self) -> f64 {
        self.factors.iter().skip(1).copied().fold(0.0, f64::max)
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::NAN)
    }

    pub fn check(&self) -> Result<()> {
        match self.status {
            SolveStatus::Converged => Ok(()),
            SolveStatus::Diverged => Err(Error::Diverged {
                iteration: self.iterations,
                factor: self.factors.last().copied().unwrap_or(f64::NAN),
            }),
            SolveStatus::NotConverged => {
                Err(Error::NotConverged { iterations: self.iterations, residual: self.final_residual() })
            }
            SolveStatus::SurfaceTooLarge => Err(Error::SurfaceTooLarge { max_eta: self.max_eta, limit: self.eta_limit }),
        }
    }
}

pub fn picard_solve(
    forcing: &ForcingData,
    solver: &LinearSolver,
    c: &ConstitutiveSet,
    ps: &Pseudo,
    opts: &PicardOptions,
) -> Result<SolveTrace> {
    let p = &solver.params;
    let (fg, vg) = (&solver.fg, &solver.vg);
    let mut trace = SolveTrace {
        status: SolveStatus::NotConverged,
        iterations: 0,
        amplitude: forcing.amplitude,
        residuals: vec![],
        factors: vec![],
        max_eta: 0.0,
        eta_limit: 0.5 * vg.depth,
        eta_x_norm: 0.0,
        alias_tail: 0.0,
        warnings: vec![],
        state: LinearState::zeros(solver.dim(), fg, vg),
    };
    let mut rising = 0;
    loop {
        let (r, diag) = match nonlinear_residual(&trace.state, forcing, p, c, ps) {
            Ok(v) => v,
            Err(Error::SurfaceTooLarge { max_eta, .. }) => {
                trace.status = SolveStatus::SurfaceTooLarge;
                trace.max_eta = max_eta;
                return Ok(trace);
            }
            Err(e) => return Err(e),
        };
        trace.max_eta = diag.max_eta;
        trace.alias_tail = trace.alias_tail.max(diag.alias_tail);
        for w in diag.warnings {
            if !trace.warnings.contains(&w) {
                trace.warnings.push(w);
            }
        }
        let rn = r.norm(fg, vg, opts.s);
        if let Some(&prev) = trace.residuals.last() {
            let f = rn / prev;
            trace.factors.push(f);
            rising = if f >= 1.0 { rising + 1 } else { 0 };
        }
        trace.residuals.push(rn);
        if rn < opts.tol {
            trace.status = SolveStatus::Converged;
            break;
        }
        if rising >= 3 || !rn.is_finite() {
            trace.status = SolveStatus::Diverged;
            break;
        }
        if trace.iterations >= opts.maxiter {
            break;
        }
        let dx = solver.invert(&r)?;
        trace.state.axpy(-1.0, &dx);
        trace.iterations += 1;
    }
    trace.eta_x_norm = norms::x_norm(&trace.state.eta, fg, opts.s + 2.5);
    Ok(trace)
}

/// Default admissible amplitude `1e-3 min(1, b, mu, kappa)`.
pub fn default_delta(solver: &LinearSolver) -> f64 {
    let p = &solver.params;
    1e-3 * 1f64.min(p.depth).min(p.mu).min(p.kappa)
}

/// Amplitude gate plus one retry at half amplitude when the first attempt diverges.
///
/// The returned trace records the amplitude that was actually solved.
pub fn solve_traveling_wave(
    forcing: &ForcingData,
    solver: &LinearSolver,
    c: &ConstitutiveSet,
    ps: &Pseudo,
    opts: &PicardOptions,
    delta: f64,
) -> Result<SolveTrace> {
    if forcing.amplitude.abs() > delta {
        return Err(Error::Config(format!(
            "forcing amplitude {:e} exceeds the admissible bound {delta:e}",
            forcing.amplitude
        )));
    }
    let first = picard_solve(forcing, solver, c, ps, opts)?;
    if first.status != SolveStatus::Diverged {
        return Ok(first);
    }
    let mut second = picard_solve(&forcing.with_amplitude(0.5 * forcing.amplitude), solver, c, ps, opts)?;
    second.warnings.push(format!(
        "diverged at amplitude {:e}; retried at half amplitude",
        forcing.amplitude
    ));
    Ok(second)
}
