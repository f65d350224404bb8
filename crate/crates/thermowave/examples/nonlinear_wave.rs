//! A traveling heat source drives a surface wave: Picard solve and its residual history.

use std::f64::consts::PI;

use thermowave::linear::LinearSolver;
use thermowave::model::{ConstitutiveSet, PhysicalParams};
use thermowave::nonlinear::{default_delta, solve_traveling_wave, ForcingData, ForcingPreset, PicardOptions};
use thermowave::ode::SolveOptions;
use thermowave::spectral::{FrequencyGrid, Pseudo, VerticalGrid};

fn main() -> thermowave::Result<()> {
    let p = PhysicalParams::default();
    let fg = FrequencyGrid::new(1, 2.0 * PI * 10.0, 128)?;
    let vg = VerticalGrid::new(p.depth, 24)?;
    let solver = LinearSolver::new(&p, &fg, &vg, &SolveOptions::default())?;
    let ps = Pseudo::new(&fg, &vg);
    let forcing = ForcingData::preset(ForcingPreset::HeatOnly, 2, fg.box_len, vg.depth, 10, 1e-3);
    let c = ConstitutiveSet::newtonian(&p);
    let trace = solve_traveling_wave(&forcing, &solver, &c, &ps, &PicardOptions::default(), default_delta(&solver))?;
    trace.check()?;
    for (i, r) in trace.residuals.iter().enumerate() {
        println!("iteration {i}: residual {r:.3e}");
    }
    println!("max |eta| = {:.3e}, |eta|_X = {:.3e}", trace.max_eta, trace.eta_x_norm);
    Ok(())
}
