//! Push a solved wave forward to the physical domain and print a CSV slice.

use std::f64::consts::PI;

use thermowave::linear::LinearSolver;
use thermowave::model::{ConstitutiveSet, PhysicalParams};
use thermowave::nonlinear::{
    picard_solve, pushforward_eulerian, sample_grid, write_samples_csv, ForcingData, ForcingPreset, PicardOptions,
};
use thermowave::ode::SolveOptions;
use thermowave::spectral::{FrequencyGrid, Pseudo, VerticalGrid};

fn main() -> thermowave::Result<()> {
    let p = PhysicalParams::default();
    let fg = FrequencyGrid::new(1, 2.0 * PI * 4.0, 64)?;
    let vg = VerticalGrid::new(p.depth, 20)?;
    let solver = LinearSolver::new(&p, &fg, &vg, &SolveOptions::default())?;
    let ps = Pseudo::new(&fg, &vg);
    let forcing = ForcingData::preset(ForcingPreset::Mixed, 2, fg.box_len, vg.depth, 4, 5e-4);
    let trace = picard_solve(&forcing, &solver, &ConstitutiveSet::newtonian(&p), &ps, &PicardOptions::default())?;
    trace.check()?;
    let pts = sample_grid(&trace.state, &fg, &vg, 8, 3);
    let samples = pushforward_eulerian(&trace.state, &fg, &vg, &pts)?;
    write_samples_csv(std::io::stdout().lock(), &samples)?;
    Ok(())
}
