//! Invert the linearized operator on random data and map the result back.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thermowave::linear::{apply_upsilon, random_data, random_state, LinearSolver};
use thermowave::model::PhysicalParams;
use thermowave::ode::SolveOptions;
use thermowave::spectral::{FrequencyGrid, VerticalGrid};

fn main() -> thermowave::Result<()> {
    let p = PhysicalParams::default();
    let fg = FrequencyGrid::new(1, 2.0 * PI * 10.0, 128)?;
    let vg = VerticalGrid::new(p.depth, 24)?;
    let solver = LinearSolver::new(&p, &fg, &vg, &SolveOptions::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let d = random_data(&mut rng, 2, &fg, &vg);
    let (x, rep) = solver.invert_with_report(&d)?;
    let back = apply_upsilon(&x, &p, &fg, &vg);
    println!("data side, one pass:   {:.3e}", back.diff(&d).norm(&fg, &vg, 2.0) / d.norm(&fg, &vg, 2.0));
    let x = solver.invert_refined(&d, 1)?;
    let back = apply_upsilon(&x, &p, &fg, &vg);
    println!("data side, refined:    {:.3e}", back.diff(&d).norm(&fg, &vg, 2.0) / d.norm(&fg, &vg, 2.0));
    println!("max cond {:.2e}, collocation frequencies {}", rep.max_cond, rep.collocation_frequencies);

    let s = random_state(&mut rng, 2, &fg, &vg);
    let again = solver.invert_refined(&apply_upsilon(&s, &p, &fg, &vg), 1)?;
    println!("state side, refined:   {:.3e}", again.diff(&s).norm(&fg, &vg, 2.0) / s.norm(&fg, &vg, 2.0));
    Ok(())
}
