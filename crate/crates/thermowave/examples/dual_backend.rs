//! The same forced boundary-value problem through the Duhamel and collocation backends.

use num_complex::Complex64 as C64;
use thermowave::model::PhysicalParams;
use thermowave::ode::{solve_forced_bvp, Backend, BvpSpec, Coupling, SolveOptions, V6};
use thermowave::spectral::VerticalGrid;

fn main() -> thermowave::Result<()> {
    let p = PhysicalParams::default();
    let vg = VerticalGrid::new(p.depth, 40)?;
    let opts = SolveOptions::default();
    for w in [0.5, 3.0, 10.0] {
        let xi = [w / (2.0 * std::f64::consts::PI * p.depth), 0.0];
        let z = vg.nodes.iter().map(|&x| V6::from_fn(|i, _| C64::new((x * (i + 1) as f64).cos(), x))).collect();
        let d = V6::from_fn(|i, _| C64::new(0.0, i as f64));
        let spec = BvpSpec { xi, coupling: Coupling::forward(&p), z, d };
        let m = solve_forced_bvp(&spec, &p, &vg, Backend::Matexp, &opts)?;
        let c = solve_forced_bvp(&spec, &p, &vg, Backend::Collocation, &opts)?;
        let scale = c.y.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let diff = m.y.iter().zip(&c.y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!("2 pi |xi| b = {w:>4}: relative difference {:.2e}, cond(B) {:.2e}", diff / scale, m.cond);
    }
    Ok(())
}
