//! Trace-pairing norm estimate and the parameter gate it feeds.

use thermowave::model::{check_parameter_gate, estimate_q_norms, geometric_samples, PhysicalParams};
use thermowave::spectral::VerticalGrid;

fn main() -> thermowave::Result<()> {
    let vg = VerticalGrid::new(1.0, 32)?;
    let est = estimate_q_norms(&vg, &geometric_samples(0.1, 10.0, 21))?;
    for (xi, v) in est.samples.iter().step_by(5) {
        println!("|xi| = {xi:>7.3}  fiber norm {v:.5}");
    }
    println!("q1 = q2 = {:.5} ({})", est.q1, est.method);
    for sigma1 in [0.1, 1.0, 3.0] {
        let p = PhysicalParams { sigma1, ..Default::default() };
        let g = check_parameter_gate(&p, &est);
        println!("sigma1 = {sigma1}: {} (margin {:.4})", if g.pass { "admissible" } else { "rejected" }, g.margin);
    }
    Ok(())
}
