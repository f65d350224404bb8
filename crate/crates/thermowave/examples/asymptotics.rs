//! Low-frequency coefficient fits against the closed forms, plus rho and decay bounds.

use std::f64::consts::PI;

use thermowave::asymptotics::{bounds_report, lf_report, refined_tables};
use thermowave::model::PhysicalParams;
use thermowave::ode::SolveOptions;
use thermowave::spectral::{FrequencyGrid, VerticalGrid};

fn main() -> thermowave::Result<()> {
    let p = PhysicalParams::from_tuple((2.0, 0.5, 0.7, -1.0, 9.8, 0.5, -0.2), 2);
    let vg = VerticalGrid::new(p.depth, 24)?;
    let opts = SolveOptions::default();
    let lf = lf_report(&p, &vg, &[1e-2, 5e-3, 2.5e-3], 0.01, &opts)?;
    for r in &lf.rows {
        println!("{:<28} predicted {:>12.6} fitted {:>12.6}", r.claim, r.predicted.unwrap_or(f64::NAN), r.fitted);
    }
    let fg = FrequencyGrid::new(1, 2.0 * PI * 10.0, 256)?;
    let (coarse, fine) = refined_tables(&p, &fg, &vg, &opts)?;
    for r in bounds_report(&coarse, &fine, 0.1).rows {
        println!("{:<28} {:>12.4e} {}", r.claim, r.fitted, if r.verdict { "ok" } else { "FAIL" });
    }
    Ok(())
}
