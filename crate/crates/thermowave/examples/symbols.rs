//! Symbol table on a small lattice: surface traces and rho per frequency.

use std::f64::consts::PI;

use thermowave::model::PhysicalParams;
use thermowave::ode::{SolveOptions, SymbolTable};
use thermowave::spectral::{FrequencyGrid, VerticalGrid};

fn main() -> thermowave::Result<()> {
    let p = PhysicalParams::default();
    let fg = FrequencyGrid::new(1, 2.0 * PI * 4.0, 32)?;
    let vg = VerticalGrid::new(p.depth, 24)?;
    let table = SymbolTable::build(&p, &fg, &vg, &SolveOptions::default())?;
    println!("{:>8} {:>24} {:>24} {:>12}", "xi1", "omega_vn(b)", "rho", "backend");
    for i in fg.canonical_indices().into_iter().take(10) {
        let e = table.get(i);
        println!("{:>8.4} {:>24.6} {:>24.6} {:>12}", e.xi[0], e.vn_trace(), e.rho, e.backend);
    }
    table.write_csv(std::io::sink())?;
    Ok(())
}
