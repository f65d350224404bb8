//! Matrix exponential of the per-frequency system matrix.
//!
//! At `xi = 0` the matrix squares to zero, so `exp(bA) = I + bA` exactly.

use nalgebra::Matrix6;
use num_complex::Complex64 as C64;
use thermowave::model::PhysicalParams;
use thermowave::ode::{assemble_bulk_matrix, matrix_exponential};

fn main() {
    let p = PhysicalParams::default();
    let a = assemble_bulk_matrix([0.0, 0.0], &p, p.gamma);
    let e = matrix_exponential(&a, p.depth);
    let lin = Matrix6::<C64>::identity() + a * C64::new(p.depth, 0.0);
    println!("|A^2| = {:.1e}, |exp(bA) - I - bA| = {:.1e}", (a * a).norm(), (e - lin).norm());

    // away from zero, against a long Taylor sum
    let a = assemble_bulk_matrix([0.3, 0.0], &p, p.gamma);
    let mut term = Matrix6::<C64>::identity();
    let mut taylor = term;
    for k in 1..80 {
        term = term * a / C64::new(k as f64, 0.0);
        taylor += term;
    }
    let e = matrix_exponential(&a, 1.0);
    println!("|exp(A) - Taylor| / |exp(A)| = {:.1e}", (e - taylor).norm() / e.norm());
}
