//! Sampling of a flattened state on the physical domain `0 < y_n < b + eta(y')`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::flatten_inverse;
use crate::linear::LinearState;
use crate::spectral::{evaluate_at, evaluate_surface_at, FrequencyGrid, VerticalGrid};

/// Velocity `w`, temperature and pressure at one physical point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EulerianSample {
    pub x: [f64; 2],
    pub y: f64,
    pub eta: f64,
    pub w: Vec<f64>,
    pub theta: f64,
    pub q: f64,
}

/// Points `(x', y_n)` of the physical domain are pulled back through `y_n b / (b + eta(x'))`.
pub fn pushforward_eulerian(
    state: &LinearState,
    fg: &FrequencyGrid,
    vg: &VerticalGrid,
    points: &[([f64; 2], f64)],
) -> Result<Vec<EulerianSample>> {
    let b = vg.depth;
    let n = state.dim();
    points
        .iter()
        .map(|&(x, y)| {
            let eta = evaluate_surface_at(&state.eta, 0, fg, x);
            let surface = b + eta;
            // small slack for points placed exactly on the surface
            if y < 0.0 || y > surface * (1.0 + 1e-12) {
                return Err(Error::PointOutsideDomain { x, y, surface });
            }
            let xn = flatten_inverse(y, eta, b).min(b);
            Ok(EulerianSample {
                x,
                y,
                eta,
                w: (0..n).map(|i| evaluate_at(&state.u, i, fg, vg, x, xn)).collect(),
                theta: evaluate_at(&state.psi, 0, fg, vg, x, xn),
                q: evaluate_at(&state.p, 0, fg, vg, x, xn),
            })
        })
        .collect()
}

/// `nx` equispaced columns along `x_1` (at `x_2 = 0`), each with `ny` heights from the
/// bottom to the free surface.
pub fn sample_grid(state: &LinearState, fg: &FrequencyGrid, vg: &VerticalGrid, nx: usize, ny: usize) -> Vec<([f64; 2], f64)> {
    let mut out = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        let x = [fg.box_len * i as f64 / nx as f64, 0.0];
        let top = vg.depth + evaluate_surface_at(&state.eta, 0, fg, x);
        for j in 0..ny {
            out.push((x, top * j as f64 / (ny.max(2) - 1) as f64));
        }
    }
    out
}

/// CSV with columns `x1,x2,y,eta,w1,w2,w3,theta,q`; `w3` is zero in two dimensions.
pub fn write_samples_csv<W: Write>(w: W, samples: &[EulerianSample]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x1", "x2", "y", "eta", "w1", "w2", "w3", "theta", "q"])?;
    for s in samples {
        let wv = |i: usize| s.w.get(i).copied().unwrap_or(0.0);
        let row = [s.x[0], s.x[1], s.y, s.eta, wv(0), wv(1), wv(2), s.theta, s.q];
        wr.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{cosine_mode, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_surface_is_identity_resampling() {
        let fg = FrequencyGrid::new(1, 10.0, 16).unwrap();
        let vg = VerticalGrid::new(1.0, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = random_state(&mut rng, 2, &fg, &vg);
        s.eta = s.eta.scaled(0.0);
        let pts = [([1.3, 0.0], 0.4), ([7.1, 0.0], 0.9)];
        for (smp, &(x, y)) in pushforward_eulerian(&s, &fg, &vg, &pts).unwrap().iter().zip(&pts) {
            assert!((smp.theta - evaluate_at(&s.psi, 0, &fg, &vg, x, y)).abs() < 1e-14);
        }
    }

    #[test]
    fn stretches_vertically_and_rejects_points_above_surface() {
        let fg = FrequencyGrid::new(1, 10.0, 16).unwrap();
        let vg = VerticalGrid::new(1.0, 12).unwrap();
        let mut s = LinearState::zeros(2, &fg, &vg);
        // psi = x_n, independent of x'
        let zero = fg.index_of([0, 0]);
        for (v, &z) in s.psi.profile_mut(0, zero).iter_mut().zip(&vg.nodes) {
            *v = z.into();
        }
        s.eta = cosine_mode(&fg, [1, 0], 0.2);
        let smp = pushforward_eulerian(&s, &fg, &vg, &[([0.0, 0.0], 0.6)]).unwrap();
        assert!((smp[0].theta - 0.5).abs() < 1e-12, "{}", smp[0].theta);
        assert!(matches!(
            pushforward_eulerian(&s, &fg, &vg, &[([0.0, 0.0], 1.25)]),
            Err(Error::PointOutsideDomain { .. })
        ));
        let grid = sample_grid(&s, &fg, &vg, 4, 3);
        assert!(pushforward_eulerian(&s, &fg, &vg, &grid).is_ok());
    }
}
