//! Scaling-and-squaring matrix exponential with diagonal Padé approximants
//! (Higham 2005 degree selection).

use nalgebra::SMatrix;
use num_complex::Complex64 as C64;

pub type M6 = SMatrix<C64, 6, 6>;

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_230e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
];
const THETA13: f64 = 5.371_920_351_148_152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

pub fn norm1(a: &M6) -> f64 {
    (0..6).map(|j| (0..6).map(|i| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(t M)`.
pub fn matrix_exponential(m: &M6, t: f64) -> M6 {
    if t == 0.0 {
        return M6::identity();
    }
    let a = m * C64::new(t, 0.0);
    let nrm = norm1(&a);
    if nrm == 0.0 {
        return M6::identity();
    }
    let id = M6::identity();
    for &(deg, theta) in &THETA {
        if nrm <= theta {
            let coeffs: &[f64] = match deg {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(&a, coeffs, &id);
        }
    }
    let s = ((nrm / THETA13).log2().ceil()).max(0.0) as i32;
    let a = a * C64::new(2f64.powi(-s), 0.0);
    let mut r = pade13(&a, &id);
    for _ in 0..s {
        r = r * r;
    }
    r
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn solve_pade(u: M6, v: M6) -> M6 {
    let p = v + u;
    let q = v - u;
    q.lu().solve(&p).expect("Padé denominator is nonsingular for scaled arguments")
}

fn pade_low(a: &M6, b: &[f64], id: &M6) -> M6 {
    let a2 = a * a;
    let mut even = *id * c(b[0]);
    let mut odd = *id * c(b[1]);
    let mut pw = *id;
    let mut k = 2;
    while k < b.len() {
        pw *= a2;
        even += pw * c(b[k]);
        odd += pw * c(b[k + 1]);
        k += 2;
    }
    solve_pade(a * odd, even)
}

fn pade13(a: &M6, id: &M6) -> M6 {
    let b = &B13;
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let u_inner = a6 * (a6 * c(b[13]) + a4 * c(b[11]) + a2 * c(b[9]))
        + a6 * c(b[7])
        + a4 * c(b[5])
        + a2 * c(b[3])
        + id * c(b[1]);
    let u = a * u_inner;
    let v = a6 * (a6 * c(b[12]) + a4 * c(b[10]) + a2 * c(b[8]))
        + a6 * c(b[6])
        + a4 * c(b[4])
        + a2 * c(b[2])
        + id * c(b[0]);
    solve_pade(u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn taylor(m: &M6, terms: usize) -> M6 {
        let mut acc = M6::identity();
        let mut term = M6::identity();
        for k in 1..terms {
            term = term * m / c(k as f64);
            acc += term;
        }
        acc
    }

    #[test]
    fn zero_gives_identity() {
        assert_eq!(matrix_exponential(&M6::zeros(), 3.0), M6::identity());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = M6::from_fn(|_, _| C64::new(rng.gen(), rng.gen()));
        assert_eq!(matrix_exponential(&m, 0.0), M6::identity());
    }

    #[test]
    fn agrees_with_taylor_on_small_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for scale in [1e-3, 0.1, 0.5, 1.0] {
            for _ in 0..20 {
                let mut m = M6::from_fn(|_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                m *= c(scale / norm1(&m));
                let e = matrix_exponential(&m, 1.0);
                let t = taylor(&m, 30);
                assert!(norm1(&(e - t)) < 1e-13, "scale {scale}");
            }
        }
    }

    #[test]
    fn squaring_path_matches_semigroup() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = M6::from_fn(|_, _| C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)));
        let e2 = matrix_exponential(&m, 2.0);
        let e1 = matrix_exponential(&m, 1.0);
        let rel = norm1(&(e2 - e1 * e1)) / norm1(&e2);
        assert!(rel < 1e-12, "{rel}");
        let inv = matrix_exponential(&m, -1.0);
        assert!(norm1(&(e1 * inv - M6::identity())) < 1e-10);
    }
}
