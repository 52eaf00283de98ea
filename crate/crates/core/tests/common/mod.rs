#![allow(dead_code)]

use qgraph::linalg::{CMatrix, CVector};
use qgraph::C;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, n: usize) -> CMatrix<f64> {
    CMatrix::from_fn(n, n, |_, _| {
        C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> CVector<f64> {
    CVector::from_fn(n, |_, _| {
        C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Q factor of a random complex matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix<f64> {
    random_matrix(rng, n).qr().q()
}

/// `V diag(phases) V*` with the first `minus_ones` phases pinned to -1.
pub fn unitary_with_minus_ones(rng: &mut impl Rng, n: usize, minus_ones: usize) -> CMatrix<f64> {
    let v = random_unitary(rng, n);
    let d = CMatrix::from_fn(n, n, |i, j| {
        if i != j {
            C::new(0.0, 0.0)
        } else if i < minus_ones {
            C::new(-1.0, 0.0)
        } else {
            C::from_polar(1.0, rng.gen_range(-3.0..3.0))
        }
    });
    &v * d * v.adjoint()
}

pub fn max_diff(a: &CMatrix<f64>, b: &CMatrix<f64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
