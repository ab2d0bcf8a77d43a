//! Seeded random objects for tests, sweeps, and the demo.
//!
//! Every generator here is ChaCha8 ([`rand_chacha::ChaCha8Rng`]); independent
//! streams come from [`stream_rng`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::Channel;
use crate::tensor::{c, ComplexMatrix, ComplexVector, C};

/// ChaCha8 generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian(rng: &mut impl Rng) -> C {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unitary (Gram–Schmidt on a complex Ginibre matrix).
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    orthonormalize_columns(&g, dim)
}

/// `rows × cols` isometry (orthonormal columns).
fn random_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng));
    orthonormalize_columns(&g, cols)
}

fn orthonormalize_columns(g: &ComplexMatrix, cols: usize) -> ComplexMatrix {
    let rows = g.rows();
    let mut q: Vec<Vec<C>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v: Vec<C> = (0..rows).map(|r| g[(r, j)]).collect();
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for u in &q {
                let proj: C = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, &y) in v.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= n);
        q.push(v);
    }
    ComplexMatrix::from_fn(rows, cols, |r, col| q[col][r])
}

pub fn random_pure_state(dim: usize, rng: &mut impl Rng) -> ComplexVector {
    let v: Vec<C> = (0..dim).map(|_| gaussian(rng)).collect();
    ComplexVector::new(v).expect("finite").normalized()
}

/// Random density matrix of the given rank (induced measure).
pub fn random_density(dim: usize, rank: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, rank, |_, _| gaussian(rng));
    let rho = &g * &g.dagger();
    let tr = rho.trace().re;
    let rho = rho.scale_real(1.0 / tr);
    // exact Hermitian symmetry
    (&rho + &rho.dagger()).scale_real(0.5)
}

/// Random probability vector of length `n` (uniform on the simplex).
pub fn random_weights(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let e: Vec<f64> = (0..n)
        .map(|_| -rng.random_range(f64::EPSILON..1.0f64).ln())
        .collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| x / s).collect()
}

/// Random CPTP channel with `n_kraus` Kraus operators, from a random
/// Stinespring isometry.
pub fn random_channel(dim: usize, n_kraus: usize, rng: &mut impl Rng) -> Channel {
    let v = random_isometry(dim * n_kraus, dim, rng);
    let kraus = (0..n_kraus)
        .map(|k| ComplexMatrix::from_fn(dim, dim, |r, col| v[(k * dim + r, col)]))
        .collect();
    Channel::new(kraus)
        .expect("isometry blocks form a CPTP map")
        .with_label("random")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_have_the_right_structure() {
        let mut rng = stream_rng(7, 0);
        let u = random_unitary(5, &mut rng);
        assert!(u.is_unitary(1e-12));
        let rho = random_density(4, 2, &mut rng);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(rho.hermitian_eig().unwrap().values[0] > -1e-12);
        let ch = random_channel(2, 3, &mut rng);
        assert!(ch.cptp_error() < 1e-12);
        let w = random_weights(6, &mut rng);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn streams_are_independent_and_reproducible() {
        let a: u64 = stream_rng(1, 0).random();
        let b: u64 = stream_rng(1, 1).random();
        assert_ne!(a, b);
        assert_eq!(a, stream_rng(1, 0).random::<u64>());
    }
}
