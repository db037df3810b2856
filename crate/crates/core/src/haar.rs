//! Haar-distributed random unitaries.
//!
//! A complex Ginibre matrix is orthonormalized column by column. Gram-Schmidt
//! leaves the triangular factor with a positive real diagonal, which is the
//! phase fix that makes the resulting `Q` exactly Haar rather than merely
//! unitary.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::ComplexMatrix;

/// `n x n` Haar unitary, deterministic in `seed`.
pub fn haar_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_with(n, &mut rng)
}

/// `n x n` Haar unitary drawn from a caller-supplied generator.
pub fn haar_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    assert!(n >= 1, "unitary dimension must be positive");
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // Column-major working copy.
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re * scale, im * scale)
                })
                .collect()
        })
        .collect();

    for j in 0..n {
        // Two passes of modified Gram-Schmidt keep |Q^H Q - I| at round-off level.
        for _ in 0..2 {
            for i in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let qi = &done[i];
                let cj = &mut rest[0];
                let proj: Complex64 = qi.iter().zip(cj.iter()).map(|(a, b)| a.conj() * b).sum();
                for (x, q) in cj.iter_mut().zip(qi) {
                    *x -= proj * q;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in &mut cols[j] {
            *x /= norm;
        }
    }
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::validate_unitary;

    #[test]
    fn one_by_one_is_a_phase() {
        for seed in 0..10 {
            let u = haar_unitary(1, seed);
            assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn unitary_to_tolerance() {
        let u = haar_unitary(4, 42);
        assert!(validate_unitary(&u, 1e-10).unwrap().pass);
        for n in [2, 5, 8, 16] {
            let check = validate_unitary(&haar_unitary(n, n as u64), 1e-10).unwrap();
            assert!(check.pass, "n = {n}: residual {}", check.residual);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(haar_unitary(3, 7), haar_unitary(3, 7));
        assert_ne!(haar_unitary(3, 7), haar_unitary(3, 8));
    }

    #[test]
    fn entry_moments_match_haar() {
        // For an N x N Haar unitary, |u_00|^2 ~ Beta(1, N-1):
        // E = 1/N, E[|u|^4] = 2 / (N (N + 1)).
        let n = 4;
        let samples = 10_000;
        let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
        for seed in 0..samples {
            let p = haar_unitary(n, seed)[(0, 0)].norm_sqr();
            s1 += p;
            s2 += p * p;
            s4 += p * p * p * p;
        }
        let k = samples as f64;
        let mean = s1 / k;
        let var = s2 / k - mean * mean;
        let se = (var / k).sqrt();
        assert!((mean - 0.25).abs() <= 3.0 * se, "mean {mean} se {se}");
        let m2 = s2 / k;
        let se2 = ((s4 / k - m2 * m2) / k).sqrt();
        assert!((m2 - 0.1).abs() <= 3.0 * se2, "second moment {m2} se {se2}");
    }
}
