//! Seeded random inputs: ChaCha8 streams, Gaussian-ish entries from the
//! Box-Muller transform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle;
use crate::tensor::DenseTensor;
use crate::C64;

/// Generator for a given run seed and module stream.
pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(normal(rng), normal(rng))
}

pub fn complex_tensor<R: Rng + ?Sized>(shape: &[usize], rng: &mut R) -> DenseTensor {
    DenseTensor::from_fn(shape, |_| complex_normal(rng))
}

pub fn real_tensor<R: Rng + ?Sized>(shape: &[usize], rng: &mut R) -> DenseTensor {
    DenseTensor::from_fn(shape, |_| C64::new(normal(rng), 0.0))
}

/// Normalized complex state vector of length `dim`.
pub fn state_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseTensor {
    let v = complex_tensor(&[dim], rng);
    let n = v.frobenius_norm();
    v.scale(C64::new(1.0 / n, 0.0))
}

pub fn hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DenseTensor {
    let a = complex_tensor(&[n, n], rng);
    let ad = a.dagger().expect("matrix");
    a.add(&ad).expect("same shape").scale(C64::new(0.5, 0.0))
}

/// Haar-ish unitary `exp(iH)` with a random Hermitian `H` of unit scale.
pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DenseTensor {
    let h = hermitian(n, rng).scale(C64::new(0.0, std::f64::consts::PI));
    oracle::expm(&h)
}

/// Matrix with singular values in `[1, cond]`, built as `U diag(s) W`.
pub fn well_conditioned<R: Rng + ?Sized>(n: usize, cond: f64, rng: &mut R) -> DenseTensor {
    let u = unitary(n, rng);
    let w = unitary(n, rng);
    let s: Vec<f64> = (0..n)
        .map(|k| {
            if n == 1 {
                1.0
            } else {
                cond.powf(k as f64 / (n - 1) as f64)
            }
        })
        .collect();
    let us = DenseTensor::from_fn(&[n, n], |ix| u.get(ix) * s[ix[1]]);
    us.matmul(&w).expect("square")
}
