//! Exact diagonalization of small chains, used as the reference for the
//! tensor-network results.

use faer::{Mat, Side};

use crate::decomp;
use crate::error::{Error, Result};
use crate::mpo::{Mpo, MAX_DENSE_DIM};
use crate::random;
use crate::tensor::DenseTensor;
use crate::C64;

/// Largest dimension handled by the matrix-free solver.
pub const MAX_ITERATIVE_DIM: usize = 1 << 20;

/// Seed of the Lanczos start vector.
pub const LANCZOS_SEED: u64 = 0x5eed;

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending. The iterative solver reports only the lowest value.
    pub energies: Vec<f64>,
    /// Normalized eigenvector of `energies[0]`.
    pub ground_state: DenseTensor,
    pub dim: usize,
    /// `‖H ψ - E₀ ψ‖`.
    pub residual: f64,
}

impl SpectrumResult {
    pub fn e0(&self) -> f64 {
        self.energies[0]
    }

    /// `E₁ - E₀` when at least two levels are known.
    pub fn gap(&self) -> Option<f64> {
        (self.energies.len() > 1).then(|| self.energies[1] - self.energies[0])
    }
}

fn residual(h: &Mpo, psi: &DenseTensor, e: f64) -> Result<f64> {
    let hv = h.apply_to_vector(psi)?;
    Ok(hv.sub(&psi.scale(C64::new(e, 0.0)))?.frobenius_norm())
}

/// Full Hermitian eigendecomposition of the densified operator.
pub fn solve_dense(h: &Mpo) -> Result<SpectrumResult> {
    let dense = h.to_dense()?;
    let dim = dense.nrows();
    if dim > MAX_DENSE_DIM {
        return Err(Error::TooLarge {
            dim,
            limit: MAX_DENSE_DIM,
        });
    }
    let eig = decomp::eig_hermitian(&dense)?;
    let ground_state = DenseTensor::from_fn(&[dim], |ix| eig.u.get(&[ix[0], 0]));
    let residual = residual(h, &ground_state, eig.omega[0])?;
    Ok(SpectrumResult {
        energies: eig.omega,
        ground_state,
        dim,
        residual,
    })
}

fn lowest_ritz_pair(alpha: &[f64], beta: &[f64]) -> Result<(f64, Vec<f64>)> {
    let m = alpha.len();
    let t = Mat::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("tridiagonal eigh: {e:?}")))?;
    let s = eig.S().column_vector();
    let mut best = 0;
    for k in 1..m {
        if s[k] < s[best] {
            best = k;
        }
    }
    let y = (0..m).map(|i| eig.U()[(i, best)]).collect();
    Ok((s[best], y))
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Lanczos with full reorthogonalization from a seeded random start vector.
/// Stops when the Ritz residual falls below `tol` or after `iters` steps.
pub fn solve_iterative(h: &Mpo, iters: usize, tol: f64) -> Result<SpectrumResult> {
    let dim = (0..h.len()).try_fold(1usize, |acc, _| acc.checked_mul(h.phys_dim()));
    let dim = match dim {
        Some(d) if d <= MAX_ITERATIVE_DIM => d,
        other => {
            return Err(Error::TooLarge {
                dim: other.unwrap_or(usize::MAX),
                limit: MAX_ITERATIVE_DIM,
            })
        }
    };
    if iters == 0 {
        return Err(Error::NoConvergence {
            iters: 0,
            residual: f64::INFINITY,
        });
    }
    let start = random::state_vector(dim, &mut random::stream(LANCZOS_SEED, 0));
    let mut basis: Vec<Vec<C64>> = vec![start.into_data()];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last_residual = f64::INFINITY;
    let steps = iters.min(dim);
    for k in 0..steps {
        let v = DenseTensor::vector(basis[k].clone());
        let mut w = h.apply_to_vector(&v)?.into_data();
        let a = dot(&basis[k], &w).re;
        alpha.push(a);
        // two passes of Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                axpy(&mut w, -c, q);
            }
        }
        let b = norm(&w);
        let (theta, y) = lowest_ritz_pair(&alpha, &beta)?;
        last_residual = b * y[k].abs();
        let exhausted = b < 1e-13 || k + 1 == dim;
        if last_residual < tol || exhausted {
            let mut psi = vec![C64::new(0.0, 0.0); dim];
            for (q, &c) in basis.iter().zip(&y) {
                axpy(&mut psi, C64::new(c, 0.0), q);
            }
            let n = norm(&psi);
            let ground_state = DenseTensor::vector(psi).scale(C64::new(1.0 / n, 0.0));
            let residual = residual(h, &ground_state, theta)?;
            return Ok(SpectrumResult {
                energies: vec![theta],
                ground_state,
                dim,
                residual,
            });
        }
        beta.push(b);
        for x in w.iter_mut() {
            *x /= b;
        }
        basis.push(w);
    }
    Err(Error::NoConvergence {
        iters: steps,
        residual: last_residual,
    })
}
