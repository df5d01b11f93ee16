//! Slow, direct reference implementations.
//!
//! Everything here works element by element on dense arrays and shares no
//! code path with the tensor-network routines it is used to check.

use crate::mpo::Model;
use crate::ops;
use crate::tensor::DenseTensor;
use crate::C64;

fn odometer(index: &mut [usize], shape: &[usize]) -> bool {
    for (i, x) in index.iter_mut().enumerate() {
        *x += 1;
        if *x < shape[i] {
            return true;
        }
        *x = 0;
    }
    false
}

/// Explicit nested-loop sum over the paired axes. Output axes are the free
/// axes of `a` followed by those of `b`.
pub fn contract_nested_loop(a: &DenseTensor, axes_a: &[usize], b: &DenseTensor, axes_b: &[usize]) -> DenseTensor {
    let free_a: Vec<usize> = (0..a.rank()).filter(|k| !axes_a.contains(k)).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|k| !axes_b.contains(k)).collect();
    let summed: Vec<usize> = axes_a.iter().map(|&k| a.shape()[k]).collect();
    let out_shape: Vec<usize> = free_a
        .iter()
        .map(|&k| a.shape()[k])
        .chain(free_b.iter().map(|&k| b.shape()[k]))
        .collect();
    let mut ia = vec![0; a.rank()];
    let mut ib = vec![0; b.rank()];
    DenseTensor::from_fn(&out_shape, |out| {
        for (p, &k) in free_a.iter().enumerate() {
            ia[k] = out[p];
        }
        for (p, &k) in free_b.iter().enumerate() {
            ib[k] = out[free_a.len() + p];
        }
        let mut acc = C64::new(0.0, 0.0);
        let mut s = vec![0; summed.len()];
        loop {
            for (p, (&ka, &kb)) in axes_a.iter().zip(axes_b).enumerate() {
                ia[ka] = s[p];
                ib[kb] = s[p];
            }
            acc += a.get(&ia) * b.get(&ib);
            if !odometer(&mut s, &summed) {
                break;
            }
        }
        acc
    })
}

/// Digit of `site` in a basis index where site 0 is the fastest digit.
fn digit(index: usize, site: usize, d: usize) -> usize {
    (index / d.pow(site as u32)) % d
}

/// Dense `d^n x d^n` matrix of a product of single-site operators on distinct
/// sites, identity elsewhere. Built entry by entry.
pub fn product_operator(factors: &[(usize, &DenseTensor)], n: usize, d: usize) -> DenseTensor {
    let dim = d.pow(n as u32);
    DenseTensor::from_fn(&[dim, dim], |ix| {
        let (row, col) = (ix[0], ix[1]);
        let mut value = C64::new(1.0, 0.0);
        for site in 0..n {
            let (r, c) = (digit(row, site, d), digit(col, site, d));
            match factors.iter().find(|(s, _)| *s == site) {
                Some((_, op)) => value *= op.get(&[r, c]),
                None if r != c => return C64::new(0.0, 0.0),
                None => {}
            }
        }
        value
    })
}

pub fn site_operator(op: &DenseTensor, site: usize, n: usize) -> DenseTensor {
    product_operator(&[(site, op)], n, op.nrows())
}

fn accumulate(total: &mut DenseTensor, term: DenseTensor, coefficient: f64) {
    *total = total.add(&term.scale(C64::new(coefficient, 0.0))).expect("same shape");
}

fn zz(i: usize, j: usize, n: usize) -> DenseTensor {
    let sz = ops::sz();
    product_operator(&[(i, &sz), (j, &sz)], n, 2)
}

pub fn ising_nn(n: usize, j: f64, h: f64) -> DenseTensor {
    let dim = 1 << n;
    let mut total = DenseTensor::zeros(&[dim, dim]);
    for i in 0..n - 1 {
        accumulate(&mut total, zz(i, i + 1, n), -j);
    }
    if h != 0.0 {
        for i in 0..n {
            accumulate(&mut total, site_operator(&ops::sx(), i, n), -h);
        }
    }
    total
}

pub fn ising_nnn(n: usize, j1: f64, j2: f64) -> DenseTensor {
    let dim = 1 << n;
    let mut total = DenseTensor::zeros(&[dim, dim]);
    for i in 0..n - 1 {
        accumulate(&mut total, zz(i, i + 1, n), -j1);
    }
    for i in 0..n.saturating_sub(2) {
        accumulate(&mut total, zz(i, i + 2, n), -j2);
    }
    total
}

pub fn exp_decay(n: usize, xi: f64) -> DenseTensor {
    let dim = 1 << n;
    let mut total = DenseTensor::zeros(&[dim, dim]);
    for i in 0..n {
        for j in i + 1..n {
            accumulate(&mut total, zz(i, j, n), (-((j - i) as f64) / xi).exp());
        }
    }
    total
}

pub fn heisenberg(n: usize, j: f64) -> DenseTensor {
    let dim = 1 << n;
    let mut total = DenseTensor::zeros(&[dim, dim]);
    let components = [ops::sx(), ops::sy(), ops::sz()];
    for i in 0..n - 1 {
        for s in &components {
            accumulate(&mut total, product_operator(&[(i, s), (i + 1, s)], n, 2), -j);
        }
    }
    total
}

pub fn model_dense(model: &Model) -> DenseTensor {
    match *model {
        Model::IsingNn { n, j, h } => ising_nn(n, j, h),
        Model::IsingNnn { n, j1, j2 } => ising_nnn(n, j1, j2),
        Model::ExpDecay { n, xi } => exp_decay(n, xi),
        Model::Heisenberg { n, j } => heisenberg(n, j),
    }
}

fn one_norm(m: &DenseTensor) -> f64 {
    (0..m.ncols())
        .map(|c| (0..m.nrows()).map(|r| m.get(&[r, c]).norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by Taylor series with scaling and squaring.
pub fn expm(m: &DenseTensor) -> DenseTensor {
    let n = m.nrows();
    let norm = one_norm(m);
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let a = m.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));
    let mut result = DenseTensor::identity(n);
    let mut term = DenseTensor::identity(n);
    for k in 1..=24 {
        term = term.matmul(&a).expect("square").scale(C64::new(1.0 / k as f64, 0.0));
        result = result.add(&term).expect("square");
    }
    for _ in 0..squarings {
        result = result.matmul(&result).expect("square");
    }
    result
}

/// `M v` by explicit loops.
pub fn matvec(m: &DenseTensor, v: &DenseTensor) -> DenseTensor {
    DenseTensor::from_fn(&[m.nrows()], |ix| {
        (0..m.ncols()).map(|c| m.get(&[ix[0], c]) * v.data()[c]).sum()
    })
}

/// `⟨a|b⟩` by explicit loops.
pub fn vdot(a: &DenseTensor, b: &DenseTensor) -> C64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x.conj() * y).sum()
}

/// `⟨ψ|M|ψ⟩ / ⟨ψ|ψ⟩`.
pub fn expectation(psi: &DenseTensor, m: &DenseTensor) -> C64 {
    vdot(psi, &matvec(m, psi)) / vdot(psi, psi)
}

/// Singular values as square roots of the eigenvalues of `M M^†`, descending.
pub fn singular_values_via_gram(m: &DenseTensor) -> Vec<f64> {
    let gram = m.matmul(&m.dagger().expect("matrix")).expect("matrix");
    let eig = crate::decomp::eig_hermitian(&gram).expect("Hermitian");
    let mut s: Vec<f64> = eig.omega.iter().map(|&w| w.max(0.0).sqrt()).collect();
    s.reverse();
    s.truncate(m.nrows().min(m.ncols()));
    s
}
