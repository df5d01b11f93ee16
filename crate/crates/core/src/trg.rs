//! Tensor renormalization group for the square-lattice Ising model.
//!
//! Plaquette tensors `T[u,l,d,r]` sit on one checkerboard sublattice of the
//! plaquettes, so each spin is a leg shared by two tensors and every lattice
//! bond belongs to exactly one tensor. A step splits each tensor along both
//! diagonals (`(u,l)|(d,r)` and `(l,d)|(r,u)`), absorbing `√D` into each
//! half, and contracts four halves around a square into the coarse tensor.
//! This halves the tensor count and rotates the lattice by 45°.
//!
//! The partition function is closed on the two-tensor torus
//! `Σ T[u,l,d,r] T[d,r,u,l]`. After `k` steps this is an exact contraction of
//! a torus with `2^(k+2)` spins; even `k` gives a square `L x L` torus with
//! `L = 2^(k/2 + 1)`.

use serde::{Deserialize, Serialize};

use crate::decomp::{self, TruncationSpec};
use crate::error::{Error, Result};
use crate::tensor::{contract, DenseTensor};
use crate::C64;

/// Largest lattice `brute_force_partition` enumerates.
pub const MAX_BRUTE_FORCE_SPINS: usize = 20;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrgState {
    /// Rank 4, axes `(up, left, down, right)`, max-abs normalized.
    pub tensor: DenseTensor,
    /// `Σ ln(norm) / sites_per_tensor` over all normalizations so far.
    pub log_norm_accum: f64,
    pub step: usize,
    pub sites_per_tensor: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::BadBeta(beta));
    }
    Ok(())
}

/// Raw plaquette weights `exp(βJ(σ_u σ_l + σ_l σ_d + σ_d σ_r + σ_r σ_u))`
/// with spin `+1` at index 0 and `-1` at index 1.
pub fn plaquette_weights(beta: f64, j: f64) -> Result<DenseTensor> {
    check_beta(beta)?;
    let spin = |k: usize| if k == 0 { 1.0 } else { -1.0 };
    Ok(DenseTensor::from_fn(&[2, 2, 2, 2], |ix| {
        let (u, l, d, r) = (spin(ix[0]), spin(ix[1]), spin(ix[2]), spin(ix[3]));
        C64::new((beta * j * (u * l + l * d + d * r + r * u)).exp(), 0.0)
    }))
}

impl TrgState {
    /// Starts from an arbitrary real rank-4 tensor; two spins per tensor.
    pub fn from_tensor(tensor: DenseTensor) -> Result<Self> {
        if tensor.rank() != 4 {
            return Err(Error::RankUnsupported(tensor.rank()));
        }
        let s = tensor.shape();
        if s[0] != s[2] || s[1] != s[3] {
            return Err(Error::ShapeMismatch(format!("opposite legs must match, got {s:?}")));
        }
        let (tensor, norm) = normalize(tensor)?;
        Ok(Self {
            tensor,
            log_norm_accum: norm.ln() / 2.0,
            step: 0,
            sites_per_tensor: 2.0,
        })
    }

    pub fn bond_dim(&self) -> usize {
        self.tensor.shape()[0].max(self.tensor.shape()[1])
    }

    /// `ln 𝒵 / N` for the two-tensor torus closure of the current network.
    pub fn ln_z_per_site(&self) -> Result<f64> {
        let t = &self.tensor;
        // Σ T[u,l,d,r] T[d,r,u,l]
        let closure = contract(t, &[0, 1, 2, 3], t, &[2, 3, 0, 1])?.data()[0].re;
        if !(closure > 0.0) {
            return Err(Error::NumericalFailure(format!("torus closure is {closure}")));
        }
        Ok(self.log_norm_accum + closure.ln() / (2.0 * self.sites_per_tensor))
    }

    /// Number of spins on the closing torus.
    pub fn torus_sites(&self) -> f64 {
        2.0 * self.sites_per_tensor
    }
}

fn normalize(t: DenseTensor) -> Result<(DenseTensor, f64)> {
    let norm = t.max_abs();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::NumericalFailure(format!("tensor max-abs is {norm}")));
    }
    Ok((t.scale(C64::new(1.0 / norm, 0.0)), norm))
}

pub fn ising_plaquette_tensor(beta: f64, j: f64) -> Result<TrgState> {
    TrgState::from_tensor(plaquette_weights(beta, j)?)
}

/// Splits `m` as `(U√D)(√D V^†)`.
fn split(m: &DenseTensor, spec: &TruncationSpec) -> Result<(DenseTensor, DenseTensor)> {
    let s = decomp::truncated_svd(m, spec)?;
    let root: Vec<f64> = s.d.iter().map(|x| x.sqrt()).collect();
    let left = DenseTensor::from_fn(s.u.shape(), |ix| s.u.get(ix) * root[ix[1]]);
    let right = DenseTensor::from_fn(s.v_dag.shape(), |ix| s.v_dag.get(ix) * root[ix[0]]);
    Ok((left, right))
}

/// One coarse-graining step.
pub fn trg_step(s: &TrgState, spec: &TruncationSpec) -> Result<TrgState> {
    spec.validate()?;
    let t = &s.tensor;
    let (cu, cl) = (t.shape()[0], t.shape()[1]);
    // (u,l) | (d,r)
    let (a, b) = split(&t.clone().reshape(&[cu * cl, cu * cl])?, spec)?;
    let k1 = a.ncols();
    let s1 = a.reshape(&[cu, cl, k1])?;
    let s3 = b.reshape(&[k1, cu, cl])?;
    // (l,d) | (r,u)
    let rotated = t.permute(&[1, 2, 3, 0])?;
    let (a, b) = split(&rotated.reshape(&[cl * cu, cl * cu])?, spec)?;
    let k2 = a.ncols();
    let s2 = a.reshape(&[cl, cu, k2])?;
    let s4 = b.reshape(&[k2, cl, cu])?;
    // T'[c,e,a,b] = Σ S4[a,x,y] S1[z,x,b] S2[w,z,c] S3[e,y,w]
    let x = contract(&s4, &[1], &s1, &[1])?; // (a, y, z, b)
    let y = contract(&s2, &[0], &s3, &[2])?; // (z, c, e, y)
    let coarse = contract(&x, &[1, 2], &y, &[3, 0])?.permute(&[2, 3, 0, 1])?;
    let coarse = coarse.map(|z| C64::new(z.re, 0.0));
    let (tensor, norm) = normalize(coarse)?;
    let sites_per_tensor = 2.0 * s.sites_per_tensor;
    Ok(TrgState {
        tensor,
        log_norm_accum: s.log_norm_accum + norm.ln() / sites_per_tensor,
        step: s.step + 1,
        sites_per_tensor,
    })
}

/// `ln 𝒵 / N` after `steps` coarse-graining steps.
pub fn ln_z_per_site(beta: f64, j: f64, steps: usize, spec: &TruncationSpec) -> Result<f64> {
    run(ising_plaquette_tensor(beta, j)?, steps, spec)?.ln_z_per_site()
}

pub fn run(mut state: TrgState, steps: usize, spec: &TruncationSpec) -> Result<TrgState> {
    for _ in 0..steps {
        state = trg_step(&state, spec)?;
    }
    Ok(state)
}

/// `f = -(1/β) ln 𝒵 / N`.
pub fn free_energy_per_site(beta: f64, j: f64, steps: usize, spec: &TruncationSpec) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::BadBeta(beta));
    }
    Ok(-ln_z_per_site(beta, j, steps, spec)? / beta)
}

/// Exact `ln 𝒵` of the Ising model on an `lx x ly` torus.
pub fn brute_force_partition(beta: f64, j: f64, lx: usize, ly: usize) -> Result<f64> {
    brute_force_partition_lattice(beta, j, (lx as i64, 0), (0, ly as i64))
}

/// Exact `ln 𝒵` on the torus `Z² / (p1 Z + p2 Z)`. Nearest-neighbour bonds
/// that wrap onto the same site are dropped; bonds that wrap onto the same
/// pair twice are counted twice.
pub fn brute_force_partition_lattice(beta: f64, j: f64, p1: (i64, i64), p2: (i64, i64)) -> Result<f64> {
    check_beta(beta)?;
    let det = p1.0 * p2.1 - p1.1 * p2.0;
    let n = det.unsigned_abs() as usize;
    if n == 0 {
        return Err(Error::InvalidArgument("period vectors are parallel".into()));
    }
    if n > MAX_BRUTE_FORCE_SPINS {
        return Err(Error::TooLarge {
            dim: n,
            limit: MAX_BRUTE_FORCE_SPINS,
        });
    }
    // coordinates of p in the (p1, p2) basis, scaled by det, reduced mod det
    let key = |p: (i64, i64)| {
        let a = (p.0 * p2.1 - p.1 * p2.0).rem_euclid(det.abs());
        let b = (p1.0 * p.1 - p1.1 * p.0).rem_euclid(det.abs());
        (a, b)
    };
    let mut keys: Vec<(i64, i64)> = Vec::with_capacity(n);
    let mut points: Vec<(i64, i64)> = Vec::with_capacity(n);
    let reach = (p1.0.abs() + p1.1.abs() + p2.0.abs() + p2.1.abs()).max(1);
    'scan: for x in -reach..=reach {
        for y in -reach..=reach {
            let k = key((x, y));
            if !keys.contains(&k) {
                keys.push(k);
                points.push((x, y));
                if keys.len() == n {
                    break 'scan;
                }
            }
        }
    }
    let index = |p: (i64, i64)| keys.iter().position(|&k| k == key(p)).expect("every point has a representative");
    let mut bonds = Vec::with_capacity(2 * n);
    for (i, &(x, y)) in points.iter().enumerate() {
        for q in [(x + 1, y), (x, y + 1)] {
            let k = index(q);
            if k != i {
                bonds.push((i, k));
            }
        }
    }
    let mut terms = Vec::with_capacity(1 << n);
    for config in 0u32..(1u32 << n) {
        let spin = |i: usize| if config >> i & 1 == 0 { 1.0 } else { -1.0 };
        let e: f64 = bonds.iter().map(|&(a, b)| spin(a) * spin(b)).sum();
        terms.push(beta * j * e);
    }
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln())
}

/// Period vectors of the torus closed by `trg` after `steps` exact steps.
pub fn closure_torus(steps: usize) -> ((i64, i64), (i64, i64)) {
    let half = (steps / 2) as u32;
    let side = 2i64.pow(half + 1);
    if steps % 2 == 0 {
        ((side, 0), (0, side))
    } else {
        ((side, -side), (side, side))
    }
}
