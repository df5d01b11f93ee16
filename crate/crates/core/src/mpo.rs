//! Matrix product operators and the built-in spin-chain models.
//!
//! Site tensors have axes `(left, out, in, right)`; `out` pairs with the bra.
//! The operator is `L · W_0 · W_1 ⋯ W_{N-1} · R` where each `W` is read as a
//! matrix over link indices whose entries are `d x d` operators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mps::Mps;
use crate::ops;
use crate::tensor::{contract, kron, DenseTensor};
use crate::C64;

/// Largest Hilbert-space dimension `to_dense` will build.
pub const MAX_DENSE_DIM: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct Mpo {
    sites: Vec<DenseTensor>,
    left: Vec<C64>,
    right: Vec<C64>,
    phys_dim: usize,
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Bulk tensor from a block matrix of local operators; `None` is a zero block.
pub fn bulk_tensor(blocks: &[Vec<Option<DenseTensor>>], d: usize) -> DenseTensor {
    let w = blocks.len();
    DenseTensor::from_fn(&[w, d, d, w], |ix| match &blocks[ix[0]][ix[3]] {
        Some(op) => op.get(&[ix[1], ix[2]]),
        None => real(0.0),
    })
}

fn unit(len: usize, at: usize) -> Vec<C64> {
    (0..len).map(|k| real((k == at) as u8 as f64)).collect()
}

impl Mpo {
    pub fn new(sites: Vec<DenseTensor>, left: Vec<C64>, right: Vec<C64>) -> Result<Self> {
        let n = sites.len();
        if n == 0 {
            return Err(Error::ShapeMismatch("an MPO needs at least one site".into()));
        }
        if sites.iter().any(|t| t.rank() != 4) {
            return Err(Error::ShapeMismatch("MPO site tensors must have rank 4".into()));
        }
        let d = sites[0].shape()[1];
        if sites.iter().any(|t| t.shape()[1] != d || t.shape()[2] != d) {
            return Err(Error::ShapeMismatch("inconsistent physical extents".into()));
        }
        for k in 0..n - 1 {
            if sites[k].shape()[3] != sites[k + 1].shape()[0] {
                return Err(Error::ShapeMismatch(format!("link mismatch after site {k}")));
            }
        }
        if left.len() != sites[0].shape()[0] || right.len() != sites[n - 1].shape()[3] {
            return Err(Error::ShapeMismatch("boundary vectors do not match end links".into()));
        }
        Ok(Self {
            sites,
            left,
            right,
            phys_dim: d,
        })
    }

    /// Repeats one bulk tensor on all `n` sites.
    pub fn uniform(bulk: DenseTensor, n: usize, left: Vec<C64>, right: Vec<C64>) -> Result<Self> {
        Self::new(vec![bulk; n], left, right)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn phys_dim(&self) -> usize {
        self.phys_dim
    }

    pub fn sites(&self) -> &[DenseTensor] {
        &self.sites
    }

    pub fn left_boundary(&self) -> &[C64] {
        &self.left
    }

    pub fn right_boundary(&self) -> &[C64] {
        &self.right
    }

    pub fn bond_dim(&self) -> usize {
        self.sites.iter().map(|t| t.shape()[0]).max().unwrap_or(1)
    }

    fn dim(&self) -> Option<usize> {
        (0..self.len()).try_fold(1usize, |acc, _| acc.checked_mul(self.phys_dim))
    }

    /// Contracts the chain with its boundary vectors into a `d^N x d^N` matrix.
    pub fn to_dense(&self) -> Result<DenseTensor> {
        match self.dim() {
            Some(dim) if dim <= MAX_DENSE_DIM => {}
            other => {
                return Err(Error::TooLarge {
                    dim: other.unwrap_or(usize::MAX),
                    limit: MAX_DENSE_DIM,
                })
            }
        }
        let d = self.phys_dim;
        // partial[a] is the operator on sites 0..k with open right link a
        let mut partial: Vec<DenseTensor> = self
            .left
            .iter()
            .map(|&c| DenseTensor::scalar(c).reshape(&[1, 1]).expect("1x1"))
            .collect();
        for w in &self.sites {
            let (wl, wr) = (w.shape()[0], w.shape()[3]);
            let dim = partial[0].nrows() * d;
            let mut next = vec![DenseTensor::zeros(&[dim, dim]); wr];
            for (a, acc) in partial.iter().enumerate().take(wl) {
                if acc.max_abs() == 0.0 {
                    continue;
                }
                for (b, slot) in next.iter_mut().enumerate() {
                    let block = DenseTensor::from_fn(&[d, d], |ix| w.get(&[a, ix[0], ix[1], b]));
                    if block.max_abs() == 0.0 {
                        continue;
                    }
                    *slot = slot.add(&kron(&block, acc)?)?;
                }
            }
            partial = next;
        }
        let dim = partial[0].nrows();
        let mut total = DenseTensor::zeros(&[dim, dim]);
        for (acc, &c) in partial.iter().zip(&self.right) {
            if c != real(0.0) {
                total = total.add(&acc.scale(c))?;
            }
        }
        Ok(total)
    }

    /// `H v` without building `H`; `v` has length `d^N`, site 0 fastest.
    pub fn apply_to_vector(&self, v: &DenseTensor) -> Result<DenseTensor> {
        let d = self.phys_dim;
        let dim = self.dim().ok_or(Error::TooLarge {
            dim: usize::MAX,
            limit: usize::MAX,
        })?;
        if v.len() != dim {
            return Err(Error::BadLength {
                expected: dim,
                found: v.len(),
            });
        }
        // x[w, rest] with the MPO link as the slowest-varying one
        let wl = self.left.len();
        let boundary = DenseTensor::vector(self.left.clone()).reshape(&[wl, 1])?;
        let mut x = contract(&boundary, &[1], &v.clone().reshape(&[1, dim])?, &[0])?;
        let mut done = 1usize;
        for w in &self.sites {
            let link = x.shape()[0];
            let rest = dim / (done * d);
            let t = x.reshape(&[link, done, d, rest])?;
            // (done, rest, out, right)
            let y = contract(&t, &[0, 2], w, &[0, 2])?;
            let right = w.shape()[3];
            x = y.permute(&[3, 0, 2, 1])?.reshape(&[right, dim])?;
            done *= d;
        }
        let wr = self.right.len();
        let boundary = DenseTensor::vector(self.right.clone()).reshape(&[wr])?;
        let out = contract(&boundary, &[0], &x, &[0])?;
        Ok(out)
    }
}

/// `⟨ψ|H|ψ⟩` by a zipper over bra, MPO and ket; not divided by `⟨ψ|ψ⟩`.
pub fn mpo_expectation(psi: &Mps, h: &Mpo) -> Result<C64> {
    if psi.len() != h.len() || psi.phys_dim() != h.phys_dim() {
        return Err(Error::ShapeMismatch(format!(
            "MPS with {} sites (d={}) vs MPO with {} sites (d={})",
            psi.len(),
            psi.phys_dim(),
            h.len(),
            h.phys_dim()
        )));
    }
    let wl = h.left.len();
    let mut env = DenseTensor::vector(h.left.clone()).reshape(&[1, wl, 1])?;
    for (a, w) in psi.sites().iter().zip(&h.sites) {
        // (bra, w, ket) x ket(l, p, r) -> (bra, w, p, r)
        let x = contract(&env, &[2], a, &[0])?;
        // x W(w, o, p, w') -> (bra, r, o, w')
        let y = contract(&x, &[1, 2], w, &[0, 2])?;
        // conj(bra)(l', o, r') -> (r', r, w')
        let z = contract(&a.conj(), &[0, 1], &y, &[0, 2])?;
        env = z.permute(&[0, 2, 1])?;
    }
    let wr = h.right.len();
    let right = DenseTensor::vector(h.right.clone()).reshape(&[wr])?;
    let value = contract(&env, &[1], &right, &[0])?;
    Ok(value.data()[0])
}

/// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`.
pub fn energy(psi: &Mps, h: &Mpo) -> Result<f64> {
    Ok(mpo_expectation(psi, h)?.re / psi.norm_squared())
}

fn check_sites(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::TooFewSites { n, min });
    }
    Ok(())
}

/// `H = -J Σ Sz_i Sz_{i+1} - h Σ Sx_i`.
pub fn mpo_ising_nn(n: usize, j: f64, h: f64) -> Result<Mpo> {
    check_sites(n, 2)?;
    let (id, sz, sx) = (ops::identity(), ops::sz(), ops::sx());
    let field = (h != 0.0).then(|| sx.scale(real(-h)));
    let blocks = vec![
        vec![Some(id.clone()), None, None],
        vec![Some(sz.clone()), None, None],
        vec![field, Some(sz.scale(real(-j))), Some(id)],
    ];
    Mpo::uniform(bulk_tensor(&blocks, 2), n, unit(3, 2), unit(3, 0))
}

/// `H = Σ (-J₁ Sz_i Sz_{i+1} - J₂ Sz_i Sz_{i+2})`.
pub fn mpo_ising_nnn(n: usize, j1: f64, j2: f64) -> Result<Mpo> {
    check_sites(n, 3)?;
    let (id, sz) = (ops::identity(), ops::sz());
    let blocks = vec![
        vec![Some(id.clone()), None, None, None],
        vec![Some(sz.clone()), None, None, None],
        vec![None, Some(id.clone()), None, None],
        vec![None, Some(sz.scale(real(-j1))), Some(sz.scale(real(-j2))), Some(id)],
    ];
    Mpo::uniform(bulk_tensor(&blocks, 2), n, unit(4, 3), unit(4, 0))
}

/// `H = Σ_{i<j} κ^{j-i} Sz_i Sz_j` with `κ = exp(-1/ξ)`.
pub fn mpo_exp_decay(n: usize, xi: f64) -> Result<Mpo> {
    check_sites(n, 2)?;
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::BadXi(xi));
    }
    let kappa = (-1.0 / xi).exp();
    let (id, sz) = (ops::identity(), ops::sz());
    let blocks = vec![
        vec![Some(id.clone()), None, None],
        vec![Some(sz.scale(real(kappa))), Some(id.scale(real(kappa))), None],
        vec![None, Some(sz), Some(id)],
    ];
    Mpo::uniform(bulk_tensor(&blocks, 2), n, unit(3, 2), unit(3, 0))
}

/// `H = -J Σ S_i · S_{i+1}`.
pub fn mpo_heisenberg(n: usize, j: f64) -> Result<Mpo> {
    check_sites(n, 2)?;
    let (id, sz, sp, sm) = (ops::identity(), ops::sz(), ops::s_plus(), ops::s_minus());
    let half = real(-j / 2.0);
    let blocks = vec![
        vec![Some(id.clone()), None, None, None, None],
        vec![Some(sp.clone()), None, None, None, None],
        vec![Some(sm.clone()), None, None, None, None],
        vec![Some(sz.clone()), None, None, None, None],
        vec![
            None,
            Some(sm.scale(half)),
            Some(sp.scale(half)),
            Some(sz.scale(real(-j))),
            Some(id),
        ],
    ];
    Mpo::uniform(bulk_tensor(&blocks, 2), n, unit(5, 4), unit(5, 0))
}

/// Model block of an experiment: chain length plus couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum Model {
    IsingNn {
        n: usize,
        j: f64,
        #[serde(default)]
        h: f64,
    },
    IsingNnn {
        n: usize,
        j1: f64,
        j2: f64,
    },
    ExpDecay {
        n: usize,
        xi: f64,
    },
    Heisenberg {
        n: usize,
        j: f64,
    },
}

impl Model {
    pub fn n(&self) -> usize {
        match *self {
            Model::IsingNn { n, .. }
            | Model::IsingNnn { n, .. }
            | Model::ExpDecay { n, .. }
            | Model::Heisenberg { n, .. } => n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::IsingNn { .. } => "ising_nn",
            Model::IsingNnn { .. } => "ising_nnn",
            Model::ExpDecay { .. } => "exp_decay",
            Model::Heisenberg { .. } => "heisenberg",
        }
    }

    pub fn phys_dim(&self) -> usize {
        ops::SPIN_HALF_DIM
    }

    pub fn mpo(&self) -> Result<Mpo> {
        match *self {
            Model::IsingNn { n, j, h } => mpo_ising_nn(n, j, h),
            Model::IsingNnn { n, j1, j2 } => mpo_ising_nnn(n, j1, j2),
            Model::ExpDecay { n, xi } => mpo_exp_decay(n, xi),
            Model::Heisenberg { n, j } => mpo_heisenberg(n, j),
        }
    }

    /// Two-site terms `h_b` on bonds `(b, b+1)`, indexed by `σ_b + d σ_{b+1}`.
    /// On-site fields are shared between the bonds that touch a site.
    pub fn bond_terms(&self) -> Result<Vec<DenseTensor>> {
        let n = self.n();
        check_sites(n, 2)?;
        // A_b B_{b+1} in local index order is kron(B, A)
        let pair = |a: &DenseTensor, b: &DenseTensor| kron(b, a);
        let id = ops::identity();
        match *self {
            Model::IsingNn { j, h, .. } => (0..n - 1)
                .map(|b| {
                    let weight = |site: usize| if site == 0 || site == n - 1 { 1.0 } else { 0.5 };
                    let zz = pair(&ops::sz(), &ops::sz())?.scale(real(-j));
                    let left = pair(&ops::sx(), &id)?.scale(real(-h * weight(b)));
                    let right = pair(&id, &ops::sx())?.scale(real(-h * weight(b + 1)));
                    zz.add(&left)?.add(&right)
                })
                .collect(),
            Model::Heisenberg { j, .. } => {
                let term = [ops::sx(), ops::sy(), ops::sz()]
                    .iter()
                    .try_fold(DenseTensor::zeros(&[4, 4]), |acc, s| acc.add(&pair(s, s)?))?
                    .scale(real(-j));
                Ok(vec![term; n - 1])
            }
            Model::IsingNnn { .. } => Err(Error::UnsupportedModel("ising_nnn")),
            Model::ExpDecay { .. } => Err(Error::UnsupportedModel("exp_decay")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp;
    use crate::mps::Mps;
    use crate::{oracle, random};
    use proptest::prelude::*;

    fn max_diff(a: &DenseTensor, b: &DenseTensor) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn ising_two_sites() {
        let h = mpo_ising_nn(2, 1.0, 0.0).unwrap().to_dense().unwrap();
        let expected = DenseTensor::from_fn(&[4, 4], |ix| {
            let diag = [-0.25, 0.25, 0.25, -0.25];
            real(if ix[0] == ix[1] { diag[ix[0]] } else { 0.0 })
        });
        assert!(max_diff(&h, &expected) < 1e-15);
    }

    #[test]
    fn ising_zero_coupling_is_zero() {
        assert_eq!(mpo_ising_nn(3, 0.0, 0.0).unwrap().to_dense().unwrap().max_abs(), 0.0);
    }

    #[test]
    fn ising_four_site_ground_energy() {
        let h = mpo_ising_nn(4, 1.0, 0.0).unwrap().to_dense().unwrap();
        let e = decomp::eig_hermitian(&h).unwrap();
        assert!((e.omega[0] + 0.75).abs() < 1e-14);
        assert!((e.omega[1] + 0.75).abs() < 1e-14);
        assert!(e.omega[2] > -0.75 + 0.1);
    }

    #[test]
    fn too_few_sites() {
        assert_eq!(mpo_ising_nn(1, 1.0, 0.0).unwrap_err(), Error::TooFewSites { n: 1, min: 2 });
        assert_eq!(mpo_ising_nnn(2, 1.0, 1.0).unwrap_err(), Error::TooFewSites { n: 2, min: 3 });
        assert!(matches!(mpo_exp_decay(3, 0.0), Err(Error::BadXi(_))));
        assert!(matches!(mpo_exp_decay(3, f64::NAN), Err(Error::BadXi(_))));
    }

    #[test]
    fn nnn_reduces_to_nn() {
        let a = mpo_ising_nnn(5, 0.7, 0.0).unwrap().to_dense().unwrap();
        let b = mpo_ising_nn(5, 0.7, 0.0).unwrap().to_dense().unwrap();
        assert!(max_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn nnn_only_second_neighbour() {
        let a = mpo_ising_nnn(3, 0.0, 1.0).unwrap().to_dense().unwrap();
        let sz = ops::sz();
        let b = oracle::product_operator(&[(0, &sz), (2, &sz)], 3, 2).scale(real(-1.0));
        assert!(max_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn exp_decay_coefficients() {
        let sz = ops::sz();
        let two = mpo_exp_decay(2, 0.5).unwrap().to_dense().unwrap();
        // <uu|H|uu> = κ/4
        assert!((two.get(&[0, 0]).re - (-2.0f64).exp() / 4.0).abs() < 1e-15);
        let four = mpo_exp_decay(4, 1.0).unwrap().to_dense().unwrap();
        let probe = oracle::product_operator(&[(0, &sz), (3, &sz)], 4, 2);
        // Tr(H Sz_0 Sz_3) / Tr((Sz_0 Sz_3)^2) isolates the coefficient
        let coefficient = four.matmul(&probe).unwrap().trace().unwrap().re
            / probe.matmul(&probe).unwrap().trace().unwrap().re;
        assert!((coefficient - (-3.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn exp_decay_small_xi_is_nearest_neighbour() {
        let xi: f64 = 0.05;
        let kappa = (-1.0 / xi).exp();
        let a = mpo_exp_decay(5, xi).unwrap().to_dense().unwrap();
        let b = mpo_ising_nn(5, -kappa, 0.0).unwrap().to_dense().unwrap();
        assert!(max_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn heisenberg_pair_spectrum() {
        let h = mpo_heisenberg(2, 1.0).unwrap().to_dense().unwrap();
        let e = decomp::eig_hermitian(&h).unwrap();
        for w in &e.omega[..3] {
            assert!((w + 0.25).abs() < 1e-14);
        }
        assert!((e.omega[3] - 0.75).abs() < 1e-14);
        assert_eq!(mpo_heisenberg(2, 0.0).unwrap().to_dense().unwrap().max_abs(), 0.0);
    }

    #[test]
    fn identity_mpo_densifies_to_identity() {
        let blocks = vec![vec![Some(ops::identity())]];
        let m = Mpo::uniform(bulk_tensor(&blocks, 2), 3, vec![real(1.0)], vec![real(1.0)]).unwrap();
        assert!(max_diff(&m.to_dense().unwrap(), &DenseTensor::identity(8)) < 1e-15);
    }

    #[test]
    fn boundary_picks_lower_left_corner() {
        // distinguishable placeholders in every block of a 3x3 chain
        let blocks: Vec<Vec<Option<DenseTensor>>> = (0..3)
            .map(|a| (0..3).map(|b| Some(ops::identity().scale(real((1 + 3 * a + b) as f64)))).collect())
            .collect();
        let w = bulk_tensor(&blocks, 2);
        let one = Mpo::uniform(w.clone(), 1, unit(3, 2), unit(3, 0)).unwrap();
        assert_eq!(one.to_dense().unwrap().get(&[0, 0]).re, 7.0);
        let two = Mpo::uniform(w, 2, unit(3, 2), unit(3, 0)).unwrap();
        // Σ_k W[2,k] W[k,0] = 7*1 + 8*4 + 9*7
        assert_eq!(two.to_dense().unwrap().get(&[1, 1]).re, 102.0);
    }

    #[test]
    fn zero_padding_is_invisible() {
        let base = mpo_heisenberg(3, 0.8).unwrap();
        let w = &base.sites()[0];
        let padded = DenseTensor::from_fn(&[6, 2, 2, 6], |ix| {
            if ix[0] < 5 && ix[3] < 5 {
                w.get(ix)
            } else {
                real(0.0)
            }
        });
        let mut left = base.left_boundary().to_vec();
        left.push(real(0.0));
        let mut right = base.right_boundary().to_vec();
        right.push(real(0.0));
        let m = Mpo::uniform(padded, 3, left, right).unwrap();
        assert!(max_diff(&m.to_dense().unwrap(), &base.to_dense().unwrap()) < 1e-15);
    }

    #[test]
    fn too_large_to_densify() {
        let m = mpo_ising_nn(13, 1.0, 0.0).unwrap();
        assert!(matches!(m.to_dense(), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn expectation_examples() {
        let up = Mps::product_state(&vec![ops::up(); 4]).unwrap();
        let e = mpo_expectation(&up, &mpo_ising_nn(4, 1.0, 0.0).unwrap()).unwrap();
        assert!((e - real(-0.75)).norm() < 1e-15);
        let m = Mps::random(4, 2, 4, &mut random::stream(1, 0)).unwrap();
        let zero = mpo_expectation(&m, &mpo_ising_nn(4, 0.0, 0.0).unwrap()).unwrap();
        assert!(zero.norm() < 1e-15);
    }

    #[test]
    fn expectation_matches_dense_heisenberg() {
        let n = 8;
        let m = Mps::random(n, 2, 8, &mut random::stream(2, 0)).unwrap();
        let h = mpo_heisenberg(n, 1.0).unwrap();
        let v = m.to_state_vector().unwrap();
        let dense = oracle::expectation(&v, &h.to_dense().unwrap());
        let e = mpo_expectation(&m, &h).unwrap();
        assert!((e - dense).norm() < 1e-10);
        assert!(e.im.abs() < 1e-10);
    }

    #[test]
    fn matrix_free_application_matches_dense() {
        let n = 6;
        let h = mpo_heisenberg(n, -1.0).unwrap();
        let v = random::state_vector(1 << n, &mut random::stream(3, 0));
        let a = h.apply_to_vector(&v).unwrap();
        let b = oracle::matvec(&h.to_dense().unwrap(), &v);
        assert!(max_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn bond_terms_reassemble_hamiltonian() {
        let model = Model::IsingNn { n: 4, j: 1.0, h: 0.6 };
        let terms = model.bond_terms().unwrap();
        let mut total = DenseTensor::zeros(&[16, 16]);
        for (b, t) in terms.iter().enumerate() {
            let embedded = DenseTensor::from_fn(&[16, 16], |ix| {
                let mask = 0b11 << b;
                if (ix[0] & !mask) != (ix[1] & !mask) {
                    return real(0.0);
                }
                t.get(&[(ix[0] >> b) & 3, (ix[1] >> b) & 3])
            });
            total = total.add(&embedded).unwrap();
        }
        assert!(max_diff(&total, &oracle::ising_nn(4, 1.0, 0.6)) < 1e-14);
        assert!(matches!(
            Model::ExpDecay { n: 4, xi: 1.0 }.bond_terms(),
            Err(Error::UnsupportedModel(_))
        ));
    }

    #[test]
    fn model_json_tags() {
        let m: Model = serde_json::from_str(r#"{"model":"heisenberg","n":4,"j":-1}"#).unwrap();
        assert_eq!(m, Model::Heisenberg { n: 4, j: -1.0 });
        let m: Model = serde_json::from_str(r#"{"model":"ising_nn","n":3,"j":1}"#).unwrap();
        assert_eq!(m, Model::IsingNn { n: 3, j: 1.0, h: 0.0 });
        assert!(serde_json::from_str::<Model>(r#"{"model":"heisenberg","n":4,"j":1,"q":2}"#).is_err());
    }

    fn models(n: usize, a: f64, b: f64) -> Vec<Model> {
        let mut out = vec![
            Model::IsingNn { n, j: a, h: b },
            Model::ExpDecay { n, xi: 0.2 + a.abs() },
            Model::Heisenberg { n, j: a },
        ];
        if n >= 3 {
            out.push(Model::IsingNnn { n, j1: a, j2: b });
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn builders_match_kronecker_oracle(n in 2usize..=7, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            for model in models(n, a, b) {
                let dense = model.mpo().unwrap().to_dense().unwrap();
                let reference = oracle::model_dense(&model);
                prop_assert!(max_diff(&dense, &reference) < 1e-12, "{model:?}");
                prop_assert!(max_diff(&dense, &dense.dagger().unwrap()) < 1e-12);
            }
        }
    }
}
