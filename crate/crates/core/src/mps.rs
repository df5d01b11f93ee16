//! Matrix product states with open boundaries.
//!
//! Site tensors have axes `(left, physical, right)` and the two boundary
//! links have extent 1. Basis index of a full state vector is
//! `Σ_k σ_k d^k`, i.e. site 0 is the fastest digit, which is what the
//! column-major reshape of the construction produces.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decomp::{self, TruncationSpec};
use crate::error::{Error, Result};
use crate::random;
use crate::tensor::{contract, DenseTensor};
use crate::C64;

/// Largest state vector `to_state_vector` will build.
pub const MAX_STATE_DIM: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepDirection {
    /// Left to right; gate splits leave the center on the right site.
    Forward,
    /// Right to left; gate splits leave the center on the left site.
    Backward,
}

impl SweepDirection {
    pub fn reversed(self) -> Self {
        match self {
            Self::Forward => Self::Backward,
            Self::Backward => Self::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationRange {
    Finite,
    /// Bond dimension 1 or vanishing subleading eigenvalue: no correlations.
    ZeroRange,
    /// Degenerate dominant eigenvalue.
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub xi: f64,
    /// `|ε_i|`, descending.
    pub transfer_eigs: Vec<f64>,
    pub fit_exponent: Option<f64>,
    pub range: CorrelationRange,
    /// Site whose transfer matrix was analysed.
    pub site: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MpsDump")]
pub struct Mps {
    sites: Vec<DenseTensor>,
    /// `None` when no canonical form is known, e.g. after a gauge insertion.
    center: Option<usize>,
    phys_dim: usize,
}

#[derive(Deserialize)]
struct MpsDump {
    sites: Vec<DenseTensor>,
    center: Option<usize>,
    #[allow(dead_code)]
    phys_dim: usize,
}

impl TryFrom<MpsDump> for Mps {
    type Error = Error;

    fn try_from(dump: MpsDump) -> Result<Self> {
        Mps::from_sites(dump.sites, dump.center)
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

impl Mps {
    /// Validates shapes. `center` is trusted, not checked numerically.
    pub fn from_sites(sites: Vec<DenseTensor>, center: Option<usize>) -> Result<Self> {
        let n = sites.len();
        if n == 0 {
            return Err(Error::ShapeMismatch("an MPS needs at least one site".into()));
        }
        for (k, t) in sites.iter().enumerate() {
            if t.rank() != 3 {
                return Err(Error::ShapeMismatch(format!("site {k} has rank {}", t.rank())));
            }
        }
        let phys_dim = sites[0].shape()[1];
        if sites.iter().any(|t| t.shape()[1] != phys_dim) {
            return Err(Error::ShapeMismatch("physical extents differ between sites".into()));
        }
        if sites[0].shape()[0] != 1 || sites[n - 1].shape()[2] != 1 {
            return Err(Error::ShapeMismatch("boundary links must have extent 1".into()));
        }
        for k in 0..n - 1 {
            let (r, l) = (sites[k].shape()[2], sites[k + 1].shape()[0]);
            if r != l {
                return Err(Error::ShapeMismatch(format!(
                    "link between sites {k} and {} has extents {r} and {l}",
                    k + 1
                )));
            }
        }
        if let Some(c) = center {
            if c >= n {
                return Err(Error::SiteOutOfRange { index: c, len: n });
            }
        }
        Ok(Self {
            sites,
            center,
            phys_dim,
        })
    }

    /// Product state from one local vector per site; each is normalized.
    pub fn product_state(locals: &[Vec<C64>]) -> Result<Self> {
        let sites = locals
            .iter()
            .map(|v| {
                let t = DenseTensor::vector(v.clone());
                let norm = t.frobenius_norm();
                if norm == 0.0 {
                    return Err(Error::AllZero);
                }
                t.scale(real(1.0 / norm)).reshape(&[1, v.len(), 1])
            })
            .collect::<Result<Vec<_>>>()?;
        let n = sites.len();
        Self::from_sites(sites, Some(n.saturating_sub(1)))
    }

    /// Normalized random MPS with bond dimensions `min(chi, d^k, d^(n-k))`.
    pub fn random<R: Rng + ?Sized>(n: usize, d: usize, chi: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || d == 0 || chi == 0 {
            return Err(Error::InvalidArgument("n, d and chi must be positive".into()));
        }
        let bond = |k: usize| -> usize {
            // extent of the link left of site k
            if k == 0 || k == n {
                return 1;
            }
            let cap = |p: usize| d.checked_pow(p as u32).unwrap_or(usize::MAX);
            chi.min(cap(k)).min(cap(n - k))
        };
        let sites = (0..n)
            .map(|k| random::complex_tensor(&[bond(k), d, bond(k + 1)], rng))
            .collect();
        let mut m = Self::from_sites(sites, None)?;
        m.canonicalize_in_place(n - 1, &TruncationSpec::unlimited())?;
        m.normalize_in_place()?;
        Ok(m)
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

    pub fn center(&self) -> Option<usize> {
        self.center
    }

    pub fn sites(&self) -> &[DenseTensor] {
        &self.sites
    }

    pub fn site(&self, k: usize) -> &DenseTensor {
        &self.sites[k]
    }

    /// Extents of the `N - 1` internal links.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.len() - 1].iter().map(|t| t.shape()[2]).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    fn check_site(&self, k: usize) -> Result<()> {
        if k >= self.len() {
            return Err(Error::SiteOutOfRange {
                index: k,
                len: self.len(),
            });
        }
        Ok(())
    }

    fn check_operator(&self, op: &DenseTensor) -> Result<()> {
        if op.shape() != [self.phys_dim, self.phys_dim] {
            return Err(Error::ShapeMismatch(format!(
                "operator shape {:?} does not act on physical extent {}",
                op.shape(),
                self.phys_dim
            )));
        }
        Ok(())
    }

    /// Full contraction into a vector of length `d^N`.
    pub fn to_state_vector(&self) -> Result<DenseTensor> {
        let dim = (0..self.len()).try_fold(1usize, |acc, _| acc.checked_mul(self.phys_dim));
        match dim {
            Some(dim) if dim <= MAX_STATE_DIM => {}
            _ => {
                return Err(Error::TooLarge {
                    dim: dim.unwrap_or(usize::MAX),
                    limit: MAX_STATE_DIM,
                })
            }
        }
        let mut acc = self.sites[0].clone();
        for site in &self.sites[1..] {
            let r = acc.rank();
            acc = contract(&acc, &[r - 1], site, &[0])?;
        }
        let len = acc.len();
        acc.reshape(&[len])
    }

    pub fn norm_squared(&self) -> f64 {
        inner_product(self, self).map(|z| z.re).unwrap_or(f64::NAN)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().max(0.0).sqrt()
    }

    /// Rescales so that `⟨ψ|ψ⟩ = 1`; returns the previous norm.
    pub fn normalize_in_place(&mut self) -> Result<f64> {
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NumericalFailure(format!("cannot normalize a state with norm {norm}")));
        }
        let k = self.center.unwrap_or(0);
        self.sites[k] = self.sites[k].scale(real(1.0 / norm));
        Ok(norm)
    }

    pub fn normalized(&self) -> Result<Self> {
        let mut m = self.clone();
        m.normalize_in_place()?;
        Ok(m)
    }

    /// Makes site `k` left-normalized, pushing `D V^†` into site `k + 1`.
    fn left_normalize_site(&mut self, k: usize, spec: &TruncationSpec) -> Result<f64> {
        let a = &self.sites[k];
        let (l, d, r) = (a.shape()[0], a.shape()[1], a.shape()[2]);
        let s = decomp::truncated_svd(&a.clone().reshape(&[l * d, r])?, spec)?;
        let kept = s.rank();
        let dv = s.d_v_dag();
        self.sites[k] = s.u.reshape(&[l, d, kept])?;
        self.sites[k + 1] = contract(&dv, &[1], &self.sites[k + 1], &[0])?;
        Ok(s.discarded_weight)
    }

    /// Makes site `k` right-normalized, pushing `U D` into site `k - 1`.
    fn right_normalize_site(&mut self, k: usize, spec: &TruncationSpec) -> Result<f64> {
        let a = &self.sites[k];
        let (l, d, r) = (a.shape()[0], a.shape()[1], a.shape()[2]);
        let s = decomp::truncated_svd(&a.clone().reshape(&[l, d * r])?, spec)?;
        let kept = s.rank();
        let ud = s.u_d();
        self.sites[k] = s.v_dag.reshape(&[kept, d, r])?;
        self.sites[k - 1] = contract(&self.sites[k - 1], &[2], &ud, &[0])?;
        Ok(s.discarded_weight)
    }

    fn canonicalize_in_place(&mut self, target: usize, spec: &TruncationSpec) -> Result<f64> {
        let n = self.len();
        let mut lost = 0.0;
        for k in 0..n - 1 {
            lost += self.left_normalize_site(k, spec)?;
        }
        self.center = Some(n - 1);
        lost += self.move_center_in_place(target, spec)?;
        Ok(lost)
    }

    /// Shifts the orthogonality center by successive SVDs; returns the total
    /// discarded weight.
    pub fn move_center_in_place(&mut self, target: usize, spec: &TruncationSpec) -> Result<f64> {
        self.check_site(target)?;
        let Some(center) = self.center else {
            return self.canonicalize_in_place(target, spec);
        };
        let mut lost = 0.0;
        for k in center..target {
            lost += self.left_normalize_site(k, spec)?;
        }
        for k in (target + 1..=center).rev() {
            lost += self.right_normalize_site(k, spec)?;
        }
        self.center = Some(target);
        Ok(lost)
    }

    pub fn move_center(&self, target: usize, spec: &TruncationSpec) -> Result<Self> {
        let mut m = self.clone();
        m.move_center_in_place(target, spec)?;
        Ok(m)
    }

    /// `Σ_{l,σ} A*[l,σ,r'] A[l,σ,r]` for site `k`.
    pub fn left_gram(&self, k: usize) -> Result<DenseTensor> {
        self.check_site(k)?;
        let a = &self.sites[k];
        contract(&a.conj(), &[0, 1], a, &[0, 1])
    }

    /// `Σ_{σ,r} A[l,σ,r] A*[l',σ,r]` for site `k`.
    pub fn right_gram(&self, k: usize) -> Result<DenseTensor> {
        self.check_site(k)?;
        let a = &self.sites[k];
        contract(a, &[1, 2], &a.conj(), &[1, 2])
    }

    /// `⟨ψ|O_site|ψ⟩ / ⟨ψ|ψ⟩`, contracting only the center tensor.
    pub fn expect_local(&self, op: &DenseTensor, site: usize) -> Result<C64> {
        self.check_site(site)?;
        self.check_operator(op)?;
        let m = self.move_center(site, &TruncationSpec::unlimited())?;
        let a = &m.sites[site];
        let applied = contract(op, &[1], a, &[1])?;
        let numer = contract(&a.conj(), &[0, 1, 2], &applied, &[1, 0, 2])?;
        let denom: f64 = a.data().iter().map(|z| z.norm_sqr()).sum();
        Ok(numer.data()[0] / denom)
    }

    /// `⟨ψ|A_i B_j|ψ⟩ / ⟨ψ|ψ⟩` for `i < j`; only sites `i..=j` are touched.
    pub fn expect_two_site(&self, op_i: &DenseTensor, i: usize, op_j: &DenseTensor, j: usize) -> Result<C64> {
        if i >= j {
            return Err(Error::BadOrder { i, j });
        }
        self.check_site(j)?;
        self.check_operator(op_i)?;
        self.check_operator(op_j)?;
        let m = self.move_center(i, &TruncationSpec::unlimited())?;
        let a = &m.sites[i];
        let denom: f64 = a.data().iter().map(|z| z.norm_sqr()).sum();
        let l = a.shape()[0];
        let mut env = DenseTensor::identity(l);
        for k in i..=j {
            let op = if k == i {
                Some(op_i)
            } else if k == j {
                Some(op_j)
            } else {
                None
            };
            env = transfer(&env, &m.sites[k], &m.sites[k], op)?;
        }
        Ok(env.trace()? / denom)
    }

    /// Inserts `X X^{-1}` on the link right of site `bond`.
    pub fn gauge_insert(&self, bond: usize, x: &DenseTensor) -> Result<Self> {
        if bond + 1 >= self.len() {
            return Err(Error::SiteOutOfRange {
                index: bond,
                len: self.len().saturating_sub(1),
            });
        }
        let chi = self.sites[bond].shape()[2];
        if x.shape() != [chi, chi] {
            return Err(Error::ShapeMismatch(format!(
                "gauge matrix shape {:?} does not match link extent {chi}",
                x.shape()
            )));
        }
        let x_inv = decomp::inverse(x)?;
        let mut m = self.clone();
        m.sites[bond] = contract(&self.sites[bond], &[2], x, &[0])?;
        m.sites[bond + 1] = contract(&x_inv, &[1], &self.sites[bond + 1], &[0])?;
        m.center = None;
        Ok(m)
    }

    /// Applies a `d² x d²` gate to sites `(site, site + 1)` and splits the
    /// result with a truncated SVD. Gate rows and columns are indexed by
    /// `σ_site + d σ_{site+1}`. Returns the discarded weight.
    pub fn apply_gate_in_place(
        &mut self,
        gate: &DenseTensor,
        site: usize,
        spec: &TruncationSpec,
        direction: SweepDirection,
    ) -> Result<f64> {
        if site + 1 >= self.len() {
            return Err(Error::SiteOutOfRange {
                index: site + 1,
                len: self.len(),
            });
        }
        let d = self.phys_dim;
        if gate.shape() != [d * d, d * d] {
            return Err(Error::ShapeMismatch(format!(
                "gate shape {:?} for physical extent {d}",
                gate.shape()
            )));
        }
        if !matches!(self.center, Some(c) if c == site || c == site + 1) {
            self.move_center_in_place(site, &TruncationSpec::unlimited())?;
        }
        let l = self.sites[site].shape()[0];
        let r = self.sites[site + 1].shape()[2];
        let theta = contract(&self.sites[site], &[2], &self.sites[site + 1], &[0])?;
        let g = gate.clone().reshape(&[d, d, d, d])?;
        let evolved = contract(&g, &[2, 3], &theta, &[1, 2])?.permute(&[2, 0, 1, 3])?;
        let s = decomp::truncated_svd(&evolved.reshape(&[l * d, d * r])?, spec)?;
        let k = s.rank();
        match direction {
            SweepDirection::Forward => {
                self.sites[site + 1] = s.d_v_dag().reshape(&[k, d, r])?;
                self.sites[site] = s.u.reshape(&[l, d, k])?;
                self.center = Some(site + 1);
            }
            SweepDirection::Backward => {
                self.sites[site] = s.u_d().reshape(&[l, d, k])?;
                self.sites[site + 1] = s.v_dag.reshape(&[k, d, r])?;
                self.center = Some(site);
            }
        }
        Ok(s.discarded_weight)
    }

    pub fn apply_two_site_gate(
        &self,
        gate: &DenseTensor,
        site: usize,
        spec: &TruncationSpec,
        direction: SweepDirection,
    ) -> Result<(Self, f64)> {
        let mut m = self.clone();
        let lost = m.apply_gate_in_place(gate, site, spec, direction)?;
        Ok((m, lost))
    }

    /// Normalized Schmidt coefficients across the link right of site `bond`.
    pub fn schmidt_values(&self, bond: usize) -> Result<Vec<f64>> {
        if bond + 1 >= self.len() {
            return Err(Error::SiteOutOfRange {
                index: bond,
                len: self.len().saturating_sub(1),
            });
        }
        let m = self.move_center(bond, &TruncationSpec::unlimited())?;
        let a = &m.sites[bond];
        let (l, d, r) = (a.shape()[0], a.shape()[1], a.shape()[2]);
        let s = decomp::svd(&a.clone().reshape(&[l * d, r])?)?;
        let norm = s.d.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok(s.d.iter().map(|x| x / norm).collect())
    }

    /// Von Neumann entropy (base 2) across the link right of site `bond`.
    pub fn bond_entropy(&self, bond: usize) -> Result<f64> {
        decomp::entanglement_entropy(&self.schmidt_values(bond)?, true)
    }

    /// Transfer-matrix spectrum of a bulk site and `ξ = -1/ln|ε₂/ε₁|`.
    pub fn correlation_length(&self) -> Result<CorrelationReport> {
        let n = self.len();
        let m = self.move_center(n - 1, &TruncationSpec::unlimited())?;
        let zero_range = |site: usize| CorrelationReport {
            xi: 0.0,
            transfer_eigs: vec![1.0],
            fit_exponent: None,
            range: CorrelationRange::ZeroRange,
            site,
        };
        if m.max_bond() == 1 {
            return Ok(zero_range(n / 2));
        }
        // left-normalized sites are 0..n-1; prefer the middle of the chain
        let mid = (n - 1) / 2;
        let mut candidates: Vec<usize> = (0..n - 1).collect();
        candidates.sort_by_key(|&k| (k as isize - mid as isize).unsigned_abs());
        let site = candidates
            .into_iter()
            .find(|&k| {
                let s = m.sites[k].shape();
                s[0] == s[2] && s[0] >= 2
            })
            .ok_or(Error::BondTooSmall)?;
        let a = &m.sites[site];
        let chi = a.shape()[0];
        let e = contract(a, &[1], &a.conj(), &[1])?
            .permute(&[0, 2, 1, 3])?
            .reshape(&[chi * chi, chi * chi])?;
        let moduli: Vec<f64> = decomp::eigenvalues_general(&e)?.iter().map(|z| z.norm()).collect();
        let (e1, e2) = (moduli[0], moduli[1]);
        if e1 == 0.0 {
            return Err(Error::NumericalFailure("transfer matrix is nilpotent".into()));
        }
        let ratio = e2 / e1;
        let (xi, range) = if ratio <= 1e-14 {
            (0.0, CorrelationRange::ZeroRange)
        } else if ratio >= 1.0 - 1e-12 {
            (f64::INFINITY, CorrelationRange::Infinite)
        } else {
            (-1.0 / ratio.ln(), CorrelationRange::Finite)
        };
        Ok(CorrelationReport {
            xi,
            transfer_eigs: moduli,
            fit_exponent: None,
            range,
            site,
        })
    }
}

/// One step of a left-to-right zipper: `E'[r',r] = Σ conj(bra[l',σ',r']) O[σ',σ] E[l',l] ket[l,σ,r]`.
fn transfer(env: &DenseTensor, bra: &DenseTensor, ket: &DenseTensor, op: Option<&DenseTensor>) -> Result<DenseTensor> {
    let x = contract(env, &[1], ket, &[0])?;
    let x = match op {
        Some(op) => contract(op, &[1], &x, &[1])?.permute(&[1, 0, 2])?,
        None => x,
    };
    contract(&bra.conj(), &[0, 1], &x, &[0, 1])
}

/// Column-major reshape and truncated SVD sweep from left to right. The
/// final orthogonality center is site `n - 1`.
pub fn mps_from_state_vector(psi: &DenseTensor, d: usize, n: usize, spec: &TruncationSpec) -> Result<Mps> {
    check_state(psi, d, n)?;
    let mut sites = Vec::with_capacity(n);
    let mut rest = psi.clone();
    let mut left = 1;
    for _ in 0..n - 1 {
        let rows = left * d;
        let cols = rest.len() / rows;
        let s = decomp::truncated_svd(&rest.reshape(&[rows, cols])?, spec)?;
        let k = s.rank();
        rest = s.d_v_dag();
        sites.push(s.u.reshape(&[left, d, k])?);
        left = k;
    }
    sites.push(rest.reshape(&[left, d, 1])?);
    Mps::from_sites(sites, Some(n - 1))
}

/// The same factorization built from the right end; center at site 0.
pub fn mps_from_state_vector_right_to_left(
    psi: &DenseTensor,
    d: usize,
    n: usize,
    spec: &TruncationSpec,
) -> Result<Mps> {
    check_state(psi, d, n)?;
    let mut sites = Vec::with_capacity(n);
    let mut rest = psi.clone();
    let mut right = 1;
    for _ in 0..n - 1 {
        let cols = d * right;
        let rows = rest.len() / cols;
        let s = decomp::truncated_svd(&rest.reshape(&[rows, cols])?, spec)?;
        let k = s.rank();
        rest = s.u_d();
        sites.push(s.v_dag.reshape(&[k, d, right])?);
        right = k;
    }
    sites.push(rest.reshape(&[1, d, right])?);
    sites.reverse();
    Mps::from_sites(sites, Some(0))
}

fn check_state(psi: &DenseTensor, d: usize, n: usize) -> Result<()> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("n and d must be positive".into()));
    }
    let expected = d.checked_pow(n as u32).ok_or(Error::TooLarge {
        dim: usize::MAX,
        limit: MAX_STATE_DIM,
    })?;
    if psi.rank() != 1 || psi.len() != expected {
        return Err(Error::BadLength {
            expected,
            found: psi.len(),
        });
    }
    let norm = psi.frobenius_norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm));
    }
    Ok(())
}

/// `⟨a|b⟩` by a left-to-right zipper, cost `O(N d χ³)`.
pub fn inner_product(a: &Mps, b: &Mps) -> Result<C64> {
    if a.len() != b.len() || a.phys_dim != b.phys_dim {
        return Err(Error::ShapeMismatch(format!(
            "MPS of {} sites (d={}) vs {} sites (d={})",
            a.len(),
            a.phys_dim,
            b.len(),
            b.phys_dim
        )));
    }
    let mut env = DenseTensor::identity(1);
    for (bra, ket) in a.sites.iter().zip(&b.sites) {
        env = transfer(&env, bra, ket, None)?;
    }
    Ok(env.data()[0])
}
