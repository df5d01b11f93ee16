//! Matrix decompositions: SVD (full and truncated), Hermitian
//! eigendecomposition, von Neumann entropy of a singular-value spectrum, and
//! the single-tensor unitary update `W = V U^†` that maximises `Re Tr(W Γ)`.
//!
//! The SVD goes straight through a bidiagonalisation routine; `M M^†` is never
//! formed. Real inputs are routed to the real kernels.

use faer::{MatRef, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;
use crate::C64;

/// Singular values below this fraction of the largest are treated as zero.
pub const ZERO_SINGULAR_VALUE: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `a x m` isometry.
    pub u: DenseTensor,
    /// Singular values, descending.
    pub d: Vec<f64>,
    /// `m x b` isometry.
    pub v_dag: DenseTensor,
    /// Sum of the squared singular values that were dropped.
    pub discarded_weight: f64,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.d.len()
    }

    /// `U diag(d) V^†`.
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        self.u.matmul(&self.d_v_dag())
    }

    /// `diag(d) V^†`, the factor absorbed into the next tensor of a sweep.
    pub fn d_v_dag(&self) -> DenseTensor {
        let m = self.d.len();
        DenseTensor::from_fn(self.v_dag.shape(), |ix| self.v_dag.get(ix) * self.d[ix[0] % m])
    }

    /// `U diag(d)`.
    pub fn u_d(&self) -> DenseTensor {
        DenseTensor::from_fn(self.u.shape(), |ix| self.u.get(ix) * self.d[ix[1]])
    }
}

#[derive(Debug, Clone)]
pub struct EigResult {
    /// Unitary whose columns are eigenvectors.
    pub u: DenseTensor,
    /// Eigenvalues, ascending.
    pub omega: Vec<f64>,
}

/// Bond-dimension cap and discarded-weight cutoff for every truncated SVD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    /// `None` keeps every non-zero singular value.
    pub chi_max: Option<usize>,
    /// Largest admissible discarded weight, relative to the total weight.
    pub cutoff: f64,
    /// Relative gap below which neighbouring singular values count as degenerate.
    pub degeneracy_tol: f64,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self {
            chi_max: None,
            cutoff: 0.0,
            degeneracy_tol: 1e-12,
        }
    }
}

impl TruncationSpec {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn with_chi(chi_max: usize) -> Self {
        Self {
            chi_max: Some(chi_max),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chi_max == Some(0) {
            return Err(Error::InvalidArgument("chi_max must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.cutoff) {
            return Err(Error::InvalidArgument(format!(
                "cutoff must lie in [0, 1), got {}",
                self.cutoff
            )));
        }
        if !(self.degeneracy_tol >= 0.0) {
            return Err(Error::InvalidArgument("degeneracy_tol must be non-negative".into()));
        }
        Ok(())
    }

    /// Number of singular values to keep from a descending spectrum.
    pub fn kept(&self, d: &[f64]) -> usize {
        let Some(&largest) = d.first() else {
            return 0;
        };
        let nonzero = d
            .iter()
            .take_while(|&&x| x > ZERO_SINGULAR_VALUE * largest)
            .count()
            .max(1);
        let total: f64 = d[..nonzero].iter().map(|x| x * x).sum();
        let allowed = self.cutoff * total;

        // Smallest k whose tail weight fits under the cutoff.
        let mut k = nonzero;
        let mut tail = 0.0;
        while k > 1 {
            let next = tail + d[k - 1] * d[k - 1];
            if next > allowed {
                break;
            }
            tail = next;
            k -= 1;
        }
        // Do not split a degenerate multiplet on the cutoff criterion.
        while k < nonzero && d[k - 1] - d[k] <= self.degeneracy_tol * largest {
            k += 1;
        }
        match self.chi_max {
            Some(chi) => k.min(chi),
            None => k,
        }
    }
}

fn check_rank2(m: &DenseTensor) -> Result<()> {
    if m.rank() != 2 {
        return Err(Error::RankUnsupported(m.rank()));
    }
    Ok(())
}

/// Full thin SVD, `m = min(a, b)` singular values in descending order.
pub fn svd(m: &DenseTensor) -> Result<SvdResult> {
    check_rank2(m)?;
    if m.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericalFailure("non-finite matrix entry".into()));
    }
    let (rows, cols) = (m.nrows(), m.ncols());
    let (u, d, v_dag) = if m.is_real() {
        let re = m.real_parts();
        let mat = MatRef::from_column_major_slice(&re, rows, cols);
        let svd = mat
            .thin_svd()
            .map_err(|e| Error::NumericalFailure(format!("svd: {e:?}")))?;
        let d: Vec<f64> = svd.S().column_vector().iter().copied().collect();
        let v_dag = DenseTensor::from_real_mat(svd.V().transpose());
        (DenseTensor::from_real_mat(svd.U()), d, v_dag)
    } else {
        let svd = m
            .as_mat()
            .thin_svd()
            .map_err(|e| Error::NumericalFailure(format!("svd: {e:?}")))?;
        let d: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
        let v_dag = DenseTensor::from_mat(svd.V()).dagger()?;
        (DenseTensor::from_mat(svd.U()), d, v_dag)
    };
    let result = sort_descending(u, d, v_dag);
    Ok(result)
}

fn sort_descending(u: DenseTensor, d: Vec<f64>, v_dag: DenseTensor) -> SvdResult {
    let sorted = d.windows(2).all(|w| w[0] >= w[1]);
    if sorted {
        return SvdResult {
            u,
            d,
            v_dag,
            discarded_weight: 0.0,
        };
    }
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
    let u = DenseTensor::from_fn(u.shape(), |ix| u.get(&[ix[0], order[ix[1]]]));
    let v_dag = DenseTensor::from_fn(v_dag.shape(), |ix| v_dag.get(&[order[ix[0]], ix[1]]));
    let d = order.iter().map(|&k| d[k]).collect();
    SvdResult {
        u,
        d,
        v_dag,
        discarded_weight: 0.0,
    }
}

/// Keeps the `k` largest singular values allowed by `spec`.
pub fn truncated_svd(m: &DenseTensor, spec: &TruncationSpec) -> Result<SvdResult> {
    spec.validate()?;
    let full = svd(m)?;
    Ok(truncate(full, spec))
}

/// Applies `spec` to an already computed decomposition.
pub fn truncate(full: SvdResult, spec: &TruncationSpec) -> SvdResult {
    let k = spec.kept(&full.d);
    if k == full.d.len() {
        return full;
    }
    let largest = full.d[0];
    let discarded_weight = full.d[k..]
        .iter()
        .filter(|&&x| x > ZERO_SINGULAR_VALUE * largest)
        .map(|x| x * x)
        .sum();
    let rows = full.u.nrows();
    let cols = full.v_dag.ncols();
    let u = DenseTensor::from_fn(&[rows, k], |ix| full.u.get(ix));
    let v_dag = DenseTensor::from_fn(&[k, cols], |ix| full.v_dag.get(ix));
    SvdResult {
        u,
        d: full.d[..k].to_vec(),
        v_dag,
        discarded_weight,
    }
}

/// Largest deviation `|M - M^†|` relative to the largest entry.
fn hermiticity_defect(m: &DenseTensor) -> f64 {
    let n = m.nrows();
    let scale = m.max_abs().max(1.0);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m.get(&[i, j]) - m.get(&[j, i]).conj()).norm());
        }
    }
    worst / scale
}

/// `M = U Ω U^†` for Hermitian `M`; eigenvalues ascending.
pub fn eig_hermitian(m: &DenseTensor) -> Result<EigResult> {
    check_rank2(m)?;
    let (rows, cols) = (m.nrows(), m.ncols());
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let defect = hermiticity_defect(m);
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    let (u, omega) = if m.is_real() {
        let re = m.real_parts();
        let eig = MatRef::from_column_major_slice(&re, rows, cols)
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::NumericalFailure(format!("eigh: {e:?}")))?;
        let omega: Vec<f64> = eig.S().column_vector().iter().copied().collect();
        (DenseTensor::from_real_mat(eig.U()), omega)
    } else {
        let eig = m
            .as_mat()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::NumericalFailure(format!("eigh: {e:?}")))?;
        let omega: Vec<f64> = eig.S().column_vector().iter().map(|z| z.re).collect();
        (DenseTensor::from_mat(eig.U()), omega)
    };
    if omega.windows(2).all(|w| w[0] <= w[1]) {
        return Ok(EigResult { u, omega });
    }
    let mut order: Vec<usize> = (0..omega.len()).collect();
    order.sort_by(|&a, &b| omega[a].total_cmp(&omega[b]));
    let u = DenseTensor::from_fn(u.shape(), |ix| u.get(&[ix[0], order[ix[1]]]));
    Ok(EigResult {
        u,
        omega: order.iter().map(|&k| omega[k]).collect(),
    })
}

/// `f(M) = U f(Ω) U^†` for Hermitian `M`.
pub fn hermitian_function(m: &DenseTensor, f: impl Fn(f64) -> C64) -> Result<DenseTensor> {
    let eig = eig_hermitian(m)?;
    let scaled = DenseTensor::from_fn(eig.u.shape(), |ix| eig.u.get(ix) * f(eig.omega[ix[1]]));
    scaled.matmul(&eig.u.dagger()?)
}

/// All eigenvalues of a general square matrix, sorted by descending modulus.
pub fn eigenvalues_general(m: &DenseTensor) -> Result<Vec<C64>> {
    check_rank2(m)?;
    let (rows, cols) = (m.nrows(), m.ncols());
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let mut values: Vec<C64> = if m.is_real() {
        let re = m.real_parts();
        MatRef::from_column_major_slice(&re, rows, cols)
            .eigenvalues()
            .map_err(|e| Error::NumericalFailure(format!("eigenvalues: {e:?}")))?
    } else {
        m.as_mat()
            .eigenvalues()
            .map_err(|e| Error::NumericalFailure(format!("eigenvalues: {e:?}")))?
    };
    values.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(values)
}

/// Von Neumann entropy `S = -Σ ρ_i log2 ρ_i` with `ρ_i = λ_i^2`.
///
/// With `normalize` the weights are divided by `Σ λ_j^2` first. Values below
/// [`ZERO_SINGULAR_VALUE`] times the largest are dropped.
pub fn entanglement_entropy(d: &[f64], normalize: bool) -> Result<f64> {
    if d.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "singular values must be finite and non-negative".into(),
        ));
    }
    let largest = d.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 {
        return Err(Error::AllZero);
    }
    let kept: Vec<f64> = d
        .iter()
        .copied()
        .filter(|&x| x > ZERO_SINGULAR_VALUE * largest)
        .collect();
    let weight: f64 = if normalize {
        kept.iter().map(|x| x * x).sum()
    } else {
        1.0
    };
    let s = kept
        .iter()
        .map(|x| x * x / weight)
        .filter(|&rho| rho > 0.0)
        .map(|rho| -rho * rho.log2())
        .sum::<f64>();
    Ok(s.max(0.0))
}

/// Unitary `W = V U^†` built from `Γ = U D V^†`; `Tr(W Γ) = Σ λ_i`.
pub fn mera_update(gamma: &DenseTensor) -> Result<DenseTensor> {
    check_rank2(gamma)?;
    if gamma.nrows() != gamma.ncols() {
        return Err(Error::NotSquare {
            rows: gamma.nrows(),
            cols: gamma.ncols(),
        });
    }
    let s = svd(gamma)?;
    s.v_dag.dagger()?.matmul(&s.u.dagger()?)
}

/// Inverse through the SVD; fails when the condition number exceeds `1/1e-13`.
pub fn inverse(m: &DenseTensor) -> Result<DenseTensor> {
    check_rank2(m)?;
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let s = svd(m)?;
    let largest = s.d[0];
    if largest == 0.0 || s.d.iter().any(|&x| x <= 1e-13 * largest) {
        return Err(Error::Singular);
    }
    let v = s.v_dag.dagger()?;
    let v_scaled = DenseTensor::from_fn(v.shape(), |ix| v.get(ix) / s.d[ix[1]]);
    v_scaled.matmul(&s.u.dagger()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn state_matrix(amplitudes: [f64; 4]) -> DenseTensor {
        DenseTensor::from_real(&[4], &amplitudes).unwrap().reshape(&[2, 2]).unwrap()
    }

    #[test]
    fn product_state_has_one_singular_value() {
        // (|uu> + |du>)/sqrt2 in site-0-fastest order: up=0, down=1.
        let m = state_matrix([FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0]);
        let s = svd(&m).unwrap();
        assert!((s.d[0] - 1.0).abs() < 1e-12);
        assert!(s.d[1].abs() < 1e-12);
        assert_eq!(entanglement_entropy(&s.d, false).unwrap(), 0.0);
    }

    #[test]
    fn identity_singular_values() {
        let s = svd(&DenseTensor::identity(3)).unwrap();
        for x in s.d {
            assert!((x - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rectangular_shapes() {
        let m = DenseTensor::from_fn(&[2, 5], |ix| C64::new(ix[0] as f64 + 1.0, ix[1] as f64));
        let s = svd(&m).unwrap();
        assert_eq!(s.u.shape(), &[2, 2]);
        assert_eq!(s.v_dag.shape(), &[2, 5]);
        let err = s.reconstruct().unwrap().sub(&m).unwrap().frobenius_norm();
        assert!(err < 1e-12);
    }

    #[test]
    fn svd_rejects_rank3() {
        assert_eq!(svd(&DenseTensor::zeros(&[2, 2, 2])).unwrap_err(), Error::RankUnsupported(3));
    }

    #[test]
    fn unentangled_truncation_is_exact() {
        let m = state_matrix([FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0]);
        let s = truncated_svd(&m, &TruncationSpec::with_chi(1)).unwrap();
        assert_eq!(s.rank(), 1);
        assert_eq!(s.discarded_weight, 0.0);
        assert!(s.reconstruct().unwrap().sub(&m).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn bell_state_truncation_loses_half() {
        let m = state_matrix([FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]);
        let s = truncated_svd(&m, &TruncationSpec::with_chi(1)).unwrap();
        let kept: f64 = s.d.iter().map(|x| x * x).sum();
        assert!((kept - 0.5).abs() < 1e-14);
        assert!((s.discarded_weight - 0.5).abs() < 1e-14);
        let err = s.reconstruct().unwrap().sub(&m).unwrap().frobenius_norm();
        assert!((err * err - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cutoff_drops_small_tail() {
        let spec = TruncationSpec {
            cutoff: 0.02,
            ..TruncationSpec::default()
        };
        // weights 0.81, 0.18, 0.01: the last one fits under 2 %.
        assert_eq!(spec.kept(&[0.9, 0.18f64.sqrt(), 0.1]), 2);
        assert_eq!(TruncationSpec::default().kept(&[0.9, 0.18f64.sqrt(), 0.1]), 3);
    }

    #[test]
    fn degenerate_pair_kept_together() {
        let spec = TruncationSpec {
            cutoff: 0.2,
            ..TruncationSpec::default()
        };
        let d = [0.8, 0.3, 0.3, 0.1];
        // cutoff alone would cut between the two 0.3 values
        assert_eq!(spec.kept(&d), 3);
        let capped = TruncationSpec {
            chi_max: Some(2),
            ..spec
        };
        assert_eq!(capped.kept(&d), 2);
    }

    #[test]
    fn truncation_spec_validation() {
        assert!(TruncationSpec::with_chi(0).validate().is_err());
        let bad = TruncationSpec {
            cutoff: 1.0,
            ..TruncationSpec::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn eig_of_diagonal() {
        let m = DenseTensor::real_matrix(&[&[3.0, 0.0], &[0.0, 1.0]]).unwrap();
        let e = eig_hermitian(&m).unwrap();
        assert_eq!(e.omega.len(), 2);
        assert!((e.omega[0] - 1.0).abs() < 1e-14 && (e.omega[1] - 3.0).abs() < 1e-14);
        assert!((e.u.get(&[1, 0]).norm() - 1.0).abs() < 1e-14);
        assert!((e.u.get(&[0, 1]).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_of_sz() {
        let sz = DenseTensor::real_matrix(&[&[0.5, 0.0], &[0.0, -0.5]]).unwrap();
        let e = eig_hermitian(&sz).unwrap();
        assert!((e.omega[0] + 0.5).abs() < 1e-15 && (e.omega[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eig_errors() {
        let rect = DenseTensor::zeros(&[2, 3]);
        assert_eq!(eig_hermitian(&rect).unwrap_err(), Error::NotSquare { rows: 2, cols: 3 });
        let skew = DenseTensor::matrix(&[&[c(0.0), c(1.0)], &[c(0.0), c(0.0)]]).unwrap();
        assert!(matches!(eig_hermitian(&skew), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entanglement_entropy(&[1.0, 0.0], false).unwrap(), 0.0);
        let bell = entanglement_entropy(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], false).unwrap();
        assert!((bell - 1.0).abs() < 1e-15);
        let four = entanglement_entropy(&[0.5; 4], false).unwrap();
        assert!((four - 2.0).abs() < 1e-15);
        let unnormalized = entanglement_entropy(&[3.0, 3.0], true).unwrap();
        assert!((unnormalized - 1.0).abs() < 1e-15);
        assert_eq!(entanglement_entropy(&[0.0, 0.0], true).unwrap_err(), Error::AllZero);
    }

    #[test]
    fn mera_update_trivial_cases() {
        let w = mera_update(&DenseTensor::identity(3)).unwrap();
        assert!(w.sub(&DenseTensor::identity(3)).unwrap().frobenius_norm() < 1e-14);
        let gamma = DenseTensor::real_matrix(&[&[2.0, 0.0], &[0.0, 3.0]]).unwrap();
        let w = mera_update(&gamma).unwrap();
        assert!(w.sub(&DenseTensor::identity(2)).unwrap().frobenius_norm() < 1e-14);
        let tr = w.matmul(&gamma).unwrap().trace().unwrap();
        assert!((tr - c(5.0)).norm() < 1e-14);
    }

    #[test]
    fn inverse_round_trip_and_singular() {
        let m = DenseTensor::real_matrix(&[&[2.0, 1.0], &[1.0, 3.0]]).unwrap();
        let inv = inverse(&m).unwrap();
        let id = m.matmul(&inv).unwrap();
        assert!(id.sub(&DenseTensor::identity(2)).unwrap().frobenius_norm() < 1e-14);
        let sing = DenseTensor::real_matrix(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert_eq!(inverse(&sing).unwrap_err(), Error::Singular);
    }

    #[test]
    fn general_eigenvalues_sorted_by_modulus() {
        let m = DenseTensor::real_matrix(&[&[0.5, 0.0], &[0.0, -2.0]]).unwrap();
        let ev = eigenvalues_general(&m).unwrap();
        assert!((ev[0] - c(-2.0)).norm() < 1e-14);
        assert!((ev[1] - c(0.5)).norm() < 1e-14);
    }
}
