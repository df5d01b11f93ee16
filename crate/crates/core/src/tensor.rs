//! Dense tensors and the primitive operations every algorithm is built from:
//! reshape, permute and contract, plus the Kronecker product and direct sum.
//!
//! Storage is first-index-fastest. For a tensor of shape `(w_0, w_1, w_2, ...)`
//! the element at the 0-based multi-index `(i_0, i_1, i_2, ...)` lives at
//! linear position `i_0 + w_0 * (i_1 + w_1 * (i_2 + ...))`. Written with
//! 1-based indices this is the familiar `x + w_x((y-1) + w_y(z-1))` rule, so
//! a reshape never moves data: only the shape vector changes.
//!
//! ```text
//!   reshape   (10,5,20) -> (2,5,5,10,2)      metadata only
//!   permute   (a,b,c,d) -> (d,a,b,c)          physical copy
//!   contract  A[i,j] B[j,k] -> C[i,k]         permute + reshape + GEMM
//! ```

use std::fmt;

use faer::linalg::matmul::matmul;
use faer::{Accum, MatMut, MatRef, Par};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Rank-r array of complex scalars with an explicit shape.
#[derive(Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl fmt::Debug for DenseTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseTensor")
            .field("shape", &self.shape)
            .field("len", &self.data.len())
            .finish()
    }
}

fn element_count(shape: &[usize]) -> usize {
    shape.iter().product()
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if let Some(&bad) = shape.iter().find(|&&w| w == 0) {
            return Err(Error::InvalidArgument(format!(
                "tensor extents must be positive, got {bad} in {shape:?}"
            )));
        }
        let expected = element_count(&shape);
        if data.len() != expected {
            return Err(Error::ElementCountMismatch {
                expected,
                found: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        assert!(shape.iter().all(|&w| w > 0), "zero extent in {shape:?}");
        Self {
            shape: shape.to_vec(),
            data: vec![C64::new(0.0, 0.0); element_count(shape)],
        }
    }

    pub fn scalar(value: C64) -> Self {
        Self {
            shape: Vec::new(),
            data: vec![value],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(&[n, n], |ix| {
            if ix[0] == ix[1] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_real(shape: &[usize], values: &[f64]) -> Result<Self> {
        Self::new(
            shape.to_vec(),
            values.iter().map(|&x| C64::new(x, 0.0)).collect(),
        )
    }

    /// Builds a tensor by evaluating `f` at every multi-index, in storage order.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let n = element_count(shape);
        let mut data = Vec::with_capacity(n);
        let mut index = vec![0usize; shape.len()];
        for _ in 0..n {
            data.push(f(&index));
            for (axis, slot) in index.iter_mut().enumerate() {
                *slot += 1;
                if *slot < shape[axis] {
                    break;
                }
                *slot = 0;
            }
        }
        Self {
            shape: shape.to_vec(),
            data,
        }
    }

    /// Complex matrix from row-major nested slices; handy for literals.
    pub fn matrix(rows: &[&[C64]]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if m == 0 || n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("ragged or empty matrix literal".into()));
        }
        Ok(Self::from_fn(&[m, n], |ix| rows[ix[0]][ix[1]]))
    }

    /// Real matrix from row-major nested slices.
    pub fn real_matrix(rows: &[&[f64]]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if m == 0 || n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("ragged or empty matrix literal".into()));
        }
        Ok(Self::from_fn(&[m, n], |ix| C64::new(rows[ix[0]][ix[1]], 0.0)))
    }

    pub fn vector(values: Vec<C64>) -> Self {
        Self {
            shape: vec![values.len()],
            data: values,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    /// Linear storage position of a 0-based multi-index.
    pub fn linear_index(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.shape.len(), "index rank mismatch");
        let mut pos = 0;
        for (axis, (&i, &w)) in index.iter().zip(&self.shape).enumerate().rev() {
            assert!(i < w, "index {i} out of range on axis {axis}");
            pos = pos * w + i;
        }
        pos
    }

    pub fn get(&self, index: &[usize]) -> C64 {
        self.data[self.linear_index(index)]
    }

    pub fn nrows(&self) -> usize {
        self.shape[0]
    }

    pub fn ncols(&self) -> usize {
        self.shape[1]
    }

    /// Reinterprets the data with a new shape. No element moves.
    pub fn reshape(self, new_shape: &[usize]) -> Result<Self> {
        let expected = element_count(&self.shape);
        let found = element_count(new_shape);
        if expected != found || new_shape.contains(&0) {
            return Err(Error::ElementCountMismatch { expected, found });
        }
        Ok(Self {
            shape: new_shape.to_vec(),
            data: self.data,
        })
    }

    /// Output axis `k` is input axis `perm[k]`. Always copies.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let rank = self.rank();
        check_permutation(perm, rank)?;
        let mut in_strides = vec![1usize; rank];
        for k in 1..rank {
            in_strides[k] = in_strides[k - 1] * self.shape[k - 1];
        }
        let out_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
        let n = self.data.len();
        let mut data = Vec::with_capacity(n);
        if rank == 0 {
            data.push(self.data[0]);
            return Ok(Self {
                shape: out_shape,
                data,
            });
        }
        let inner = out_shape[0];
        let inner_stride = strides[0];
        let mut counter = vec![0usize; rank];
        let mut base = 0usize;
        for _ in 0..n / inner {
            for i in 0..inner {
                data.push(self.data[base + i * inner_stride]);
            }
            for axis in 1..rank {
                counter[axis] += 1;
                base += strides[axis];
                if counter[axis] < out_shape[axis] {
                    break;
                }
                base -= strides[axis] * out_shape[axis];
                counter[axis] = 0;
            }
        }
        Ok(Self {
            shape: out_shape,
            data,
        })
    }

    /// Square root of the sum of squared moduli.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, factor: C64) -> Self {
        self.map(|z| z * factor)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Conjugate transpose of a matrix.
    pub fn dagger(&self) -> Result<Self> {
        if self.rank() != 2 {
            return Err(Error::RankUnsupported(self.rank()));
        }
        Ok(self.permute(&[1, 0])?.conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.rank() != 2 || other.rank() != 2 {
            return Err(Error::RankUnsupported(self.rank().max(other.rank())));
        }
        contract(self, &[1], other, &[0])
    }

    pub fn trace(&self) -> Result<C64> {
        if self.rank() != 2 {
            return Err(Error::RankUnsupported(self.rank()));
        }
        if self.nrows() != self.ncols() {
            return Err(Error::NotSquare {
                rows: self.nrows(),
                cols: self.ncols(),
            });
        }
        Ok((0..self.nrows()).map(|i| self.get(&[i, i])).sum())
    }

    /// Inner product `<self|other>` of the flattened data.
    pub fn dot(&self, other: &Self) -> Result<C64> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub(crate) fn as_mat(&self) -> MatRef<'_, C64> {
        debug_assert_eq!(self.rank(), 2);
        MatRef::from_column_major_slice(&self.data, self.shape[0], self.shape[1])
    }

    pub(crate) fn from_mat(mat: MatRef<'_, C64>) -> Self {
        let (m, n) = (mat.nrows(), mat.ncols());
        let mut data = Vec::with_capacity(m * n);
        for j in 0..n {
            data.extend(mat.col(j).iter().copied());
        }
        Self {
            shape: vec![m, n],
            data,
        }
    }

    pub(crate) fn from_real_mat(mat: MatRef<'_, f64>) -> Self {
        let (m, n) = (mat.nrows(), mat.ncols());
        let mut data = Vec::with_capacity(m * n);
        for j in 0..n {
            data.extend(mat.col(j).iter().map(|&x| C64::new(x, 0.0)));
        }
        Self {
            shape: vec![m, n],
            data,
        }
    }

    pub(crate) fn real_parts(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }
}

fn check_permutation(perm: &[usize], rank: usize) -> Result<()> {
    let mut seen = vec![false; rank];
    if perm.len() != rank {
        return Err(Error::InvalidPermutation {
            perm: perm.to_vec(),
            rank,
        });
    }
    for &p in perm {
        if p >= rank || seen[p] {
            return Err(Error::InvalidPermutation {
                perm: perm.to_vec(),
                rank,
            });
        }
        seen[p] = true;
    }
    Ok(())
}

fn check_axes(axes: &[usize], rank: usize) -> Result<()> {
    let mut seen = vec![false; rank];
    for &axis in axes {
        if axis >= rank || seen[axis] {
            return Err(Error::InvalidAxis { axis, rank });
        }
        seen[axis] = true;
    }
    Ok(())
}

/// Cost model for [`contract`]: the product of the extents of every distinct
/// index taking part, open and contracted. This is the number of iterations of
/// the equivalent nested-loop sum.
pub fn contraction_cost(
    a_shape: &[usize],
    axes_a: &[usize],
    b_shape: &[usize],
    axes_b: &[usize],
) -> Result<u128> {
    check_axes(axes_a, a_shape.len())?;
    check_axes(axes_b, b_shape.len())?;
    if axes_a.len() != axes_b.len() {
        return Err(Error::InvalidArgument(format!(
            "{} axes of a paired with {} axes of b",
            axes_a.len(),
            axes_b.len()
        )));
    }
    for (&ia, &ib) in axes_a.iter().zip(axes_b) {
        if a_shape[ia] != b_shape[ib] {
            return Err(Error::ExtentMismatch {
                left: a_shape[ia],
                right: b_shape[ib],
            });
        }
    }
    let all_a: u128 = a_shape.iter().map(|&w| w as u128).product();
    let free_b: u128 = b_shape
        .iter()
        .enumerate()
        .filter(|(k, _)| !axes_b.contains(k))
        .map(|(_, &w)| w as u128)
        .product();
    Ok(all_a * free_b)
}

/// Sums over the paired axes `axes_a[k] <-> axes_b[k]`. The result carries the
/// free axes of `a` followed by the free axes of `b`, each in original order.
/// An empty axis list gives the outer product.
pub fn contract(a: &DenseTensor, axes_a: &[usize], b: &DenseTensor, axes_b: &[usize]) -> Result<DenseTensor> {
    contraction_cost(a.shape(), axes_a, b.shape(), axes_b)?;

    let free_a: Vec<usize> = (0..a.rank()).filter(|k| !axes_a.contains(k)).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|k| !axes_b.contains(k)).collect();

    let perm_a: Vec<usize> = free_a.iter().chain(axes_a).copied().collect();
    let perm_b: Vec<usize> = axes_b.iter().chain(&free_b).copied().collect();

    let m: usize = free_a.iter().map(|&k| a.shape[k]).product();
    let n: usize = free_b.iter().map(|&k| b.shape[k]).product();
    let inner: usize = axes_a.iter().map(|&k| a.shape[k]).product();

    let a_owned;
    let a_data = if is_identity(&perm_a) {
        &a.data
    } else {
        a_owned = a.permute(&perm_a)?;
        &a_owned.data
    };
    let b_owned;
    let b_data = if is_identity(&perm_b) {
        &b.data
    } else {
        b_owned = b.permute(&perm_b)?;
        &b_owned.data
    };

    let data = gemm(a_data, m, inner, b_data, n);
    let shape = free_a
        .iter()
        .map(|&k| a.shape[k])
        .chain(free_b.iter().map(|&k| b.shape[k]))
        .collect();
    Ok(DenseTensor { shape, data })
}

/// [`contract`] together with its [`contraction_cost`].
pub fn contract_counted(
    a: &DenseTensor,
    axes_a: &[usize],
    b: &DenseTensor,
    axes_b: &[usize],
) -> Result<(DenseTensor, u128)> {
    let cost = contraction_cost(a.shape(), axes_a, b.shape(), axes_b)?;
    Ok((contract(a, axes_a, b, axes_b)?, cost))
}

fn is_identity(perm: &[usize]) -> bool {
    perm.iter().enumerate().all(|(k, &p)| k == p)
}

/// Column-major `(m x k) * (k x n)`. Real operands take the real kernel.
fn gemm(a: &[C64], m: usize, k: usize, b: &[C64], n: usize) -> Vec<C64> {
    let real = a.iter().all(|z| z.im == 0.0) && b.iter().all(|z| z.im == 0.0);
    if real {
        let ar: Vec<f64> = a.iter().map(|z| z.re).collect();
        let br: Vec<f64> = b.iter().map(|z| z.re).collect();
        let mut out = vec![0.0f64; m * n];
        matmul(
            MatMut::from_column_major_slice_mut(&mut out, m, n),
            Accum::Replace,
            MatRef::from_column_major_slice(&ar, m, k),
            MatRef::from_column_major_slice(&br, k, n),
            1.0,
            Par::Seq,
        );
        out.into_iter().map(|x| C64::new(x, 0.0)).collect()
    } else {
        let mut out = vec![C64::new(0.0, 0.0); m * n];
        matmul(
            MatMut::from_column_major_slice_mut(&mut out, m, n),
            Accum::Replace,
            MatRef::from_column_major_slice(a, m, k),
            MatRef::from_column_major_slice(b, k, n),
            C64::new(1.0, 0.0),
            Par::Seq,
        );
        out
    }
}

/// Kronecker product of matrices or column vectors: block `(i, j)` of the
/// result is `a[i, j] * b`. Two vectors give a vector.
pub fn kron(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    for t in [a, b] {
        if t.rank() == 0 || t.rank() > 2 {
            return Err(Error::RankUnsupported(t.rank()));
        }
    }
    let dims = |t: &DenseTensor| (t.shape[0], if t.rank() == 2 { t.shape[1] } else { 1 });
    let (ma, na) = dims(a);
    let (mb, nb) = dims(b);
    let at = |t: &DenseTensor, rows: usize, i: usize, j: usize| t.data[i + rows * j];
    let shape = if a.rank() == 1 && b.rank() == 1 {
        vec![ma * mb]
    } else {
        vec![ma * mb, na * nb]
    };
    let mut data = Vec::with_capacity(ma * mb * na * nb);
    for col in 0..na * nb {
        let (ja, jb) = (col / nb, col % nb);
        for row in 0..ma * mb {
            let (ia, ib) = (row / mb, row % mb);
            data.push(at(a, ma, ia, ja) * at(b, mb, ib, jb));
        }
    }
    Ok(DenseTensor { shape, data })
}

/// Block-diagonal `[[a, 0], [0, b]]`.
pub fn direct_sum(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    for t in [a, b] {
        if t.rank() != 2 {
            return Err(Error::RankUnsupported(t.rank()));
        }
    }
    let (ma, na) = (a.shape[0], a.shape[1]);
    let (mb, nb) = (b.shape[0], b.shape[1]);
    Ok(DenseTensor::from_fn(&[ma + mb, na + nb], |ix| {
        let (i, j) = (ix[0], ix[1]);
        if i < ma && j < na {
            a.get(&[i, j])
        } else if i >= ma && j >= na {
            b.get(&[i - ma, j - na])
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

#[derive(Serialize, Deserialize)]
struct TensorDump {
    shape: Vec<usize>,
    data_re: Vec<f64>,
    data_im: Vec<f64>,
}

impl Serialize for DenseTensor {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TensorDump {
            shape: self.shape.clone(),
            data_re: self.data.iter().map(|z| z.re).collect(),
            data_im: self.data.iter().map(|z| z.im).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DenseTensor {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dump = TensorDump::deserialize(deserializer)?;
        if dump.data_re.len() != dump.data_im.len() {
            return Err(serde::de::Error::custom("data_re and data_im lengths differ"));
        }
        let data = dump
            .data_re
            .into_iter()
            .zip(dump.data_im)
            .map(|(re, im)| C64::new(re, im))
            .collect();
        DenseTensor::new(dump.shape, data).map_err(serde::de::Error::custom)
    }
}
