//! Dense complex linear algebra over mixed-radix tensor-product spaces.
//!
//! Storage is row-major. Composite indices are big-endian in the subsystem
//! order: subsystem 0 is the most significant digit.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QforkError, Result};
use crate::tol;

pub type C = Complex64;

/// Largest number of entries a single Kronecker product may produce.
pub const KRON_ENTRY_CAP: usize = 1 << 24;

#[inline]
pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

#[inline]
pub(crate) fn cr(re: f64) -> C {
    C::new(re, 0.0)
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for col in 0..self.cols {
                let z = self[(r, col)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(QforkError::DimensionMismatch(
                "matrix dimensions must be positive".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(QforkError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QforkError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Square matrix from row-major entries.
    pub fn square(data: Vec<C>) -> Result<Self> {
        let n = (data.len() as f64).sqrt().round() as usize;
        Self::new(n, n, data)
    }

    /// Square matrix from real row-major entries.
    pub fn real_square(data: &[f64]) -> Result<Self> {
        Self::square(data.iter().map(|&x| cr(x)).collect())
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<C>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for col in 0..cols {
                data.push(f(r, col));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![C::default(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, col| if r == col { cr(1.0) } else { C::default() })
    }

    pub fn from_diag(diag: &[C]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |r, col| if r == col { diag[r] } else { C::default() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C> {
        self.data
    }

    pub fn kron(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        let rows = self.rows.checked_mul(other.rows);
        let cols = self.cols.checked_mul(other.cols);
        let entries = rows.zip(cols).and_then(|(r, c)| r.checked_mul(c));
        match entries {
            Some(n) if n <= KRON_ENTRY_CAP => {}
            _ => {
                return Err(QforkError::DimensionCap {
                    what: "kronecker product entries",
                    dim: entries.unwrap_or(usize::MAX),
                    cap: KRON_ENTRY_CAP,
                })
            }
        }
        let (rows, cols) = (self.rows * other.rows, self.cols * other.cols);
        let mut data = vec![C::default(); rows * cols];
        for ar in 0..self.rows {
            for ac in 0..self.cols {
                let a = self.data[ar * self.cols + ac];
                if a == C::default() {
                    continue;
                }
                for br in 0..other.rows {
                    let row = ar * other.rows + br;
                    let src = &other.data[br * other.cols..(br + 1) * other.cols];
                    let dst =
                        &mut data[row * cols + ac * other.cols..row * cols + (ac + 1) * other.cols];
                    for (d, &b) in dst.iter_mut().zip(src) {
                        *d = a * b;
                    }
                }
            }
        }
        Ok(Self::from_raw(rows, cols, data))
    }

    pub fn dagger(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |r, col| self[(col, r)].conj())
    }

    pub fn conj(&self) -> ComplexMatrix {
        Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|z| z.conj()).collect(),
        )
    }

    pub fn transpose(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |r, col| self[(col, r)])
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(QforkError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = vec![C::default(); self.rows * other.cols];
        for r in 0..self.rows {
            let out = &mut data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == C::default() {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self::from_raw(self.rows, other.cols, data))
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &ComplexMatrix, f: impl Fn(C, C) -> C) -> Result<ComplexMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(QforkError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    pub fn scale(&self, s: C) -> ComplexMatrix {
        Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|&z| z * s).collect(),
        )
    }

    pub fn scale_real(&self, s: f64) -> ComplexMatrix {
        self.scale(cr(s))
    }

    pub fn trace(&self) -> C {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// tr(self · other) without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Result<C> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(QforkError::DimensionMismatch("trace of product".into()));
        }
        let mut acc = C::default();
        for r in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[r * self.cols + k] * other.data[k * other.cols + r];
            }
        }
        Ok(acc)
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if self.cols != v.dim() {
            return Err(QforkError::DimensionMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        let data = (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v.data())
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect();
        Ok(ComplexVector::from_raw(data))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-norm distance; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &ComplexMatrix, atol: f64) -> bool {
        self.max_abs_diff(other) <= atol
    }

    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut err: f64 = 0.0;
        for r in 0..self.rows {
            for col in r..self.cols {
                err = err.max((self[(r, col)] - self[(col, r)].conj()).norm());
            }
        }
        err
    }

    pub fn is_hermitian(&self, atol: f64) -> bool {
        self.hermiticity_error() <= atol
    }

    /// max |U†U − I|.
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = self.dagger().matmul(self).expect("square");
        prod.max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, atol: f64) -> bool {
        self.unitarity_error() <= atol
    }

    pub fn hermitian_eig(&self) -> Result<HermitianEigen> {
        hermitian_eig(self)
    }

    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
        partial_trace(self, dims, keep)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C;
    fn index(&self, (r, col): (usize, usize)) -> &C {
        &self.data[r * self.cols + col]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, col): (usize, usize)) -> &mut C {
        &mut self.data[r * self.cols + col]
    }
}

/// Panics on non-conformable operands; use [`ComplexMatrix::matmul`] for
/// checked multiplication.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("conformable matrices")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::add(self, rhs).expect("equal shapes")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::sub(self, rhs).expect("equal shapes")
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.kron(b)
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.dagger()
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.matmul(b)
}

pub fn trace(a: &ComplexMatrix) -> C {
    a.trace()
}

/// Complex amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector {
    data: Vec<C>,
}

impl ComplexVector {
    pub fn new(data: Vec<C>) -> Result<Self> {
        if data.is_empty() {
            return Err(QforkError::DimensionMismatch("empty vector".into()));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QforkError::NonFinite);
        }
        Ok(Self { data })
    }

    pub fn real(data: &[f64]) -> Result<Self> {
        Self::new(data.iter().map(|&x| cr(x)).collect())
    }

    pub(crate) fn from_raw(data: Vec<C>) -> Self {
        Self { data }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut data = vec![C::default(); dim];
        data[index] = cr(1.0);
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[C] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::from_raw(self.data.iter().map(|&z| z / n).collect())
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &ComplexVector) -> C {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn kron(&self, other: &ComplexVector) -> Result<ComplexVector> {
        let n = self.dim().saturating_mul(other.dim());
        if n > KRON_ENTRY_CAP {
            return Err(QforkError::DimensionCap {
                what: "kronecker product entries",
                dim: n,
                cap: KRON_ENTRY_CAP,
            });
        }
        let mut data = Vec::with_capacity(n);
        for &a in &self.data {
            data.extend(other.data.iter().map(|&b| a * b));
        }
        Ok(Self::from_raw(data))
    }

    /// |self⟩⟨self|.
    pub fn projector(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |r, col| self.data[r] * self.data[col].conj())
    }

    pub fn max_abs_diff(&self, other: &ComplexVector) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Equality after removing the relative global phase.
    pub fn approx_eq_up_to_phase(&self, other: &ComplexVector, atol: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let overlap = self.inner(other);
        if overlap.norm() < tol::STRUCTURAL {
            return self.norm() < atol && other.norm() < atol;
        }
        let phase = overlap / overlap.norm();
        self.data
            .iter()
            .zip(&other.data)
            .all(|(a, b)| (a * phase - b).norm() <= atol)
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Flat offsets of every local index over `subs` (big-endian in the given order).
pub(crate) fn local_offsets(dims: &[usize], stride: &[usize], subs: &[usize]) -> Vec<usize> {
    let mut offs = vec![0usize];
    for &s in subs {
        offs = offs
            .iter()
            .flat_map(|&o| (0..dims[s]).map(move |v| o + v * stride[s]))
            .collect();
    }
    offs
}

pub(crate) fn check_targets(dims: &[usize], targets: &[usize]) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= dims.len() {
            return Err(QforkError::IndexOutOfRange {
                index: t,
                len: dims.len(),
            });
        }
        if targets[..i].contains(&t) {
            return Err(QforkError::RepeatedTarget(t));
        }
    }
    Ok(())
}

/// Applies `op` to the subsystems `targets` (in that order) of a tensor with
/// subsystem dimensions `dims`, acting as identity elsewhere.
pub fn apply_on_subsystems(
    data: &[C],
    dims: &[usize],
    op: &ComplexMatrix,
    targets: &[usize],
) -> Result<Vec<C>> {
    check_targets(dims, targets)?;
    let total: usize = dims.iter().product();
    if data.len() != total {
        return Err(QforkError::DimensionMismatch(format!(
            "tensor has {} entries, layout needs {total}",
            data.len()
        )));
    }
    let local: usize = targets.iter().map(|&t| dims[t]).product();
    if !op.is_square() || op.rows() != local {
        return Err(QforkError::DimensionMismatch(format!(
            "operator is {}x{}, targets span dimension {local}",
            op.rows(),
            op.cols()
        )));
    }
    let stride = strides(dims);
    let offs = local_offsets(dims, &stride, targets);
    let others: Vec<usize> = (0..dims.len()).filter(|i| !targets.contains(i)).collect();
    let bases = local_offsets(dims, &stride, &others);

    let mut out = vec![C::default(); total];
    let mut buf = vec![C::default(); local];
    let m = op.data();
    for &base in &bases {
        for (b, &o) in buf.iter_mut().zip(&offs) {
            *b = data[base + o];
        }
        for (a, &oa) in offs.iter().enumerate() {
            let row = &m[a * local..(a + 1) * local];
            out[base + oa] = row.iter().zip(&buf).map(|(x, y)| x * y).sum();
        }
    }
    Ok(out)
}

/// Reorders tensor subsystems: new subsystem `i` is old subsystem `perm[i]`.
pub fn permute_subsystems(data: &[C], dims: &[usize], perm: &[usize]) -> Result<Vec<C>> {
    check_targets(dims, perm)?;
    if perm.len() != dims.len() {
        return Err(QforkError::DimensionMismatch("permutation length".into()));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_stride = strides(&new_dims);
    let mut stride_of_old = vec![0; dims.len()];
    for (i, &p) in perm.iter().enumerate() {
        stride_of_old[p] = new_stride[i];
    }
    let mut out = vec![C::default(); data.len()];
    for (x, &v) in data.iter().enumerate() {
        let mut rem = x;
        let mut y = 0;
        for j in (0..dims.len()).rev() {
            y += (rem % dims[j]) * stride_of_old[j];
            rem /= dims[j];
        }
        out[y] = v;
    }
    Ok(out)
}

/// Reorders the subsystems of a square operator.
pub fn permute_operator(
    op: &ComplexMatrix,
    dims: &[usize],
    perm: &[usize],
) -> Result<ComplexMatrix> {
    let n = dims.len();
    let doubled: Vec<usize> = dims.iter().chain(dims).copied().collect();
    let full_perm: Vec<usize> = perm
        .iter()
        .copied()
        .chain(perm.iter().map(|p| p + n))
        .collect();
    let data = permute_subsystems(op.data(), &doubled, &full_perm)?;
    Ok(ComplexMatrix::from_raw(op.rows(), op.cols(), data))
}

/// Reduced operator on the `keep` subsystems (original order preserved).
pub fn partial_trace(rho: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !rho.is_square() || rho.rows() != total {
        return Err(QforkError::DimensionMismatch(format!(
            "operator of size {}x{} vs layout dimension {total}",
            rho.rows(),
            rho.cols()
        )));
    }
    check_targets(dims, keep)?;
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let stride = strides(dims);
    let ko = local_offsets(dims, &stride, &keep);
    let to = local_offsets(dims, &stride, &traced);
    let dk = ko.len();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            out[(a, b)] = to.iter().map(|&t| rho[(ko[a] + t, ko[b] + t)]).sum();
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let diag: Vec<C> = self.values.iter().map(|&v| cr(v)).collect();
        let d = ComplexMatrix::from_diag(&diag);
        &(&self.vectors * &d) * &self.vectors.dagger()
    }

    /// Column `i` as a vector.
    pub fn vector(&self, i: usize) -> ComplexVector {
        let n = self.vectors.rows();
        ComplexVector::from_raw((0..n).map(|r| self.vectors[(r, i)]).collect())
    }
}

pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(QforkError::DimensionMismatch(
            "eigendecomposition of non-square matrix".into(),
        ));
    }
    let herr = a.hermiticity_error();
    if herr > tol::STRUCTURAL * a.max_abs().max(1.0) {
        return Err(QforkError::NotHermitian(herr));
    }
    let n = a.rows();
    let sym = DMatrix::from_fn(n, n, |r, col| (a[(r, col)] + a[(col, r)].conj()) * 0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    Ok(HermitianEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let a = random_matrix(rng, n, n);
        (&a + &a.dagger()).scale_real(0.5)
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.kron(&i2).unwrap(), ComplexMatrix::identity(4));
        let zz = gates::pauli_z().kron(&gates::pauli_z()).unwrap();
        let diag = ComplexMatrix::from_diag(&[cr(1.0), cr(-1.0), cr(-1.0), cr(1.0)]);
        assert_eq!(zz, diag);
    }

    #[test]
    fn kron_hadamard_x_entries() {
        // H ⊗ X: block (0,0) is (1/√2)·X, so entry (0,0) = 0 and (0,1) = 1/√2.
        let hx = gates::hadamard().kron(&gates::pauli_x()).unwrap();
        assert!(hx[(0, 0)].norm() < 1e-15);
        assert!((hx[(0, 1)] - cr(std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((hx[(3, 2)] + cr(std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn kron_over_cap_is_rejected() {
        let row = ComplexMatrix::zeros(1, 8192);
        let err = row.kron(&ComplexMatrix::zeros(1, 4096)).unwrap_err();
        assert!(matches!(err, QforkError::DimensionCap { .. }));
    }

    #[test]
    fn dagger_cases() {
        assert_eq!(
            ComplexMatrix::identity(3).dagger(),
            ComplexMatrix::identity(3)
        );
        let sd = gates::phase_s().dagger();
        assert_eq!(sd, ComplexMatrix::from_diag(&[cr(1.0), c(0.0, -1.0)]));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(&mut rng, 3, 5);
        assert_eq!(a.dagger().dagger(), a);
    }

    #[test]
    fn products_and_traces() {
        let x = gates::pauli_x();
        assert_eq!(&x * &x, ComplexMatrix::identity(2));
        assert_eq!(gates::pauli_z().trace(), C::default());
        let h = gates::hadamard();
        let hzh = &(&h * &gates::pauli_z()) * &h;
        assert!(hzh.approx_eq(&x, 1e-15));
        let err = x.matmul(&ComplexMatrix::identity(3)).unwrap_err();
        assert!(matches!(err, QforkError::DimensionMismatch(_)));
    }

    #[test]
    fn partial_trace_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ra = random_hermitian(&mut rng, 2);
        let rb = random_hermitian(&mut rng, 3);
        let prod = ra.kron(&rb).unwrap();
        let red = partial_trace(&prod, &[2, 3], &[0]).unwrap();
        assert!(red.approx_eq(&ra.scale(rb.trace()), 1e-12));
        let red_b = partial_trace(&prod, &[2, 3], &[1]).unwrap();
        assert!(red_b.approx_eq(&rb.scale(ra.trace()), 1e-12));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = ComplexVector::real(&[s, 0.0, 0.0, s]).unwrap().projector();
        let red = partial_trace(&bell, &[2, 2], &[0]).unwrap();
        assert!(red.approx_eq(&ComplexMatrix::identity(2).scale_real(0.5), 1e-15));

        let all = partial_trace(&bell, &[2, 2], &[0, 1]).unwrap();
        assert_eq!(all, bell);

        assert!(partial_trace(&bell, &[2, 3], &[0]).is_err());
        assert!(matches!(
            partial_trace(&bell, &[2, 2], &[2]).unwrap_err(),
            QforkError::IndexOutOfRange { .. }
        ));
    }

    #[test]
    fn eig_of_paulis() {
        let e = gates::pauli_z().hermitian_eig().unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
        let e = gates::pauli_x().hermitian_eig().unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-12 && (e.values[1] - 1.0).abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let minus = ComplexVector::real(&[s, -s]).unwrap();
        let plus = ComplexVector::real(&[s, s]).unwrap();
        assert!(e.vector(0).approx_eq_up_to_phase(&minus, 1e-12));
        assert!(e.vector(1).approx_eq_up_to_phase(&plus, 1e-12));
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(&mut rng, 8);
        let e = a.hermitian_eig().unwrap();
        assert!(e.reconstruct().approx_eq(&a, 1e-9));
        assert!(e.vectors.is_unitary(1e-9));
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = ComplexMatrix::real_square(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            a.hermitian_eig().unwrap_err(),
            QforkError::NotHermitian(_)
        ));
    }

    #[test]
    fn apply_on_subsystems_matches_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let op = random_matrix(&mut rng, 2, 2);
        let v: Vec<C> = (0..12).map(|_| c(rng.random(), rng.random())).collect();
        let full = ComplexMatrix::identity(2)
            .kron(&op)
            .unwrap()
            .kron(&ComplexMatrix::identity(3))
            .unwrap();
        let expect = full
            .mul_vec(&ComplexVector::new(v.clone()).unwrap())
            .unwrap();
        let got = apply_on_subsystems(&v, &[2, 2, 3], &op, &[1]).unwrap();
        assert!(ComplexVector::new(got).unwrap().max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn constructor_validation() {
        assert!(ComplexMatrix::new(2, 2, vec![cr(1.0); 3]).is_err());
        assert_eq!(
            ComplexMatrix::new(1, 1, vec![cr(f64::NAN)]).unwrap_err(),
            QforkError::NonFinite
        );
    }

    proptest! {
        #[test]
        fn kron_associative_and_trace_multiplicative(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 2, 2);
            let b = random_matrix(&mut rng, 3, 3);
            let cm = random_matrix(&mut rng, 2, 2);
            let left = a.kron(&b).unwrap().kron(&cm).unwrap();
            let right = a.kron(&b.kron(&cm).unwrap()).unwrap();
            prop_assert!(left.approx_eq(&right, 1e-12));
            let t = a.kron(&b).unwrap().trace();
            prop_assert!((t - a.trace() * b.trace()).norm() <= 1e-10);
        }

        #[test]
        fn kron_integer_entries_associative_exactly(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut int = |n| ComplexMatrix::from_fn(n, n, |_, _| c(rng.random_range(-3..4) as f64, rng.random_range(-3..4) as f64));
            let (a, b, cm) = (int(2), int(2), int(3));
            prop_assert_eq!(
                a.kron(&b).unwrap().kron(&cm).unwrap(),
                a.kron(&b.kron(&cm).unwrap()).unwrap()
            );
        }

        #[test]
        fn partial_trace_of_product(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ra = random_hermitian(&mut rng, 3);
            let rb = random_hermitian(&mut rng, 2);
            let red = partial_trace(&ra.kron(&rb).unwrap(), &[3, 2], &[0]).unwrap();
            prop_assert!(red.approx_eq(&ra.scale(rb.trace()), 1e-10));
        }

        #[test]
        fn eig_spectrum_is_unitarily_invariant(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_hermitian(&mut rng, 4);
            let u = crate::random::random_unitary(4, &mut rng);
            let conj = &(&u * &a) * &u.dagger();
            let ea = a.hermitian_eig().unwrap().values;
            let eb = conj.hermitian_eig().unwrap().values;
            for (x, y) in ea.iter().zip(&eb) {
                prop_assert!((x - y).abs() <= 1e-9);
            }
        }
    }
}
