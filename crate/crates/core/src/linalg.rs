//! Dense complex-matrix kernels.
//!
//! [`ComplexMatrix`] wraps an `nalgebra` dense matrix. Constructors and
//! accessors speak row-major order; the backing storage is whatever
//! `nalgebra` uses. Every operator in the crate (density matrices,
//! measurement bases, swap operators) is one of these.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Accepted deviation `max |M - M^dagger|` for Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Eigenvalues at or below this magnitude count as zero for rank purposes.
pub const RANK_CUTOFF: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::from_element(rows, cols, ZERO))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteEntry);
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO })
    }

    /// `|v><v|` for a column vector `v`.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols, |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.0[(i, j)] = value;
    }

    pub fn row_major_entries(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn scale_complex(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn map(&self, f: impl FnMut(C64) -> C64) -> Self {
        Self(self.0.map(f))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.0.shape(), other.0.shape());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M - M^dagger|`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Deviation of `M^dagger M` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = self.adjoint() * self;
        prod.max_abs_diff(&Self::identity(self.rows()))
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        let n = self.rows();
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..self.cols() {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }
}

impl From<DMatrix<C64>> for ComplexMatrix {
    fn from(m: DMatrix<C64>) -> Self {
        Self(m)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Mul<&ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V diag(lambda) V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_function(|x| x)
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = ZERO;
            for (k, &w) in fl.iter().enumerate() {
                if w != 0.0 {
                    acc += v.get(i, k) * v.get(j, k).conj() * w;
                }
            }
            acc
        })
    }

    /// Number of eigenvalues with magnitude above [`RANK_CUTOFF`].
    pub fn rank(&self) -> usize {
        self.eigenvalues.iter().filter(|x| x.abs() > RANK_CUTOFF).count()
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NonSquareInput {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let deviation = m.hermitian_deviation();
    if deviation.is_nan() || deviation > HERMITIAN_TOL {
        return Err(Error::NonHermitianInput { deviation });
    }
    Ok(())
}

pub fn hermitian_eigendecomposition(m: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(m)?;
    Ok(eigh_unchecked(m))
}

/// Eigendecomposition of the Hermitian part of `m`, skipping validation.
pub(crate) fn eigh_unchecked(m: &ComplexMatrix) -> HermitianEigen {
    let n = m.rows();
    let eig = SymmetricEigen::new(m.hermitian_part().0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen {
        eigenvalues,
        eigenvectors,
    }
}

/// Eigenvalues of the Hermitian part of `m`, ascending, skipping validation.
pub(crate) fn eigenvalues_unchecked(m: &ComplexMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = m.hermitian_part().0.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    Ok(eigenvalues_unchecked(m))
}

/// `sum_i |lambda_i|`.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|x| x.abs()).sum())
}

pub(crate) fn trace_norm_unchecked(m: &ComplexMatrix) -> f64 {
    eigenvalues_unchecked(m).iter().map(|x| x.abs()).sum()
}

/// `max_i |lambda_i|`.
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|x| x.abs()).fold(0.0, f64::max))
}

/// Singular values of an arbitrary matrix, descending.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = SVD::new(m.0.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Kronecker product with `a`'s indices major.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Splits a flat index into per-factor digits (first factor most significant).
pub(crate) fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

/// Traces out every factor not listed in `keep`. The kept factors stay in
/// their original order.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::DimensionMismatch(format!(
            "factor dimensions {dims:?} do not match a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "kept factors {keep:?} out of range for {} factors",
            dims.len()
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();
    let out_dim: usize = kept.iter().map(|&k| dims[k]).product();

    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    let mut rd = vec![0; dims.len()];
    let mut cd = vec![0; dims.len()];
    for r in 0..total {
        digits(r, dims, &mut rd);
        for c in 0..total {
            digits(c, dims, &mut cd);
            if traced.iter().any(|&k| rd[k] != cd[k]) {
                continue;
            }
            let (mut ro, mut co) = (0, 0);
            for &k in &kept {
                ro = ro * dims[k] + rd[k];
                co = co * dims[k] + cd[k];
            }
            out.0[(ro, co)] += m.0[(r, c)];
        }
    }
    Ok(out)
}

/// Swap operator on two copies of a `d`-dimensional space.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let n = d * d;
    ComplexMatrix::from_fn(n, n, |r, c| {
        let (a, b) = (r / d, r % d);
        if c == b * d + a {
            ONE
        } else {
            ZERO
        }
    })
}

/// `exp(i H)` for Hermitian `H`.
pub(crate) fn unitary_exp(h: &ComplexMatrix) -> ComplexMatrix {
    let eig = eigh_unchecked(h);
    let v = &eig.eigenvectors;
    let n = v.rows();
    let phases: Vec<C64> = eig.eigenvalues.iter().map(|&x| C64::from_polar(1.0, x)).collect();
    ComplexMatrix::from_fn(n, n, |i, j| {
        let mut acc = ZERO;
        for (k, ph) in phases.iter().enumerate() {
            acc += v.get(i, k) * ph * v.get(j, k).conj();
        }
        acc
    })
}

/// Extends an orthonormal set of column vectors to a full unitary using
/// Gram-Schmidt against the standard basis.
pub(crate) fn complete_orthonormal_basis(columns: &[Vec<C64>], n: usize) -> ComplexMatrix {
    let mut basis: Vec<Vec<C64>> = columns.to_vec();
    let mut candidate = 0;
    while basis.len() < n && candidate < n {
        let mut v = vec![ZERO; n];
        v[candidate] = ONE;
        candidate += 1;
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let overlap: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= overlap * bi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_columns(&basis)
}
