//! Dense complex matrices and the handful of decompositions the rest of the
//! crate is built on.
//!
//! Everything here is dense and row-major. The largest object in practice is
//! an 81x81 superoperator, so no attempt is made at blocking or BLAS-style
//! performance.

mod cholesky;
mod eigen;
mod partial;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use cholesky::{cholesky, UpperTriangular};
pub use eigen::{eigh, eigvals_hermitian, min_eigval, EigenDecomposition, MAX_EIGEN_SIDE};
pub use partial::{is_ppt, partial_transpose, Subsystem};

/// Maximum allowed `|A - A^dagger|` (scaled by `max(1, max|A|)`) for a
/// [`HermitianView`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default negative-eigenvalue tolerance for [`DensityMatrix`].
pub const DENSITY_TOL: f64 = 1e-10;

/// Allowed deviation of a density matrix trace from one.
pub const TRACE_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting NaN/Inf.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { row: k / cols.max(1), col: k % cols.max(1) });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { ZERO })
    }

    /// The matrix unit `|i><j|` of side `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    /// Rank-one projector `|v><v|`.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * k).collect() }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm of `self - other`; infinite when shapes differ.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `Tr(self * rhs)` without forming the product.
    pub fn trace_product(&self, rhs: &Self) -> Result<Complex64> {
        if self.cols != rhs.rows || self.rows != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "trace of {}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * rhs[(k, i)];
            }
        }
        Ok(acc)
    }

    /// Copies the `(bi, bj)` block of side `(br, bc)`.
    pub fn block(&self, bi: usize, bj: usize, br: usize, bc: usize) -> Self {
        Self::from_fn(br, bc, |a, b| self[(bi * br + a, bj * bc + b)])
    }

    /// Column-stacking vectorization: `vec(A)[i + rows * j] = A[i, j]`.
    pub fn vectorize(&self) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.rows * self.cols];
        for j in 0..self.cols {
            for i in 0..self.rows {
                v[i + self.rows * j] = self[(i, j)];
            }
        }
        v
    }

    /// Inverse of [`ComplexMatrix::vectorize`].
    pub fn unvectorize(v: &[Complex64], rows: usize, cols: usize) -> Result<Self> {
        if v.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("vector of length {} into {rows}x{cols}", v.len())));
        }
        Ok(Self::from_fn(rows, cols, |i, j| v[i + rows * j]))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

fn zip_with(a: &ComplexMatrix, b: &ComplexMatrix, op: impl Fn(Complex64, Complex64) -> Complex64) -> ComplexMatrix {
    assert!(a.rows == b.rows && a.cols == b.cols, "shape mismatch: {}x{} vs {}x{}", a.rows, a.cols, b.rows, b.cols);
    ComplexMatrix { rows: a.rows, cols: a.cols, data: a.data.iter().zip(&b.data).map(|(&x, &y)| op(x, y)).collect() }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl Mul<Complex64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, k: Complex64) -> ComplexMatrix {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * k).collect() }
    }
}

/// Kronecker product; block `(i, j)` of the result is `a[i, j] * b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * br, a.cols * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

/// A square matrix known to be Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianView(ComplexMatrix);

impl HermitianView {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!("{}x{} is not square", m.rows, m.cols)));
        }
        let deviation = m.hermitian_deviation();
        if deviation > HERMITIAN_TOL * m.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(m))
    }

    /// Projects onto the Hermitian part, `(A + A^dagger) / 2`.
    pub fn hermitian_part(m: &ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!("{}x{} is not square", m.rows, m.cols)));
        }
        Ok(Self((m + &m.adjoint()).scale(0.5)))
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.0.rows
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}

/// A unit-trace positive semidefinite Hermitian matrix on `H_A (x) H_B`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianView,
    dims: (usize, usize),
    tol: f64,
}

impl DensityMatrix {
    pub fn new(matrix: HermitianView, dims: (usize, usize)) -> Result<Self> {
        Self::with_tolerance(matrix, dims, DENSITY_TOL)
    }

    pub fn with_tolerance(matrix: HermitianView, dims: (usize, usize), tol: f64) -> Result<Self> {
        if dims.0 * dims.1 != matrix.side() {
            return Err(Error::DimensionMismatch(format!(
                "dims {}x{} do not match side {}",
                dims.0,
                dims.1,
                matrix.side()
            )));
        }
        let trace = matrix.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotDensity(format!("trace {trace} is not 1")));
        }
        let lambda = min_eigval(&matrix)?;
        if lambda < -tol {
            return Err(Error::NotDensity(format!("minimum eigenvalue {lambda:e} below -{tol:e}")));
        }
        Ok(Self { matrix, dims, tol })
    }

    /// Normalizes a PSD Hermitian matrix by its trace.
    pub fn from_unnormalized(m: ComplexMatrix, dims: (usize, usize)) -> Result<Self> {
        let trace = m.trace().re;
        if trace.abs() <= f64::MIN_POSITIVE {
            return Err(Error::NotDensity("zero trace".into()));
        }
        Self::new(HermitianView::new(m.scale(1.0 / trace))?, dims)
    }

    pub fn maximally_mixed(dims: (usize, usize)) -> Self {
        let n = dims.0 * dims.1;
        Self { matrix: HermitianView(ComplexMatrix::identity(n).scale(1.0 / n as f64)), dims, tol: DENSITY_TOL }
    }

    /// `|psi><psi|` for the maximally entangled `|psi> = sum_i |ii> / sqrt(d)`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = vec![ZERO; d * d];
        let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        for i in 0..d {
            v[i * d + i] = amp;
        }
        Self { matrix: HermitianView(ComplexMatrix::outer(&v)), dims: (d, d), tol: DENSITY_TOL }
    }

    /// `rho_a (x) rho_b`.
    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        let m = kron(a.matrix(), b.matrix());
        Self { matrix: HermitianView(m), dims: (a.side(), b.side()), tol: a.tol.max(b.tol) }
    }

    /// Normalized pure state `|v><v|` on a single system (`dims = (n, 1)`).
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm <= f64::MIN_POSITIVE {
            return Err(Error::NotDensity("zero vector".into()));
        }
        let m = ComplexMatrix::outer(v).scale(1.0 / norm);
        Ok(Self { matrix: HermitianView(m), dims: (v.len(), 1), tol: DENSITY_TOL })
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix.0
    }

    #[inline]
    pub fn hermitian(&self) -> &HermitianView {
        &self.matrix
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.matrix.side()
    }

    #[inline]
    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Reinterprets the subsystem split.
    pub fn with_dims(&self, dims: (usize, usize)) -> Result<Self> {
        if dims.0 * dims.1 != self.side() {
            return Err(Error::DimensionMismatch(format!(
                "dims {}x{} do not match side {}",
                dims.0,
                dims.1,
                self.side()
            )));
        }
        Ok(Self { dims, ..self.clone() })
    }
}
