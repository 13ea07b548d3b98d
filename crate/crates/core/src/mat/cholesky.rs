use num_complex::Complex64;

use super::{ComplexMatrix, HermitianView};
use crate::error::{Error, Result};

/// Pivots in `[-PIVOT_CLAMP, 0]` are treated as exact zeros.
pub const PIVOT_CLAMP: f64 = 1e-10;

/// Square matrix with exact zeros strictly below the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct UpperTriangular(ComplexMatrix);

impl UpperTriangular {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!("{}x{} is not square", m.rows(), m.cols())));
        }
        for i in 0..m.rows() {
            for j in 0..i {
                if m[(i, j)] != Complex64::new(0.0, 0.0) {
                    return Err(Error::NotUpperTriangular { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    /// Real upper-triangular matrix from `(row, col, value)` triples.
    pub fn from_real_entries(side: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = ComplexMatrix::zeros(side, side);
        for &(i, j, v) in entries {
            if i >= side || j >= side {
                return Err(Error::DimensionMismatch(format!("position ({i}, {j}) outside side {side}")));
            }
            if j < i {
                return Err(Error::NotUpperTriangular { row: i, col: j });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            m[(i, j)] = Complex64::new(v, 0.0);
        }
        Ok(Self(m))
    }

    pub fn identity(side: usize) -> Self {
        Self(ComplexMatrix::identity(side))
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.0.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    /// Sets an on-or-above-diagonal entry.
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        assert!(j >= i, "({i}, {j}) is below the diagonal");
        self.0[(i, j)] = value;
    }

    /// `T^dagger T`.
    pub fn gram(&self) -> ComplexMatrix {
        let n = self.side();
        let t = &self.0;
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..=i.min(j) {
                acc += t[(k, i)].conj() * t[(k, j)];
            }
            acc
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self(self.0.scale(k))
    }

    /// Real parts of the upper triangle in row-major order (`side*(side+1)/2` values).
    pub fn upper_entries(&self) -> Vec<f64> {
        let n = self.side();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                out.push(self.0[(i, j)].re);
            }
        }
        out
    }
}

/// Upper-triangular factor `T` with `h = T^dagger T`.
///
/// Rank-deficient input is accepted: a pivot in `[-1e-10, 0]` is clamped to
/// zero and the rest of that row of `T` is set to zero.
pub fn cholesky(h: &HermitianView) -> Result<UpperTriangular> {
    let n = h.side();
    let a = h.matrix();
    let scale = a.max_abs().max(1.0);
    let mut t = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)].re;
        for k in 0..j {
            pivot -= t[(k, j)].norm_sqr();
        }
        if pivot < -PIVOT_CLAMP {
            return Err(Error::NotPsd { index: j, pivot });
        }
        if pivot <= 0.0 {
            // zero pivot: the remaining row must already be reproduced
            for l in j + 1..n {
                let r = row_remainder(a, &t, j, l);
                if r.norm() > 1e-8 * scale {
                    return Err(Error::NotPsd { index: j, pivot });
                }
            }
            continue;
        }
        let d = pivot.sqrt();
        t[(j, j)] = Complex64::new(d, 0.0);
        for l in j + 1..n {
            t[(j, l)] = row_remainder(a, &t, j, l) / d;
        }
    }
    Ok(UpperTriangular(t))
}

fn row_remainder(a: &ComplexMatrix, t: &ComplexMatrix, j: usize, l: usize) -> Complex64 {
    let mut r = a[(j, l)];
    for k in 0..j {
        r -= t[(k, j)].conj() * t[(k, l)];
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factor() {
        let h = HermitianView::new(ComplexMatrix::identity(4)).unwrap();
        assert_eq!(cholesky(&h).unwrap(), UpperTriangular::identity(4));
    }

    #[test]
    fn diagonal_factor() {
        let h = HermitianView::new(ComplexMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        let t = cholesky(&h).unwrap();
        assert_eq!(t.matrix(), &ComplexMatrix::from_diagonal(&[2.0, 3.0]));
    }

    #[test]
    fn complex_positive_definite() {
        let m = ComplexMatrix::new(
            2,
            2,
            vec![
                Complex64::new(2.0, 0.0),
                Complex64::new(1.0, -1.0),
                Complex64::new(1.0, 1.0),
                Complex64::new(3.0, 0.0),
            ],
        )
        .unwrap();
        let t = cholesky(&HermitianView::new(m.clone()).unwrap()).unwrap();
        assert!(t.gram().distance(&m) < 1e-14);
    }

    #[test]
    fn rank_deficient_input_is_accepted() {
        // [[1,1],[1,1]] has rank one.
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        let t = cholesky(&HermitianView::new(m.clone()).unwrap()).unwrap();
        assert_eq!(t.get(1, 1), Complex64::new(0.0, 0.0));
        assert!(t.gram().distance(&m) < 1e-15);
    }

    #[test]
    fn indefinite_input_is_rejected() {
        let m = ComplexMatrix::from_diagonal(&[1.0, -0.5]);
        let err = cholesky(&HermitianView::new(m).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NotPsd { index: 1, .. }));
    }

    #[test]
    fn upper_triangular_rejects_lower_entries() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 1e-300, 1.0]).unwrap();
        assert_eq!(UpperTriangular::new(m).unwrap_err(), Error::NotUpperTriangular { row: 1, col: 0 });
        assert!(UpperTriangular::from_real_entries(3, &[(2, 1, 1.0)]).is_err());
    }
}
