//! Cyclic Jacobi diagonalization of complex Hermitian matrices.

use num_complex::Complex64;

use super::{ComplexMatrix, HermitianView};
use crate::error::{Error, Result};

/// Largest side accepted by the eigensolver.
pub const MAX_EIGEN_SIDE: usize = 64;

const MAX_SWEEPS: usize = 100;
const REL_TOL: f64 = 1e-13;

/// Eigenvalues in ascending order and the unitary whose columns are the
/// matching eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

fn off_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Full Hermitian eigendecomposition.
pub fn eigh(h: &HermitianView) -> Result<EigenDecomposition> {
    let n = h.side();
    if n > MAX_EIGEN_SIDE {
        return Err(Error::TooLarge { side: n, max: MAX_EIGEN_SIDE });
    }
    let mut a = h.matrix().clone();
    let mut v = ComplexMatrix::identity(n);
    let threshold = REL_TOL * a.frobenius_norm();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        let off = off_norm(&a);
        if off > threshold {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS, off_norm: off });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenDecomposition { values, vectors })
}

/// Annihilates `a[p, q]` with a unitary rotation in the `(p, q)` plane.
///
/// The rotation is the phase `diag(1, conj(e))` (making `a[p, q]` real and
/// positive) followed by a real Jacobi rotation.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let e = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let ec = e.conj();
    let n = a.rows();

    // A <- A U with U = [[c, s], [-s conj(e), c conj(e)]] on (p, q).
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * ec * s;
        a[(k, q)] = akp * s + akq * ec * c;
    }
    // A <- U^dagger A.
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * e * s;
        a[(q, k)] = apk * s + aqk * e * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * ec * s;
        v[(k, q)] = vkp * s + vkq * ec * c;
    }
}

/// Real eigenvalues of `h`, ascending.
pub fn eigvals_hermitian(h: &HermitianView) -> Result<Vec<f64>> {
    eigh(h).map(|d| d.values)
}

pub fn min_eigval(h: &HermitianView) -> Result<f64> {
    let values = eigvals_hermitian(h)?;
    Ok(values.first().copied().unwrap_or(f64::NAN))
}
