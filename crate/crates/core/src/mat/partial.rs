use super::{min_eigval, ComplexMatrix, DensityMatrix, HermitianView};
use crate::error::{Error, Result};

/// Which tensor factor a partial operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Subsystem {
    First,
    #[default]
    Second,
}

/// Partial transpose of `m` viewed on `C^{d_A} (x) C^{d_B}`.
///
/// With [`Subsystem::Second`] every `d_B x d_B` block is transposed in place;
/// with [`Subsystem::First`] the block grid itself is transposed.
pub fn partial_transpose(m: &ComplexMatrix, dims: (usize, usize), which: Subsystem) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    if !m.is_square() || m.rows() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix with subsystem dims {da}x{db}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let (a, b) = (r / db, r % db);
        let (a2, b2) = (c / db, c % db);
        match which {
            Subsystem::Second => m[(a * db + b2, a2 * db + b)],
            Subsystem::First => m[(a2 * db + b, a * db + b2)],
        }
    }))
}

/// True iff the partial transpose (second factor) has no eigenvalue below `-tol`.
pub fn is_ppt(rho: &DensityMatrix, tol: f64) -> bool {
    partial_transpose(rho.matrix(), rho.dims(), Subsystem::Second)
        .and_then(HermitianView::new)
        .and_then(|pt| min_eigval(&pt))
        .is_ok_and(|lambda| lambda >= -tol)
}
