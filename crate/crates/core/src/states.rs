//! The two explicit 3x3 state families and the noise mixture used for
//! robustness.
//!
//! Both families are assembled entry by entry from closed forms. The
//! upper-triangular factor of the `y` family is provided separately and only
//! serves as a cross-check.

use crate::error::{Error, Result};
use crate::mat::{ComplexMatrix, DensityMatrix, HermitianView, UpperTriangular};

/// Section of the two-parameter family used for the detection window.
pub const T_SECTION: f64 = 1.0 / 20.0;
/// Robustness point of the two-parameter family, `(x, t) = (7/10, 3/40)`.
pub const X_ROBUST: f64 = 7.0 / 10.0;
pub const T_ROBUST: f64 = 3.0 / 40.0;
/// Robustness point of the `y` family.
pub const Y_ROBUST: f64 = 5.0 / 2.0;

/// `(x, t)` with `0 <= x <= 1` and `t > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChoiFamilyParams {
    x: f64,
    t: f64,
}

impl ChoiFamilyParams {
    pub fn new(x: f64, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidParameter(format!("x = {x} must lie in [0, 1]")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("t = {t} must be positive")));
        }
        Ok(Self { x, t })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// `y > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OsakaFamilyParams {
    y: f64,
}

impl OsakaFamilyParams {
    pub fn new(y: f64) -> Result<Self> {
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::InvalidParameter(format!("y = {y} must be positive")));
        }
        Ok(Self { y })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// `N = 10 + 36y + 57y^2`.
    pub fn normalization(&self) -> f64 {
        let y = self.y;
        10.0 + 36.0 * y + 57.0 * y * y
    }
}

fn symmetric_9(diag: [f64; 9], off: &[(usize, usize, f64)], scale: f64) -> ComplexMatrix {
    let mut m = [0.0; 81];
    for (i, d) in diag.iter().enumerate() {
        m[i * 9 + i] = d * scale;
    }
    for &(i, j, v) in off {
        m[i * 9 + j] = v * scale;
        m[j * 9 + i] = v * scale;
    }
    ComplexMatrix::from_real(9, 9, &m).expect("81 finite entries")
}

/// The two-parameter family `rho(x, t)` with prefactor `1 / (4 + 3/t + 4t)`.
pub fn rho_choi_family(p: &ChoiFamilyParams) -> Result<DensityMatrix> {
    let (x, t) = (p.x, p.t);
    let it = 1.0 / t;
    let norm = 1.0 / (4.0 + 3.0 / t + 4.0 * t);
    let diag = [1.0 + t, t, it, it, 1.0 + t, t, 1.0, it, 1.0];
    let off = [(0, 4, x), (0, 8, x), (1, 3, x), (2, 6, x), (4, 8, x), (5, 7, x)];
    DensityMatrix::new(HermitianView::new(symmetric_9(diag, &off, norm))?, (3, 3))
}

/// The PT-invariant family `rho(y)`, normalized by `N = 10 + 36y + 57y^2`.
pub fn rho_osaka_family(p: &OsakaFamilyParams) -> Result<DensityMatrix> {
    let y = p.y;
    let a = y * (2.0 + 5.0 * y);
    let b = 3.0 * y * (1.0 + y);
    let c = (1.0 + y) * (1.0 + 2.0 * y);
    let diag = [
        10.0 * y * y,
        y * y,
        9.0 * y * y,
        (2.0 + 5.0 * y).powi(2),
        2.0 + 6.0 * y + 5.0 * y * y,
        (1.0 + 2.0 * y).powi(2),
        (1.0 + y).powi(2),
        (1.0 + y).powi(2),
        (1.0 + y).powi(2),
    ];
    let off = [(0, 4, a), (0, 8, b), (1, 3, a), (2, 6, b), (4, 8, c), (5, 7, c)];
    DensityMatrix::new(HermitianView::new(symmetric_9(diag, &off, 1.0 / p.normalization()))?, (3, 3))
}

/// Nonzero positions (0-based) of the upper-triangular factor of `rho(y)`.
pub const OSAKA_T_PATTERN: [(usize, usize); 11] =
    [(0, 0), (0, 4), (0, 8), (1, 1), (1, 3), (2, 2), (2, 6), (4, 4), (4, 8), (5, 5), (5, 7)];

/// Unnormalized factor with `T^t T / N = rho(y)`.
pub fn t_factor_osaka(p: &OsakaFamilyParams) -> UpperTriangular {
    let y = p.y;
    let r10 = 10f64.sqrt();
    let values = [
        r10 * y,
        (2.0 + 5.0 * y) / r10,
        3.0 * (1.0 + y) / r10,
        y,
        2.0 + 5.0 * y,
        3.0 * y,
        1.0 + y,
        (4.0 + 5.0 * y) / r10,
        (1.0 + y) / r10,
        1.0 + 2.0 * y,
        1.0 + y,
    ];
    let entries: Vec<_> = OSAKA_T_PATTERN.iter().zip(values).map(|(&(i, j), v)| (i, j, v)).collect();
    UpperTriangular::from_real_entries(9, &entries).expect("pattern is upper triangular")
}

/// `(eps/d) I + (1 - eps) rho`.
pub fn mix_with_noise(rho: &DensityMatrix, eps: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must lie in [0, 1]")));
    }
    let n = rho.side();
    let noise = ComplexMatrix::identity(n).scale(eps / n as f64);
    let m = &noise + &rho.matrix().scale(1.0 - eps);
    DensityMatrix::with_tolerance(HermitianView::new(m)?, rho.dims(), rho.tol())
}
