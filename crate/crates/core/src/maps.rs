//! Positive maps on 3x3 matrices and the witnesses built from them.
//!
//! Every map is stored as a [`Superoperator`]: an `m^2 x n^2` matrix acting on
//! column-stacked inputs, `vec(A)[i + n*j] = A[i, j]`. That convention is used
//! everywhere in the crate.
//!
//! The Choi-type maps share one shape: the output diagonal mixes the input
//! diagonal through a 3x3 coefficient table, and each off-diagonal entry is
//! scaled by a fixed factor.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat::{kron, ComplexMatrix, DensityMatrix, HermitianView};

/// A linear map `M_n -> M_m` on column-vectorized matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim_in: usize,
    dim_out: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn new(dim_in: usize, dim_out: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != dim_out * dim_out || matrix.cols() != dim_in * dim_in {
            return Err(Error::DimensionMismatch(format!(
                "superoperator {}x{} for M_{dim_in} -> M_{dim_out}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { dim_in, dim_out, matrix })
    }

    /// Builds the map from its action on the matrix units `|i><j|`.
    pub fn from_unit_images(dim_in: usize, dim_out: usize, image: impl Fn(usize, usize) -> ComplexMatrix) -> Self {
        let mut matrix = ComplexMatrix::zeros(dim_out * dim_out, dim_in * dim_in);
        for j in 0..dim_in {
            for i in 0..dim_in {
                let img = image(i, j);
                debug_assert_eq!((img.rows(), img.cols()), (dim_out, dim_out));
                let col = i + dim_in * j;
                for (row, z) in img.vectorize().into_iter().enumerate() {
                    matrix[(row, col)] = z;
                }
            }
        }
        Self { dim_in, dim_out, matrix }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_unit_images(d, d, |i, j| ComplexMatrix::unit(d, i, j))
    }

    pub fn transpose_map(d: usize) -> Self {
        Self::from_unit_images(d, d, |i, j| ComplexMatrix::unit(d, j, i))
    }

    #[inline]
    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    #[inline]
    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Image of the matrix unit `|i><j|`.
    pub fn unit_image(&self, i: usize, j: usize) -> ComplexMatrix {
        let col = i + self.dim_in * j;
        let m = self.dim_out;
        ComplexMatrix::from_fn(m, m, |k, l| self.matrix[(k + m * l, col)])
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim_in || x.cols() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} input to a map on M_{}",
                x.rows(),
                x.cols(),
                self.dim_in
            )));
        }
        let v = self.matrix.mul_vec(&x.vectorize())?;
        ComplexMatrix::unvectorize(&v, self.dim_out, self.dim_out)
    }

    /// `(s (x) 1_k) rho` for a bipartite matrix whose first factor has side `dim_in`.
    pub fn apply_first_factor_raw(&self, rho: &ComplexMatrix, dims: (usize, usize)) -> Result<ComplexMatrix> {
        let (n, k) = dims;
        if n != self.dim_in || rho.rows() != n * k || rho.cols() != n * k {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix with dims {n}x{k} under a map on M_{}",
                rho.rows(),
                rho.cols(),
                self.dim_in
            )));
        }
        let m = self.dim_out;
        let mut out = ComplexMatrix::zeros(m * k, m * k);
        for j in 0..n {
            for i in 0..n {
                let col = i + n * j;
                for l in 0..m {
                    for kk in 0..m {
                        let coeff = self.matrix[(kk + m * l, col)];
                        if coeff == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for a in 0..k {
                            for b in 0..k {
                                out[(kk * k + a, l * k + b)] += coeff * rho[(i * k + a, j * k + b)];
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Parameters of the maps this crate knows how to build.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MapParams {
    ChoiI { mu: f64 },
    ChoiII { mu: f64 },
    Osaka { x: f64, y: f64, z: f64 },
    Generalized { a: f64, b: f64, c: f64 },
    Transpose { dim: usize },
    Identity { dim: usize },
}

impl MapParams {
    /// The one-parameter Osaka subfamily `Phi_O(1, s, 1/s)`.
    pub fn osaka_subfamily(s: f64) -> Self {
        MapParams::Osaka { x: 1.0, y: s, z: 1.0 / s }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} = {v} is not finite")))
            }
        };
        match *self {
            MapParams::ChoiI { mu } | MapParams::ChoiII { mu } => {
                finite("mu", mu)?;
                if mu < 1.0 {
                    return Err(Error::InvalidParameter(format!("mu = {mu} must be >= 1")));
                }
            }
            MapParams::Osaka { x, y, z } => {
                for (name, v) in [("x", x), ("y", y), ("z", z)] {
                    finite(name, v)?;
                    if v <= 0.0 {
                        return Err(Error::InvalidParameter(format!("{name} = {v} must be > 0")));
                    }
                }
            }
            MapParams::Generalized { a, b, c } => {
                for (name, v) in [("a", a), ("b", b), ("c", c)] {
                    finite(name, v)?;
                    if v == 0.0 {
                        return Err(Error::InvalidParameter(format!("{name} must be nonzero")));
                    }
                }
            }
            MapParams::Transpose { dim } | MapParams::Identity { dim } => {
                if dim == 0 {
                    return Err(Error::InvalidParameter("dimension must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Osaka maps are extremal when `xyz = 1`; other variants report `false`.
    pub fn is_extremal_parameterization(&self) -> bool {
        match *self {
            MapParams::Osaka { x, y, z } => (x * y * z - 1.0).abs() < 1e-12,
            _ => false,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            MapParams::Transpose { dim } | MapParams::Identity { dim } => dim,
            _ => 3,
        }
    }
}

impl fmt::Display for MapParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MapParams::ChoiI { mu } => write!(f, "choi1:{mu}"),
            MapParams::ChoiII { mu } => write!(f, "choi2:{mu}"),
            MapParams::Osaka { x, y, z } => write!(f, "osaka:{x},{y},{z}"),
            MapParams::Generalized { a, b, c } => write!(f, "gen:{a},{b},{c}"),
            MapParams::Transpose { dim } => write!(f, "transpose:{dim}"),
            MapParams::Identity { dim } => write!(f, "id:{dim}"),
        }
    }
}

/// Parses `name:p1,p2,...` with names `choi1`, `choi2`, `osaka`, `gen`,
/// `transpose` and `id`. Choi maps default to `mu = 1`, `transpose`/`id` to
/// dimension 3.
impl FromStr for MapParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let args: Vec<f64> = if rest.trim().is_empty() {
            Vec::new()
        } else {
            rest.split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidParameter(format!("bad number {p:?} in map spec {s:?}")))
                })
                .collect::<Result<_>>()?
        };
        let want = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("map {name:?} takes {n} parameter(s), got {}", args.len())))
            }
        };
        let dim_arg = || -> Result<usize> {
            match args.as_slice() {
                [] => Ok(3),
                [d] if *d >= 1.0 && d.fract() == 0.0 => Ok(*d as usize),
                _ => Err(Error::InvalidParameter(format!("map {name:?} takes one integer dimension"))),
            }
        };
        let params = match name {
            "choi1" | "choi2" => {
                let mu = match args.as_slice() {
                    [] => 1.0,
                    [mu] => *mu,
                    _ => return Err(Error::InvalidParameter(format!("map {name:?} takes at most one parameter"))),
                };
                if name == "choi1" {
                    MapParams::ChoiI { mu }
                } else {
                    MapParams::ChoiII { mu }
                }
            }
            "osaka" => {
                want(3)?;
                MapParams::Osaka { x: args[0], y: args[1], z: args[2] }
            }
            "gen" => {
                want(3)?;
                MapParams::Generalized { a: args[0], b: args[1], c: args[2] }
            }
            "transpose" => MapParams::Transpose { dim: dim_arg()? },
            "id" => MapParams::Identity { dim: dim_arg()? },
            other => return Err(Error::InvalidParameter(format!("unknown map name {other:?}"))),
        };
        params.validate()?;
        Ok(params)
    }
}

/// Output diagonal `k` is `sum_i diag[k][i] * a_ii`; off-diagonal `(k, l)` is `off[k][l] * a_kl`.
fn cyclic_map(diag: [[f64; 3]; 3], off: [[f64; 3]; 3]) -> Superoperator {
    Superoperator::from_unit_images(3, 3, |i, j| {
        let mut img = ComplexMatrix::zeros(3, 3);
        if i == j {
            for (k, row) in diag.iter().enumerate() {
                img[(k, k)] = Complex64::new(row[i], 0.0);
            }
        } else {
            img[(i, j)] = Complex64::new(off[i][j], 0.0);
        }
        img
    })
}

const NEG: [[f64; 3]; 3] = [[-1.0; 3]; 3];

pub fn build_map(p: &MapParams) -> Result<Superoperator> {
    p.validate()?;
    Ok(match *p {
        MapParams::ChoiI { mu } => cyclic_map([[1.0, 0.0, mu], [mu, 1.0, 0.0], [0.0, mu, 1.0]], NEG),
        MapParams::ChoiII { mu } => cyclic_map([[1.0, mu, 0.0], [0.0, 1.0, mu], [mu, 0.0, 1.0]], NEG),
        MapParams::Osaka { x, y, z } => cyclic_map([[1.0, 0.0, x], [y, 1.0, 0.0], [0.0, z, 1.0]], NEG),
        MapParams::Generalized { a, b, c } => {
            let s = [a, b, c];
            let mut off = [[0.0; 3]; 3];
            for (k, row) in off.iter_mut().enumerate() {
                for (l, v) in row.iter_mut().enumerate() {
                    *v = -(s[k] * s[l]);
                }
            }
            cyclic_map([[a * a, 0.0, c * c], [a * a, b * b, 0.0], [0.0, b * b, c * c]], off)
        }
        MapParams::Transpose { dim } => Superoperator::transpose_map(dim),
        MapParams::Identity { dim } => Superoperator::identity(dim),
    })
}

/// `(s (x) 1_k) rho`.
pub fn apply_to_first_factor(s: &Superoperator, rho: &DensityMatrix) -> Result<HermitianView> {
    HermitianView::new(s.apply_first_factor_raw(rho.matrix(), rho.dims())?)
}

/// Which operator [`cj_witness_with`] builds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WitnessForm {
    /// `(1/d) sum_{ij} |i><j| (x) s(|i><j|)`: the normalized Choi matrix.
    #[default]
    Full,
    /// `(1/sqrt d) sum_i |i><i| (x) s(|i><i|)`, diagonal terms only.
    DiagonalOnly,
}

pub fn cj_witness(s: &Superoperator) -> Result<HermitianView> {
    cj_witness_with(s, WitnessForm::Full)
}

pub fn cj_witness_with(s: &Superoperator, form: WitnessForm) -> Result<HermitianView> {
    let d = s.dim_in();
    if s.dim_out() != d {
        return Err(Error::DimensionMismatch(format!("witness needs a square map, got M_{d} -> M_{}", s.dim_out())));
    }
    let mut w = ComplexMatrix::zeros(d * d, d * d);
    let mut add = |i: usize, j: usize| {
        w = &w + &kron(&ComplexMatrix::unit(d, i, j), &s.unit_image(i, j));
    };
    let prefactor = match form {
        WitnessForm::Full => {
            for i in 0..d {
                for j in 0..d {
                    add(i, j);
                }
            }
            1.0 / d as f64
        }
        WitnessForm::DiagonalOnly => {
            for i in 0..d {
                add(i, i);
            }
            1.0 / (d as f64).sqrt()
        }
    };
    HermitianView::new(w.scale(prefactor))
}

/// `Re Tr(W rho)`; a non-negligible imaginary part is an error.
pub fn witness_value(w: &HermitianView, rho: &DensityMatrix) -> Result<f64> {
    if w.side() != rho.side() {
        return Err(Error::DimensionMismatch(format!("witness side {} vs state side {}", w.side(), rho.side())));
    }
    let tr = w.matrix().trace_product(rho.matrix())?;
    if tr.im.abs() >= 1e-12 {
        return Err(Error::NonRealTrace { imag: tr.im });
    }
    Ok(tr.re)
}
