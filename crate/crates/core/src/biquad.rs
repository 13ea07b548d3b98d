//! Real bi-quadratic forms `F(X:Y) = sum C[i][j][k][l] x_i x_j y_k y_l` and
//! their correspondence with linear maps, `F(X:Y) = <Y| S(X X^T) |Y>`.
//!
//! Coefficients are stored canonically: symmetric under `i <-> j` and under
//! `k <-> l`. Two forms are equal as polynomials iff their canonical
//! coefficient tensors are equal.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::maps::Superoperator;
use crate::mat::ComplexMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct BiQuadraticForm {
    n_x: usize,
    n_y: usize,
    coeff: Vec<f64>,
}

/// Which variable group a scaling applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    X,
    Y,
}

impl BiQuadraticForm {
    /// Builds a form from raw (not necessarily symmetric) coefficients.
    pub fn from_fn(n_x: usize, n_y: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut raw = vec![0.0; n_x * n_x * n_y * n_y];
        for i in 0..n_x {
            for j in 0..n_x {
                for k in 0..n_y {
                    for l in 0..n_y {
                        raw[((i * n_x + j) * n_y + k) * n_y + l] = f(i, j, k, l);
                    }
                }
            }
        }
        Self::from_raw(n_x, n_y, raw)
    }

    fn from_raw(n_x: usize, n_y: usize, raw: Vec<f64>) -> Self {
        let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n_x + j) * n_y + k) * n_y + l;
        let mut coeff = vec![0.0; raw.len()];
        for i in 0..n_x {
            for j in 0..n_x {
                for k in 0..n_y {
                    for l in 0..n_y {
                        coeff[idx(i, j, k, l)] = 0.25
                            * (raw[idx(i, j, k, l)]
                                + raw[idx(j, i, k, l)]
                                + raw[idx(i, j, l, k)]
                                + raw[idx(j, i, l, k)]);
                    }
                }
            }
        }
        Self { n_x, n_y, coeff }
    }

    /// Adds `value` to the monomial `x_i x_j y_k y_l`.
    pub fn from_monomials(n_x: usize, n_y: usize, terms: &[(usize, usize, usize, usize, f64)]) -> Self {
        let mut raw = vec![0.0; n_x * n_x * n_y * n_y];
        for &(i, j, k, l, v) in terms {
            raw[((i * n_x + j) * n_y + k) * n_y + l] += v;
        }
        Self::from_raw(n_x, n_y, raw)
    }

    #[inline]
    pub fn n_x(&self) -> usize {
        self.n_x
    }

    #[inline]
    pub fn n_y(&self) -> usize {
        self.n_y
    }

    #[inline]
    pub fn coeff(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.coeff[((i * self.n_x + j) * self.n_y + k) * self.n_y + l]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeff
    }

    /// Largest coefficient difference; infinite when shapes differ.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        if (self.n_x, self.n_y) != (other.n_x, other.n_y) {
            return f64::INFINITY;
        }
        self.coeff.iter().zip(&other.coeff).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.n_x || y.len() != self.n_y {
            return Err(Error::DimensionMismatch(format!(
                "form on {}+{} variables evaluated at {}+{}",
                self.n_x,
                self.n_y,
                x.len(),
                y.len()
            )));
        }
        Ok(self.eval_unchecked(x, y))
    }

    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        let mut p = 0;
        for &xi in x {
            for &xj in x {
                let xx = xi * xj;
                for &yk in y {
                    for &yl in y {
                        acc += self.coeff[p] * xx * yk * yl;
                        p += 1;
                    }
                }
            }
        }
        acc
    }
}

impl Add for &BiQuadraticForm {
    type Output = BiQuadraticForm;

    fn add(self, rhs: &BiQuadraticForm) -> BiQuadraticForm {
        assert_eq!((self.n_x, self.n_y), (rhs.n_x, rhs.n_y), "form shapes differ");
        BiQuadraticForm {
            n_x: self.n_x,
            n_y: self.n_y,
            coeff: self.coeff.iter().zip(&rhs.coeff).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &BiQuadraticForm {
    type Output = BiQuadraticForm;

    fn sub(self, rhs: &BiQuadraticForm) -> BiQuadraticForm {
        self + &(rhs * -1.0)
    }
}

impl Mul<f64> for &BiQuadraticForm {
    type Output = BiQuadraticForm;

    fn mul(self, k: f64) -> BiQuadraticForm {
        BiQuadraticForm { n_x: self.n_x, n_y: self.n_y, coeff: self.coeff.iter().map(|c| c * k).collect() }
    }
}

/// Choi's form: squares `x_i^2 y_i^2`, cross terms `-2 x_i x_j y_i y_j` over
/// cyclic pairs, and `mu x_i^2 y_{i+1}^2`.
pub fn choi_form(mu: f64) -> Result<BiQuadraticForm> {
    if !(mu >= 1.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("mu = {mu} must be >= 1")));
    }
    let mut terms = Vec::new();
    for i in 0..3 {
        let j = (i + 1) % 3;
        terms.push((i, i, i, i, 1.0));
        terms.push((i, j, i, j, -2.0));
        terms.push((i, i, j, j, mu));
    }
    Ok(BiQuadraticForm::from_monomials(3, 3, &terms))
}

/// Real part of `<v| s(u u^T) |v>`.
fn quad(s: &Superoperator, u: &[f64], v: &[f64]) -> f64 {
    let uc: Vec<Complex64> = u.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    let out = s.apply(&ComplexMatrix::outer(&uc)).expect("dimension checked by caller");
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..v.len() {
        for l in 0..v.len() {
            acc += out[(k, l)] * v[k] * v[l];
        }
    }
    acc.re
}

/// Form of a map, obtained by polarizing `<Y| s(X X^T) |Y>` on basis vectors.
pub fn form_from_map(s: &Superoperator) -> BiQuadraticForm {
    let (n, m) = (s.dim_in(), s.dim_out());
    let pair = |len: usize, a: usize, b: usize, sign: f64| {
        let mut v = vec![0.0; len];
        v[a] += 1.0;
        v[b] += sign;
        v
    };
    BiQuadraticForm::from_fn(n, m, |i, j, k, l| {
        let (xp, xm) = (pair(n, i, j, 1.0), pair(n, i, j, -1.0));
        let (yp, ym) = (pair(m, k, l, 1.0), pair(m, k, l, -1.0));
        (quad(s, &xp, &yp) - quad(s, &xp, &ym) - quad(s, &xm, &yp) + quad(s, &xm, &ym)) / 16.0
    })
}

/// Map of a form.
///
/// On real symmetric inputs the result satisfies `<Y|S(X X^T)|Y> = F(X:Y)`.
/// The skew part is fixed by placing each mixed coefficient of
/// `x_i x_j y_k y_l` (`i != j`, `k != l`) on the "aligned" matrix unit: the
/// image of `|i><j|` gets entry `(k, l)` when `i < j` and `k < l` (or both
/// reversed), and nothing on the crossed entry. This reproduces the Choi,
/// Osaka and scaled Choi maps exactly; the result is real and satisfies
/// `S(A^T) = S(A)^T`, hence preserves hermiticity.
pub fn map_from_form(f: &BiQuadraticForm) -> Superoperator {
    let (n, m) = (f.n_x, f.n_y);
    Superoperator::from_unit_images(n, m, |i, j| {
        ComplexMatrix::from_fn(m, m, |k, l| {
            let c = f.coeff(i, j, k, l);
            let v = if i == j || k == l {
                c
            } else if (i < j) == (k < l) {
                2.0 * c
            } else {
                0.0
            };
            Complex64::new(v, 0.0)
        })
    })
}

/// Substitutes `x_i -> s_i x_i` (or `y_k -> s_k y_k`).
pub fn scale_variables(f: &BiQuadraticForm, scales: &[f64], side: Side) -> Result<BiQuadraticForm> {
    let expected = match side {
        Side::X => f.n_x,
        Side::Y => f.n_y,
    };
    if scales.len() != expected {
        return Err(Error::DimensionMismatch(format!("{} scales for {expected} variables", scales.len())));
    }
    if let Some(p) = scales.iter().position(|&s| s == 0.0 || !s.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale {p} is {}; scales must be finite and nonzero", scales[p])));
    }
    let mut out = f.clone();
    let (nx, ny) = (f.n_x, f.n_y);
    for i in 0..nx {
        for j in 0..nx {
            for k in 0..ny {
                for l in 0..ny {
                    let factor = match side {
                        Side::X => scales[i] * scales[j],
                        Side::Y => scales[k] * scales[l],
                    };
                    out.coeff[((i * nx + j) * ny + k) * ny + l] *= factor;
                }
            }
        }
    }
    Ok(out)
}

/// Result of [`numeric_min`]: the smallest value found, the unit vectors that
/// attain it and the index of the start that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct FormMinimum {
    pub value: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub start: usize,
}

const DESCENT_ITERS: usize = 200;
const INITIAL_STEP: f64 = 0.5;

fn normalized(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter().map(|a| a / n).collect()
}

/// Coordinate descent of `F(X/|X|, Y/|Y|)` from `(x0, y0)`.
///
/// Each iteration tries `+-step` on every coordinate and halves the step after
/// a pass without improvement.
pub fn local_min(f: &BiQuadraticForm, x0: &[f64], y0: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    f.evaluate(x0, y0)?;
    let nx = f.n_x;
    let objective = |z: &[f64]| {
        let (x, y) = z.split_at(nx);
        let (nxs, nys) = (x.iter().map(|a| a * a).sum::<f64>(), y.iter().map(|a| a * a).sum::<f64>());
        if nxs == 0.0 || nys == 0.0 {
            return f64::INFINITY;
        }
        f.eval_unchecked(x, y) / (nxs * nys)
    };
    let mut z: Vec<f64> = normalized(x0).into_iter().chain(normalized(y0)).collect();
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("starting vectors must be nonzero".into()));
    }
    let mut best = objective(&z);
    let mut step = INITIAL_STEP;
    for _ in 0..DESCENT_ITERS {
        let mut improved = false;
        for c in 0..z.len() {
            for dir in [step, -step] {
                let old = z[c];
                z[c] = old + dir;
                let val = objective(&z);
                if val < best {
                    best = val;
                    improved = true;
                    break;
                }
                z[c] = old;
            }
        }
        if !improved {
            step *= 0.5;
        }
        // keep the iterate well scaled; the objective is scale-invariant
        let (x, y) = z.split_at(nx);
        let rescaled: Vec<f64> = normalized(x).into_iter().chain(normalized(y)).collect();
        z = rescaled;
    }
    let (x, y) = z.split_at(nx);
    let (x, y) = (normalized(x), normalized(y));
    let value = f.eval_unchecked(&x, &y);
    Ok((value, x, y))
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>();
        if norm > 1e-6 {
            return normalized(&v);
        }
    }
}

/// Multi-start minimum of `F` over pairs of unit vectors.
///
/// Start `k` is seeded with `seed + k`; starts run independently and the
/// smallest value wins, ties going to the lower start index.
pub fn numeric_min(f: &BiQuadraticForm, n_starts: usize, seed: u64) -> FormMinimum {
    let results: Vec<FormMinimum> = (0..n_starts)
        .into_par_iter()
        .map(|start| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(start as u64));
            let x0 = random_unit(&mut rng, f.n_x);
            let y0 = random_unit(&mut rng, f.n_y);
            let (value, x, y) = local_min(f, &x0, &y0).expect("random unit starts are valid");
            FormMinimum { value, x, y, start }
        })
        .collect();
    results.into_iter().min_by(|a, b| a.value.total_cmp(&b.value).then(a.start.cmp(&b.start))).unwrap_or(FormMinimum {
        value: f64::INFINITY,
        x: Vec::new(),
        y: Vec::new(),
        start: 0,
    })
}
