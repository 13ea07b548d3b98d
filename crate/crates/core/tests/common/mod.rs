//! Reference computations that share no code with the library routines they
//! check.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use witnesskit::biquad::BiQuadraticForm;
use witnesskit::mat::ComplexMatrix;

/// Roots of `l^3 - c2 l^2 + c1 l - c0` known to be real, ascending.
pub fn real_cubic_roots(c2: f64, c1: f64, c0: f64) -> [f64; 3] {
    // depressed cubic l = u + c2/3: u^3 + p u + q = 0
    let m = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = -2.0 * m * m * m + c1 * m - c0;
    if p.abs() < 1e-300 {
        let u = (-q).cbrt();
        return [u + m; 3];
    }
    let r = (-p / 3.0).max(0.0).sqrt();
    let arg = if r > 0.0 { (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0) } else { 0.0 };
    let phi = arg.acos() / 3.0;
    let tau = std::f64::consts::TAU / 3.0;
    let mut roots = [0, 1, 2].map(|k| 2.0 * r * (phi - tau * k as f64).cos() + m);
    roots.sort_by(f64::total_cmp);
    roots
}

/// Eigenvalues of a 3x3 Hermitian matrix from its characteristic polynomial.
pub fn eig3(a: &ComplexMatrix) -> [f64; 3] {
    let e = |i: usize, j: usize| a[(i, j)];
    let tr = (e(0, 0) + e(1, 1) + e(2, 2)).re;
    let minors = (e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0))
        + (e(0, 0) * e(2, 2) - e(0, 2) * e(2, 0))
        + (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1));
    let det = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
    real_cubic_roots(tr, minors.re, det.re)
}

/// Householder reduction to Hermitian tridiagonal form: real diagonal and
/// squared moduli of the off-diagonal.
#[allow(clippy::needless_range_loop)]
fn tridiagonalize(a: &ComplexMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows();
    let mut m: Vec<Vec<Complex64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| m[i][k]).collect();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        let mut v = x.clone();
        v[0] += phase * norm;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vn);
        // H = I - 2 v v^H on rows/cols k+1..n; m <- H m H
        let idx: Vec<usize> = (k + 1..n).collect();
        for col in 0..n {
            let s: Complex64 = idx.iter().zip(&v).map(|(&i, vi)| vi.conj() * m[i][col]).sum();
            for (&i, vi) in idx.iter().zip(&v) {
                m[i][col] -= 2.0 * vi * s;
            }
        }
        for row in m.iter_mut() {
            let s: Complex64 = idx.iter().zip(&v).map(|(&j, vj)| row[j] * vj).sum();
            for (&j, vj) in idx.iter().zip(&v) {
                row[j] -= 2.0 * s * vj.conj();
            }
        }
    }
    let d = (0..n).map(|i| m[i][i].re).collect();
    let e2 = (1..n).map(|i| m[i][i - 1].norm_sqr()).collect();
    (d, e2)
}

/// Number of eigenvalues below `sigma` (Sturm sequence of the tridiagonal form).
fn count_below(d: &[f64], e2: &[f64], sigma: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let prev = if i == 0 { 0.0 } else { e2[i - 1] / q };
        q = d[i] - sigma - prev;
        if q == 0.0 {
            q = -1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Ascending eigenvalues of a Hermitian matrix by Householder tridiagonalization
/// and Sturm bisection.
pub fn sturm_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    let (d, e2) = tridiagonalize(a);
    let n = d.len();
    let radius = (0..n)
        .map(|i| {
            let left = if i > 0 { e2[i - 1].sqrt() } else { 0.0 };
            let right = if i + 1 < n { e2[i].sqrt() } else { 0.0 };
            (d[i] - left - right, d[i] + left + right)
        })
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| (lo.min(a), hi.max(b)));
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (radius.0 - 1e-12, radius.1 + 1e-12);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if count_below(&d, &e2, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

pub fn random_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> =
            (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Minimum of a 3x3 form over a spherical grid in `X`, with the exact
/// minimum over unit `Y` at each grid point (least eigenvalue of
/// `M_kl = sum_ij C_ijkl x_i x_j`).
pub fn grid_form_min(f: &BiQuadraticForm, step: f64) -> f64 {
    assert_eq!((f.n_x(), f.n_y()), (3, 3));
    let n_theta = (std::f64::consts::PI / step).ceil() as usize;
    let n_phi = (std::f64::consts::TAU / step).ceil() as usize;
    let mut best = f64::INFINITY;
    for a in 0..=n_theta {
        let theta = std::f64::consts::PI * a as f64 / n_theta as f64;
        for b in 0..n_phi {
            let phi = std::f64::consts::TAU * b as f64 / n_phi as f64;
            let x = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            let m = ComplexMatrix::from_fn(3, 3, |k, l| {
                let mut acc = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        acc += f.coeff(i, j, k, l) * x[i] * x[j];
                    }
                }
                Complex64::new(acc, 0.0)
            });
            best = best.min(eig3(&m)[0]);
        }
    }
    best
}
