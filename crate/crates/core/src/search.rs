//! Randomized search for PT-invariant 3x3 states `rho = T^t T` whose
//! entanglement is flagged by one witness but not by another.
//!
//! Each iteration draws a real upper-triangular `T` on a sparsity pattern,
//! drives the PT residual `|(T^t T)^PT - T^t T|_F` to zero by coordinate
//! descent, and keeps the state if `Tr(W_detect rho) < 0 <= Tr(W_reject rho)`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::maps::{apply_to_first_factor, build_map, cj_witness, witness_value, MapParams};
use crate::mat::{min_eigval, partial_transpose, DensityMatrix, Subsystem, UpperTriangular};
use crate::states::{t_factor_osaka, OsakaFamilyParams, OSAKA_T_PATTERN};

const SIDE: usize = 9;
const DIMS: (usize, usize) = (3, 3);

/// Default center of the initial draws: the factor of `rho(y)` at this `y`.
pub const DEFAULT_CENTER_Y: f64 = 0.35;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// Positions of `T` allowed to be nonzero, `col >= row`, 0-based.
    pub pattern: Vec<(usize, usize)>,
    pub seed: u64,
    pub max_iters: usize,
    pub residual_tol: f64,
    pub witness_detect: MapParams,
    pub witness_reject: MapParams,
    /// Interval of the uniform draw added to `center` on each pattern entry.
    pub value_range: (f64, f64),
    /// Optional base point of the draws; `None` draws entries directly from `value_range`.
    pub center: Option<UpperTriangular>,
    /// Coordinate-descent sweeps per residual minimization.
    pub max_sweeps: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            pattern: OSAKA_T_PATTERN.to_vec(),
            seed: 0,
            max_iters: 500,
            residual_tol: 1e-10,
            witness_detect: MapParams::osaka_subfamily(6.0),
            witness_reject: MapParams::ChoiI { mu: 1.0 },
            value_range: (-0.5, 0.5),
            center: Some(t_factor_osaka(&OsakaFamilyParams::new(DEFAULT_CENTER_Y).expect("positive"))),
            max_sweeps: 500,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        for &(r, c) in &self.pattern {
            if r >= SIDE || c >= SIDE || c < r {
                return Err(Error::InvalidParameter(format!(
                    "pattern position ({r}, {c}) must satisfy row <= col < {SIDE}"
                )));
            }
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidParameter("residual_tol must be positive".into()));
        }
        let (lo, hi) = self.value_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidParameter(format!("value_range ({lo}, {hi}) is not an interval")));
        }
        if let Some(c) = &self.center {
            if c.side() != SIDE {
                return Err(Error::DimensionMismatch(format!("center has side {}", c.side())));
            }
        }
        self.witness_detect.validate()?;
        self.witness_reject.validate()?;
        Ok(())
    }

    /// Applies one `key = value` setting.
    ///
    /// Keys: `seed`, `max_iters`, `residual_tol`, `detect`, `reject`,
    /// `value_range` (`lo:hi`), `center_y` (number or `none`), `max_sweeps`,
    /// and `pattern` (`factor` for the rho(y) factor, `diagonal`, or `r,c;r,c;...` with 1-based
    /// positions).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |what: &str| Error::InvalidParameter(format!("bad {what} value {value:?}"));
        match key.trim() {
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "max_iters" => self.max_iters = value.parse().map_err(|_| bad("max_iters"))?,
            "max_sweeps" => self.max_sweeps = value.parse().map_err(|_| bad("max_sweeps"))?,
            "residual_tol" => self.residual_tol = value.parse().map_err(|_| bad("residual_tol"))?,
            "detect" => self.witness_detect = value.parse()?,
            "reject" => self.witness_reject = value.parse()?,
            "value_range" => {
                let (lo, hi) = value.split_once(':').ok_or_else(|| bad("value_range"))?;
                self.value_range = (
                    lo.trim().parse().map_err(|_| bad("value_range"))?,
                    hi.trim().parse().map_err(|_| bad("value_range"))?,
                );
            }
            "center_y" => {
                self.center = if value.eq_ignore_ascii_case("none") {
                    None
                } else {
                    let y: f64 = value.parse().map_err(|_| bad("center_y"))?;
                    Some(t_factor_osaka(&OsakaFamilyParams::new(y)?))
                }
            }
            "pattern" => self.pattern = parse_pattern(value)?,
            other => return Err(Error::InvalidParameter(format!("unknown search key {other:?}"))),
        }
        Ok(())
    }

    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("line {}: expected key=value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }
}

pub fn parse_pattern(text: &str) -> Result<Vec<(usize, usize)>> {
    match text {
        "factor" => Ok(OSAKA_T_PATTERN.to_vec()),
        "diagonal" => Ok((0..SIDE).map(|i| (i, i)).collect()),
        list => list
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|pos| {
                let err = || Error::InvalidParameter(format!("bad pattern position {pos:?}"));
                let (r, c) = pos.split_once(',').ok_or_else(err)?;
                let r: usize = r.trim().parse().map_err(|_| err())?;
                let c: usize = c.trim().parse().map_err(|_| err())?;
                if r == 0 || c == 0 {
                    return Err(err());
                }
                Ok((r - 1, c - 1))
            })
            .collect(),
    }
}

/// `|(T^dagger T)^PT - T^dagger T|_F`, transpose on the second factor.
pub fn ppt_residual(t: &UpperTriangular) -> f64 {
    let rho = t.gram();
    match partial_transpose(&rho, DIMS, Subsystem::Second) {
        Ok(pt) => pt.distance(&rho),
        Err(_) => f64::INFINITY,
    }
}

/// Real `PT(M) - M` for row-major 9x9 `m`.
fn pt_defect(m: &[f64; 81]) -> [f64; 81] {
    let mut out = [0.0; 81];
    for r in 0..SIDE {
        for c in 0..SIDE {
            let (a, b) = (r / 3, r % 3);
            let (a2, b2) = (c / 3, c % 3);
            out[r * SIDE + c] = m[(a * 3 + b2) * SIDE + a2 * 3 + b] - m[r * SIDE + c];
        }
    }
    out
}

fn real_entries(t: &UpperTriangular) -> [f64; 81] {
    let mut v = [0.0; 81];
    for i in 0..SIDE {
        for j in i..SIDE {
            v[i * SIDE + j] = t.get(i, j).re;
        }
    }
    v
}

fn gram_real(t: &[f64; 81]) -> [f64; 81] {
    let mut g = [0.0; 81];
    for i in 0..SIDE {
        for j in 0..SIDE {
            let mut acc = 0.0;
            for k in 0..=i.min(j) {
                acc += t[k * SIDE + i] * t[k * SIDE + j];
            }
            g[i * SIDE + j] = acc;
        }
    }
    g
}

fn residual_real(t: &[f64; 81]) -> f64 {
    pt_defect(&gram_real(t)).iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn normalize_real(t: &mut [f64; 81]) -> bool {
    let norm = t.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= f64::MIN_POSITIVE || !norm.is_finite() {
        return false;
    }
    t.iter_mut().for_each(|v| *v /= norm);
    true
}

/// Exact minimization of the residual over entry `(p, q)`.
///
/// With `T = T' + v E_pq`, `T^t T = T'^t T' + v (E_qp T' + T'^t E_pq) + v^2 E_qq`.
/// `E_qq` is PT-invariant, so the residual is affine in `v`.
fn coordinate_step(t: &mut [f64; 81], p: usize, q: usize) {
    t[p * SIDE + q] = 0.0;
    let base = pt_defect(&gram_real(t));
    // E_qp T' + T'^t E_pq: row q gets row p of T', column q gets it too.
    let mut lin = [0.0; 81];
    for j in 0..SIDE {
        lin[q * SIDE + j] += t[p * SIDE + j];
        lin[j * SIDE + q] += t[p * SIDE + j];
    }
    let dir = pt_defect(&lin);
    let dd: f64 = dir.iter().map(|v| v * v).sum();
    let v = if dd > 0.0 { -base.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>() / dd } else { 0.0 };
    t[p * SIDE + q] = v;
}

fn check_pattern(t: &UpperTriangular, pattern: &[(usize, usize)]) -> Result<()> {
    if t.side() != SIDE {
        return Err(Error::DimensionMismatch(format!("T has side {}, expected {SIDE}", t.side())));
    }
    for i in 0..SIDE {
        for j in i..SIDE {
            let z = t.get(i, j);
            if z.im != 0.0 {
                return Err(Error::InvalidParameter(format!("T[{i},{j}] is not real")));
            }
            if z.re != 0.0 && !pattern.contains(&(i, j)) {
                return Err(Error::InvalidParameter(format!("T[{i},{j}] is outside the pattern")));
            }
        }
    }
    Ok(())
}

/// Drives the PT residual of `t0` below `cfg.residual_tol`, touching only
/// pattern entries. `T` is rescaled to unit Frobenius norm after every sweep;
/// the residual is measured on that normalized `T`.
pub fn minimize_residual(t0: &UpperTriangular, cfg: &SearchConfig) -> Result<UpperTriangular> {
    check_pattern(t0, &cfg.pattern)?;
    let mut t = real_entries(t0);
    if !normalize_real(&mut t) {
        return Err(Error::InvalidParameter("starting T is zero".into()));
    }
    if residual_real(&t) <= cfg.residual_tol {
        return Ok(t0.clone());
    }
    let mut best = f64::INFINITY;
    for _ in 0..cfg.max_sweeps {
        for &(p, q) in &cfg.pattern {
            coordinate_step(&mut t, p, q);
        }
        if !normalize_real(&mut t) {
            break;
        }
        let r = residual_real(&t);
        best = best.min(r);
        if r <= cfg.residual_tol {
            let entries: Vec<_> = cfg.pattern.iter().map(|&(i, j)| (i, j, t[i * SIDE + j])).collect();
            return UpperTriangular::from_real_entries(SIDE, &entries);
        }
    }
    Err(Error::ResidualNotConverged { best_residual: best })
}

/// A PT-invariant state flagged by the detecting witness only.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub t: UpperTriangular,
    pub rho: DensityMatrix,
    pub residual: f64,
    pub w_detect: f64,
    pub w_reject: f64,
    /// Least eigenvalue of `(Phi_detect (x) 1) rho`.
    pub min_eig_detect: f64,
}

/// Why [`evaluate_candidate`] turned a factor down.
#[derive(Clone, Debug, PartialEq)]
pub enum Rejection {
    ZeroTrace,
    Residual(f64),
    NotDetected { w_detect: f64 },
    AlsoDetected { w_reject: f64 },
    Numeric(Error),
}

impl From<Error> for Rejection {
    fn from(e: Error) -> Self {
        Rejection::Numeric(e)
    }
}

/// Prebuilt witnesses for one configuration.
struct Witnesses {
    detect_map: crate::maps::Superoperator,
    detect: crate::mat::HermitianView,
    reject: crate::mat::HermitianView,
}

impl Witnesses {
    fn new(cfg: &SearchConfig) -> Result<Self> {
        let detect_map = build_map(&cfg.witness_detect)?;
        let detect = cj_witness(&detect_map)?;
        let reject = cj_witness(&build_map(&cfg.witness_reject)?)?;
        Ok(Self { detect_map, detect, reject })
    }

    fn evaluate(&self, t: &UpperTriangular, cfg: &SearchConfig) -> std::result::Result<Candidate, Rejection> {
        let norm = t.frobenius_norm();
        if norm <= f64::MIN_POSITIVE {
            return Err(Rejection::ZeroTrace);
        }
        // trace(T^dagger T) = |T|_F^2, so a unit-norm T gives a unit-trace state
        let t = t.scaled(1.0 / norm);
        let residual = ppt_residual(&t);
        if !(residual <= cfg.residual_tol) {
            return Err(Rejection::Residual(residual));
        }
        let rho = DensityMatrix::from_unnormalized(t.gram(), DIMS)?;
        let w_detect = witness_value(&self.detect, &rho)?;
        if !(w_detect < 0.0) {
            return Err(Rejection::NotDetected { w_detect });
        }
        let w_reject = witness_value(&self.reject, &rho)?;
        if !(w_reject >= 0.0) {
            return Err(Rejection::AlsoDetected { w_reject });
        }
        let min_eig_detect = min_eigval(&apply_to_first_factor(&self.detect_map, &rho)?)?;
        Ok(Candidate { t, rho, residual, w_detect, w_reject, min_eig_detect })
    }
}

/// Normalizes `rho = T^t T / Tr` and applies the two-witness filter.
pub fn evaluate_candidate(t: &UpperTriangular, cfg: &SearchConfig) -> std::result::Result<Candidate, Rejection> {
    Witnesses::new(cfg)?.evaluate(t, cfg)
}

/// An accepted candidate with the iteration that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Found {
    pub iteration: usize,
    /// Generator seed of that iteration, `cfg.seed + iteration`.
    pub seed: u64,
    pub candidate: Candidate,
}

fn iteration_seed(master: u64, iteration: usize) -> u64 {
    master.wrapping_add(iteration as u64)
}

fn draw(cfg: &SearchConfig, rng: &mut ChaCha8Rng) -> UpperTriangular {
    let (lo, hi) = cfg.value_range;
    let mut t = UpperTriangular::from_real_entries(SIDE, &[]).expect("empty");
    for &(i, j) in &cfg.pattern {
        let base = cfg.center.as_ref().map_or(0.0, |c| c.get(i, j).re);
        let noise = if hi > lo { rng.gen_range(lo..hi) } else { lo };
        t.set(i, j, Complex64::new(base + noise, 0.0));
    }
    t
}

fn search_iteration(cfg: &SearchConfig, w: &Witnesses, iteration: usize) -> Option<Found> {
    let seed = iteration_seed(cfg.seed, iteration);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t0 = draw(cfg, &mut rng);
    let t = minimize_residual(&t0, cfg).ok()?;
    let candidate = w.evaluate(&t, cfg).ok()?;
    if candidate.min_eig_detect >= 0.0 {
        log::warn!(
            "iteration {iteration}: witness trace {:.3e} < 0 but (Phi (x) 1) rho has min eigenvalue {:.3e} >= 0",
            candidate.w_detect,
            candidate.min_eig_detect
        );
    }
    Some(Found { iteration, seed, candidate })
}

/// Runs `cfg.max_iters` independent draws; iteration `k` uses seed
/// `cfg.seed + k`. Results are ordered by iteration regardless of how the
/// iterations were scheduled.
pub fn run_search(cfg: &SearchConfig) -> Result<Vec<Found>> {
    cfg.validate()?;
    let w = Witnesses::new(cfg)?;
    Ok((0..cfg.max_iters).into_par_iter().filter_map(|k| search_iteration(cfg, &w, k)).collect())
}

/// Header of the candidate ledger: metrics then the 45 upper-triangular
/// entries of `T` (1-based names, row-major).
pub fn ledger_header() -> String {
    let mut s = String::from("iter,seed,residual,w_detect,w_reject,min_eig_detect");
    for i in 1..=SIDE {
        for j in i..=SIDE {
            let _ = write!(s, ",t{i}_{j}");
        }
    }
    s
}

/// One ledger row, floats at 17 significant digits.
pub fn ledger_row(found: &Found) -> String {
    let c = &found.candidate;
    let mut s = format!(
        "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
        found.iteration, found.seed, c.residual, c.w_detect, c.w_reject, c.min_eig_detect
    );
    for v in c.t.upper_entries() {
        let _ = write!(s, ",{v:.16e}");
    }
    s
}
