//! Minimum-eigenvalue sweeps of `(Phi (x) 1) rho` over the state families,
//! sign-crossing location by bisection, and noise robustness.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::maps::{apply_to_first_factor, build_map, MapParams};
use crate::mat::{min_eigval, DensityMatrix};
use crate::states::{mix_with_noise, rho_choi_family, rho_osaka_family, ChoiFamilyParams, OsakaFamilyParams};

/// Default bisection tolerance, in parameter units.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Default `s` range of the Osaka subfamily surface.
pub const OSAKA_SURFACE_S: (f64, f64) = (1.0, 12.0);
/// Default `y` range of the Osaka subfamily surface.
pub const OSAKA_SURFACE_Y: (f64, f64) = (0.05, 1.0);
/// Points of the sign scan run before every robustness bisection.
pub const ROBUSTNESS_SCAN: usize = 50;

/// Named parameter values, e.g. `{"x": 0.6, "t": 0.05}`.
pub type Point = BTreeMap<String, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `rho(x, t)`.
    Choi,
    /// `rho(y)`.
    Osaka,
}

impl Family {
    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            Family::Choi => &["x", "t"],
            Family::Osaka => &["y"],
        }
    }

    pub fn state(&self, p: &Point) -> Result<DensityMatrix> {
        match self {
            Family::Choi => rho_choi_family(&ChoiFamilyParams::new(lookup(p, "x")?, lookup(p, "t")?)?),
            Family::Osaka => rho_osaka_family(&OsakaFamilyParams::new(lookup(p, "y")?)?),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Choi => "choi",
            Family::Osaka => "osaka",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "choi" => Ok(Family::Choi),
            "osaka" => Ok(Family::Osaka),
            other => Err(Error::InvalidParameter(format!("unknown family {other:?} (choi, osaka)"))),
        }
    }
}

fn lookup(p: &Point, name: &str) -> Result<f64> {
    p.get(name).copied().ok_or_else(|| Error::InvalidParameter(format!("parameter {name:?} is not set")))
}

/// A map that is either fixed or drawn from the subfamily `Osaka(1, s, 1/s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MapTemplate {
    Fixed(MapParams),
    /// Parameter `s`, spelled `osaka1x`.
    OsakaSubfamily,
}

impl MapTemplate {
    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            MapTemplate::Fixed(_) => &[],
            MapTemplate::OsakaSubfamily => &["s"],
        }
    }

    pub fn resolve(&self, p: &Point) -> Result<MapParams> {
        match self {
            MapTemplate::Fixed(m) => Ok(*m),
            MapTemplate::OsakaSubfamily => Ok(MapParams::osaka_subfamily(lookup(p, "s")?)),
        }
    }
}

impl From<MapParams> for MapTemplate {
    fn from(m: MapParams) -> Self {
        MapTemplate::Fixed(m)
    }
}

impl fmt::Display for MapTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapTemplate::Fixed(m) => m.fmt(f),
            MapTemplate::OsakaSubfamily => f.write_str("osaka1x"),
        }
    }
}

impl FromStr for MapTemplate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "osaka1x" {
            Ok(MapTemplate::OsakaSubfamily)
        } else {
            s.parse().map(MapTemplate::Fixed)
        }
    }
}

/// One grid axis: `steps` equispaced points from `lo` to `hi` inclusive.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(name: &str, lo: f64, hi: f64, steps: usize) -> Result<Self> {
        let axis = Self { name: name.to_string(), lo, hi, steps };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidParameter(format!(
                "axis {}: need lo < hi, got [{}, {}]",
                self.name, self.lo, self.hi
            )));
        }
        if self.steps < 2 {
            return Err(Error::InvalidParameter(format!("axis {}: need at least 2 steps", self.name)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let span = self.hi - self.lo;
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.hi } else { self.lo + span * k as f64 / (self.steps - 1) as f64 })
            .collect()
    }
}

/// Parses `name:lo:hi[:steps]`, `steps` defaulting to `default_steps`.
impl Axis {
    pub fn parse(text: &str, default_steps: usize) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let num = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad number {s:?} in axis {text:?}")))
        };
        match parts.as_slice() {
            [name, lo, hi] => Axis::new(name, num(lo)?, num(hi)?, default_steps),
            [name, lo, hi, steps] => {
                let steps =
                    steps.parse().map_err(|_| Error::InvalidParameter(format!("bad step count in axis {text:?}")))?;
                Axis::new(name, num(lo)?, num(hi)?, steps)
            }
            _ => Err(Error::InvalidParameter(format!("axis {text:?} is not name:lo:hi[:steps]"))),
        }
    }
}

/// Checks that `names` (axes plus fixed values) cover exactly the parameters
/// of `family` and `map`.
fn check_names<'a>(family: Family, map: &MapTemplate, names: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut wanted: Vec<&str> = family.param_names().iter().chain(map.param_names()).copied().collect();
    for name in names {
        match wanted.iter().position(|w| *w == name) {
            Some(i) => {
                wanted.remove(i);
            }
            None => {
                return Err(Error::InvalidParameter(format!(
                    "parameter {name:?} does not belong to family {family} with map {map}, or is given twice"
                )))
            }
        }
    }
    if let Some(missing) = wanted.first() {
        return Err(Error::InvalidParameter(format!("parameter {missing:?} is not set")));
    }
    Ok(())
}

/// Least eigenvalue of `(Phi (x) 1) rho` at one point.
pub fn lambda_min_at(family: Family, map: &MapTemplate, p: &Point) -> Result<f64> {
    let rho = family.state(p)?;
    let s = build_map(&map.resolve(p)?)?;
    min_eigval(&apply_to_first_factor(&s, &rho)?)
}

fn with_value(fixed: &Point, name: &str, v: f64) -> Point {
    let mut p = fixed.clone();
    p.insert(name.to_string(), v);
    p
}

/// `(value, lambda_min)` along one axis, in grid order.
pub fn min_eig_curve(family: Family, map: &MapTemplate, axis: &Axis, fixed: &Point) -> Result<Vec<(f64, f64)>> {
    axis.validate()?;
    check_names(family, map, fixed.keys().map(String::as_str).chain([axis.name.as_str()]))?;
    axis.values()
        .into_par_iter()
        .map(|v| Ok((v, lambda_min_at(family, map, &with_value(fixed, &axis.name, v))?)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub family: Family,
    pub map: MapTemplate,
    pub axis1: Axis,
    pub axis2: Axis,
    pub fixed: Point,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        self.axis2.validate()?;
        check_names(
            self.family,
            &self.map,
            self.fixed.keys().map(String::as_str).chain([self.axis1.name.as_str(), self.axis2.name.as_str()]),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepMetadata {
    pub family: String,
    pub map: String,
    /// Seconds since the Unix epoch when the sweep finished.
    pub timestamp: u64,
    pub version: String,
}

impl fmt::Display for SweepMetadata {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "family={} map={} timestamp={} version={}", self.family, self.map, self.timestamp, self.version)
    }
}

/// Surface values in row-major order: `axis1` outer, `axis2` inner.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub coords: Vec<(f64, f64)>,
    pub lambda_min: Vec<f64>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    /// CSV with a comment line naming the map and fixed parameters, a header
    /// row, then one row per cell. The timestamp is left out so that output
    /// is reproducible.
    pub fn to_csv(&self) -> String {
        let s = &self.spec;
        let mut out = format!("# family={} map={}", s.family, s.map);
        for (k, v) in &s.fixed {
            let _ = write!(out, " {k}={v}");
        }
        let _ = writeln!(out, "\n{},{},lambda_min", s.axis1.name, s.axis2.name);
        for ((a, b), l) in self.coords.iter().zip(&self.lambda_min) {
            let _ = writeln!(out, "{a:.16e},{b:.16e},{l:.16e}");
        }
        out
    }
}

pub fn min_eig_surface(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let coords: Vec<(f64, f64)> =
        spec.axis1.values().into_iter().flat_map(|a| spec.axis2.values().into_iter().map(move |b| (a, b))).collect();
    let lambda_min = coords
        .par_iter()
        .map(|&(a, b)| {
            let p = with_value(&with_value(&spec.fixed, &spec.axis1.name, a), &spec.axis2.name, b);
            lambda_min_at(spec.family, &spec.map, &p)
        })
        .collect::<Result<Vec<f64>>>()?;
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    Ok(SweepResult {
        metadata: SweepMetadata {
            family: spec.family.to_string(),
            map: spec.map.to_string(),
            timestamp,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        spec: spec.clone(),
        coords,
        lambda_min,
    })
}

/// Bisection on `[lo, hi]` until the bracket is at most `tol` wide; returns
/// its midpoint. An endpoint where `f` is exactly zero is returned as is.
pub fn threshold(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("bad bracket [{lo}, {hi}] or tolerance {tol}")));
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::SameSign { lo, hi, f_lo, f_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scans `steps` equispaced points and bisects the first sign change. With
/// two or fewer points the endpoints themselves must bracket a crossing.
pub fn locate_crossing(f: impl Fn(f64) -> Result<f64> + Sync, lo: f64, hi: f64, steps: usize, tol: f64) -> Result<f64> {
    if steps <= 2 {
        return threshold(&f, lo, hi, tol);
    }
    let grid = Axis::new("scan", lo, hi, steps.max(2))?.values();
    let vals = grid.par_iter().map(|&v| f(v)).collect::<Result<Vec<f64>>>()?;
    let k = vals
        .windows(2)
        .position(|w| w[0] == 0.0 || w[0].signum() != w[1].signum())
        .ok_or_else(|| Error::NoCrossing(format!("no sign change of lambda_min on [{lo}, {hi}]")))?;
    threshold(&f, grid[k], grid[k + 1], tol)
}

/// Location of the sign change of `lambda_min` along `axis`.
pub fn crossing(family: Family, map: &MapTemplate, axis: &Axis, fixed: &Point, tol: f64) -> Result<f64> {
    axis.validate()?;
    check_names(family, map, fixed.keys().map(String::as_str).chain([axis.name.as_str()]))?;
    locate_crossing(
        |v| lambda_min_at(family, map, &with_value(fixed, &axis.name, v)),
        axis.lo,
        axis.hi,
        axis.steps,
        tol,
    )
}

/// The noise level `eps` at which `(Phi (x) 1)((eps/d) I + (1 - eps) rho)`
/// stops having a negative eigenvalue.
///
/// `lambda_min` is concave in `eps`, so once it is negative at 0 and
/// nonnegative at 1 the crossing is unique; a 50-point scan brackets it.
pub fn robustness_threshold(rho: &DensityMatrix, map: &MapParams, tol: f64) -> Result<f64> {
    let s = build_map(map)?;
    let lambda = |eps: f64| min_eigval(&apply_to_first_factor(&s, &mix_with_noise(rho, eps)?)?);
    let at_zero = lambda(0.0)?;
    if !(at_zero < 0.0) {
        return Err(Error::NotDetected { lambda_min: at_zero });
    }
    locate_crossing(lambda, 0.0, 1.0, ROBUSTNESS_SCAN, tol)
}

/// Crossings of `map_a` and `map_b` on one section. The detection window is
/// the interval between them.
pub fn detection_window(
    family: Family,
    map_a: &MapParams,
    map_b: &MapParams,
    axis: &Axis,
    fixed: &Point,
    tol: f64,
) -> Result<(f64, f64)> {
    Ok((
        crossing(family, &MapTemplate::Fixed(*map_a), axis, fixed, tol)?,
        crossing(family, &MapTemplate::Fixed(*map_b), axis, fixed, tol)?,
    ))
}
