//! Sublevel sets, level bands and level boundaries of gridded functions,
//! plus local diagnostics for whether a level set is well behaved.
//!
//! All inequalities are closed: a cell whose value equals the level belongs
//! to the set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{neighbours4, neighbours8, BinaryMask, ScalarField};

/// Levels `p1 <= f <= p2`; `p1 = -inf` gives a sublevel set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub p1: f64,
    pub p2: f64,
    #[serde(default)]
    pub boundary_tol: f64,
}

impl LevelSpec {
    pub fn new(p1: f64, p2: f64, boundary_tol: f64) -> Result<Self> {
        let s = LevelSpec { p1, p2, boundary_tol };
        s.validate()?;
        Ok(s)
    }

    /// The sublevel specification `f <= p`.
    pub fn below(p: f64) -> Self {
        LevelSpec { p1: f64::NEG_INFINITY, p2: p, boundary_tol: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p1.is_nan() || self.p2.is_nan() || !(self.p1 <= self.p2) {
            return Err(Error::InvalidParameter(format!(
                "level band needs p1 <= p2, got ({}, {})",
                self.p1, self.p2
            )));
        }
        if !(self.boundary_tol >= 0.0) {
            return Err(Error::InvalidParameter("boundary tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

/// How [`level_boundary_with`] decides which cells lie on `{f = p}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// `|f - p| <= tol`, or a 4-neighbour lies strictly on the other side of
    /// `p`. A level set generically misses every cell centre; this keeps the
    /// cells on either side of each crossing.
    #[default]
    SignChange,
    /// Only `|f - p| <= tol`.
    Tolerance,
}

/// `{x : f(x) <= p}`.
pub fn sublevel_set(f: &ScalarField, p: f64) -> BinaryMask {
    mask_where(f, |v| v <= p)
}

/// `{x : p1 <= f(x) <= p2}`.
pub fn level_band(f: &ScalarField, spec: &LevelSpec) -> BinaryMask {
    let (p1, p2) = (spec.p1, spec.p2);
    mask_where(f, |v| p1 <= v && v <= p2)
}

/// `{x : f(x) = p}` with sign-change capture.
pub fn level_boundary(f: &ScalarField, p: f64, tol: f64) -> Result<BinaryMask> {
    level_boundary_with(f, p, tol, BoundaryMode::SignChange)
}

pub fn level_boundary_with(f: &ScalarField, p: f64, tol: f64, mode: BoundaryMode) -> Result<BinaryMask> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be >= 0")));
    }
    let d = *f.domain();
    let near = mask_where(f, |v| (v - p).abs() <= tol);
    if mode == BoundaryMode::Tolerance {
        return Ok(near);
    }
    let side = |v: f64| (v - p).partial_cmp(&0.0).unwrap() as i8;
    let mut cells = near.cells().to_vec();
    for j in 0..d.ny {
        for i in 0..d.nx {
            let k = d.index(i, j);
            if cells[k] {
                continue;
            }
            let s = side(f.get(i, j));
            cells[k] = s != 0 && neighbours4(&d, i, j).any(|(a, b)| side(f.get(a, b)) == -s);
        }
    }
    BinaryMask::new(d, cells)
}

fn mask_where(f: &ScalarField, pred: impl Fn(f64) -> bool) -> BinaryMask {
    BinaryMask::new(*f.domain(), f.values().iter().map(|&v| pred(v)).collect())
        .expect("field and mask share a domain")
}

/// Cells on the level set where the set `{f <= p}` is not the closure of
/// `{f < p}` (condition A) or `{f >= p}` is not the closure of `{f > p}`
/// (condition B), judged from the 8-neighbourhood.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub cond_a_violations: Vec<usize>,
    pub cond_b_violations: Vec<usize>,
    pub satisfied_a: bool,
    pub satisfied_b: bool,
}

/// Grid diagnostic for the two closure conditions at level `p`. A cell with
/// `|f - p| <= tol` violates condition A when none of its 8 neighbours has
/// `f < p - tol` (a flat patch or a local minimum on the level set), and
/// condition B when none has `f > p + tol`.
///
/// Passing this check does not prove the continuum conditions; failing it
/// flags flat regions and extrema that make the plug-in estimators unstable.
pub fn check_consistency(f: &ScalarField, p: f64, tol: f64) -> Result<ConsistencyReport> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be >= 0")));
    }
    let d = *f.domain();
    let mut report = ConsistencyReport::default();
    for j in 0..d.ny {
        for i in 0..d.nx {
            if (f.get(i, j) - p).abs() > tol {
                continue;
            }
            let k = d.index(i, j);
            let (mut below, mut above) = (false, false);
            for (a, b) in neighbours8(&d, i, j) {
                let v = f.get(a, b);
                below |= v < p - tol;
                above |= v > p + tol;
            }
            if !below {
                report.cond_a_violations.push(k);
            }
            if !above {
                report.cond_b_violations.push(k);
            }
        }
    }
    report.satisfied_a = report.cond_a_violations.is_empty();
    report.satisfied_b = report.cond_b_violations.is_empty();
    Ok(report)
}

/// Lattice step among the eight neighbours closest in angle to `e0`.
pub fn nearest_lattice_direction(e0: (f64, f64)) -> Result<(isize, isize)> {
    let norm = e0.0.hypot(e0.1);
    if !norm.is_finite() || norm == 0.0 {
        return Err(Error::InvalidParameter(format!("direction ({}, {}) has no heading", e0.0, e0.1)));
    }
    let angle = e0.1.atan2(e0.0);
    let octant = (angle / std::f64::consts::FRAC_PI_4).round() as i64;
    Ok(match octant.rem_euclid(8) {
        0 => (1, 0),
        1 => (1, 1),
        2 => (0, 1),
        3 => (-1, 1),
        4 => (-1, 0),
        5 => (-1, -1),
        6 => (0, -1),
        _ => (1, -1),
    })
}

/// True iff every forward difference of `f` along the lattice direction
/// nearest to `e0` is strictly positive (vacuously true where no pair of
/// cells exists in that direction).
pub fn directional_monotonicity(f: &ScalarField, e0: (f64, f64)) -> Result<bool> {
    let (di, dj) = nearest_lattice_direction(e0)?;
    let d = *f.domain();
    for j in 0..d.ny as isize {
        for i in 0..d.nx as isize {
            let (a, b) = (i + di, j + dj);
            if a < 0 || b < 0 || a >= d.nx as isize || b >= d.ny as isize {
                continue;
            }
            if f.get(a as usize, b as usize) - f.get(i as usize, j as usize) <= 0.0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
