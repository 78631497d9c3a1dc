//! Rectangular discretisation of the observation window.
//!
//! A [`GridDomain`] is a lattice of cell centres `(x0 + i*h, y0 + j*h)`.
//! Sets live on it as [`BinaryMask`]s and real functions as
//! [`ScalarField`]s. Every statement about "points" is evaluated at cell
//! centres only, which keeps the set operations exactly checkable against
//! brute force. One-dimensional problems use `ny == 1`.
//!
//! Cells are stored row-major: the flat index of `(i, j)` is `j * nx + i`.

mod csv;
mod pgm;

use serde::{Deserialize, Serialize};

use crate::distance;
use crate::error::{Error, Result};

pub use self::csv::{encode_field_csv, read_field_csv, write_field_csv};
pub use self::pgm::{encode_mask_pgm, read_mask_pgm, read_pgm, write_mask_pgm, PgmImage};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridDomain {
    pub fn new(x0: f64, y0: f64, h: f64, nx: usize, ny: usize) -> Result<Self> {
        let d = GridDomain { x0, y0, h, nx, ny };
        d.validate()?;
        Ok(d)
    }

    /// A one-dimensional grid (`ny == 1`, `y0 == 0`).
    pub fn line(x0: f64, h: f64, nx: usize) -> Result<Self> {
        Self::new(x0, 0.0, h, nx, 1)
    }

    /// Smallest grid with spacing `h` whose first cell centre is `(xmin, ymin)`
    /// and whose last centres reach `xmax`, `ymax` (up to rounding of `h`).
    pub fn covering(xmin: f64, xmax: f64, ymin: f64, ymax: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !(xmax >= xmin) || !(ymax >= ymin) {
            return Err(Error::InvalidGrid(format!(
                "bad extent [{xmin}, {xmax}] x [{ymin}, {ymax}] with h = {h}"
            )));
        }
        let nx = ((xmax - xmin) / h + 1e-9).floor() as usize + 1;
        let ny = ((ymax - ymin) / h + 1e-9).floor() as usize + 1;
        Self::new(xmin, ymin, h, nx, ny)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing h = {} must be positive", self.h)));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidGrid(format!("dims {}x{} must be positive", self.nx, self.ny)));
        }
        if !self.x0.is_finite() || !self.y0.is_finite() {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn is_1d(&self) -> bool {
        self.ny == 1
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn unindex(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    /// Centre of cell `(i, j)` without bounds checking.
    #[inline]
    pub fn centre(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h)
    }

    /// Centre of cell `(i, j)`.
    pub fn coord_of(&self, i: usize, j: usize) -> Result<(f64, f64)> {
        if i >= self.nx || j >= self.ny {
            return Err(Error::IndexOutOfRange { i, j, nx: self.nx, ny: self.ny });
        }
        Ok(self.centre(i, j))
    }

    /// Cell whose centre is nearest to `(x, y)`, if it lies within half a cell
    /// of the grid.
    pub fn nearest_cell(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fi = ((x - self.x0) / self.h).round();
        let fj = ((y - self.y0) / self.h).round();
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return None;
        }
        Some((fi as usize, fj as usize))
    }

    /// Length of one cell diagonal, the resolution of any grid comparison.
    pub fn diagonal(&self) -> f64 {
        self.h * std::f64::consts::SQRT_2
    }

    pub fn centres(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(move |k| {
            let (i, j) = self.unindex(k);
            self.centre(i, j)
        })
    }

    /// Exact equality of geometry; used to refuse mixed-domain inputs.
    pub fn ensure_same(&self, other: &GridDomain) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::DomainMismatch(format!("{self} vs {other}")))
        }
    }
}

impl std::fmt::Display for GridDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{} grid at ({}, {}) spacing {}", self.nx, self.ny, self.x0, self.y0, self.h)
    }
}

impl std::str::FromStr for GridDomain {
    type Err = Error;

    /// Parses `x0,y0,h,nx,ny`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(Error::InvalidGrid(format!("expected x0,y0,h,nx,ny, got `{s}`")));
        }
        let real = |p: &str| {
            p.parse::<f64>().map_err(|_| Error::InvalidGrid(format!("`{p}` is not a number")))
        };
        let int = |p: &str| {
            p.parse::<usize>().map_err(|_| Error::InvalidGrid(format!("`{p}` is not a count")))
        };
        GridDomain::new(real(parts[0])?, real(parts[1])?, real(parts[2])?, int(parts[3])?, int(parts[4])?)
    }
}

/// A closed set represented by the cell centres it contains.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryMask {
    domain: GridDomain,
    cells: Vec<bool>,
}

impl BinaryMask {
    pub fn new(domain: GridDomain, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != domain.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for a {}x{} grid",
                cells.len(),
                domain.nx,
                domain.ny
            )));
        }
        Ok(BinaryMask { domain, cells })
    }

    pub fn filled(domain: GridDomain, value: bool) -> Self {
        BinaryMask { domain, cells: vec![value; domain.len()] }
    }

    /// Rasterise a predicate: a cell is in the set iff its centre satisfies it.
    pub fn from_fn(domain: GridDomain, mut inside: impl FnMut(f64, f64) -> bool) -> Self {
        let cells = domain.centres().map(|(x, y)| inside(x, y)).collect();
        BinaryMask { domain, cells }
    }

    #[inline]
    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    #[inline]
    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[self.domain.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let k = self.domain.index(i, j);
        self.cells[k] = value;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    pub fn is_full(&self) -> bool {
        self.cells.iter().all(|&c| c)
    }

    /// Flat indices of the cells in the set.
    pub fn indices(&self) -> Vec<usize> {
        self.cells.iter().enumerate().filter(|(_, &c)| c).map(|(k, _)| k).collect()
    }

    /// Complement relative to the grid domain.
    pub fn complement(&self) -> BinaryMask {
        BinaryMask { domain: self.domain, cells: self.cells.iter().map(|c| !c).collect() }
    }

    pub fn union(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> Result<bool> {
        self.domain.ensure_same(&other.domain)?;
        Ok(self.cells.iter().zip(&other.cells).all(|(&a, &b)| !a || b))
    }

    fn zip_with(&self, other: &BinaryMask, op: impl Fn(bool, bool) -> bool) -> Result<BinaryMask> {
        self.domain.ensure_same(&other.domain)?;
        let cells = self.cells.iter().zip(&other.cells).map(|(&a, &b)| op(a, b)).collect();
        Ok(BinaryMask { domain: self.domain, cells })
    }

    /// Closed Euclidean dilation: cells whose centre lies within `delta` of a
    /// cell of the set. Equal to `{x : d_A(x) <= delta}`; an empty mask
    /// dilates to an empty mask.
    pub fn dilate(&self, delta: f64) -> Result<BinaryMask> {
        if !(delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("dilation radius {delta} must be >= 0")));
        }
        if self.is_empty() {
            return Ok(self.clone());
        }
        let sq = distance::squared_distance_units(self)?;
        let h = self.domain.h;
        let cells = sq.iter().map(|&k| distance::units_to_distance(k, h) <= delta).collect();
        Ok(BinaryMask { domain: self.domain, cells })
    }

    /// Cells of the set with at least one 8-neighbour (inside the domain)
    /// that is not in the set: the grid analogue of the topological boundary
    /// of a closed set.
    pub fn boundary(&self) -> BinaryMask {
        let d = self.domain;
        let mut out = vec![false; d.len()];
        for j in 0..d.ny {
            for i in 0..d.nx {
                if !self.get(i, j) {
                    continue;
                }
                out[d.index(i, j)] = neighbours8(&d, i, j).any(|(a, b)| !self.get(a, b));
            }
        }
        BinaryMask { domain: d, cells: out }
    }
}

/// Real-valued function sampled at cell centres. Values are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    domain: GridDomain,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                domain.nx,
                domain.ny
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let (i, j) = domain.unindex(k);
            return Err(Error::InvalidParameter(format!("non-finite field value at ({i}, {j})")));
        }
        Ok(ScalarField { domain, values })
    }

    pub fn constant(domain: GridDomain, value: f64) -> Self {
        ScalarField { domain, values: vec![value; domain.len()] }
    }

    /// Sample `f` at every cell centre. Panics if `f` returns a non-finite value.
    pub fn from_fn(domain: GridDomain, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let values: Vec<f64> = domain.centres().map(|(x, y)| f(x, y)).collect();
        assert!(values.iter().all(|v| v.is_finite()), "field function produced a non-finite value");
        ScalarField { domain, values }
    }

    pub(crate) fn from_values_unchecked(domain: GridDomain, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), domain.len());
        ScalarField { domain, values }
    }

    #[inline]
    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.domain.index(i, j)]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::from_values_unchecked(self.domain, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Largest `|self - other|` over all cells.
    pub fn sup_distance(&self, other: &ScalarField) -> Result<f64> {
        self.domain.ensure_same(&other.domain)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// Largest `|f(x) - f(y)| - |x - y|` over 4-adjacent cell pairs.
    /// Non-positive for 1-Lipschitz fields.
    pub fn lipschitz_excess(&self) -> f64 {
        let d = self.domain;
        let mut worst = f64::NEG_INFINITY;
        for j in 0..d.ny {
            for i in 0..d.nx {
                let v = self.get(i, j);
                if i + 1 < d.nx {
                    worst = worst.max((self.get(i + 1, j) - v).abs() - d.h);
                }
                if j + 1 < d.ny {
                    worst = worst.max((self.get(i, j + 1) - v).abs() - d.h);
                }
            }
        }
        if worst == f64::NEG_INFINITY {
            0.0
        } else {
            worst
        }
    }
}

/// 8-neighbourhood of `(i, j)` clipped to the grid.
pub(crate) fn neighbours8(d: &GridDomain, i: usize, j: usize) -> impl Iterator<Item = (usize, usize)> {
    let (nx, ny) = (d.nx as isize, d.ny as isize);
    let (i, j) = (i as isize, j as isize);
    (-1isize..=1)
        .flat_map(move |dj| (-1isize..=1).map(move |di| (i + di, j + dj)))
        .filter(move |&(a, b)| (a, b) != (i, j) && a >= 0 && b >= 0 && a < nx && b < ny)
        .map(|(a, b)| (a as usize, b as usize))
}

/// 4-neighbourhood of `(i, j)` clipped to the grid.
pub(crate) fn neighbours4(d: &GridDomain, i: usize, j: usize) -> impl Iterator<Item = (usize, usize)> {
    let (nx, ny) = (d.nx as isize, d.ny as isize);
    let (i, j) = (i as isize, j as isize);
    [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)]
        .into_iter()
        .map(move |(di, dj)| (i + di, j + dj))
        .filter(move |&(a, b)| a >= 0 && b >= 0 && a < nx && b < ny)
        .map(|(a, b)| (a as usize, b as usize))
}
