//! Generative random-set models.
//!
//! Each model has one source of randomness: a uniform scalar, a uniform
//! point, or a Bernoulli flag choosing between two fixed sets. Models whose
//! sets have a closed-form oriented distance function produce that function
//! sampled at cell centres; the two-set models rasterise both sets once per
//! grid and run them through [`oriented_distance`].
//!
//! | kind | randomness | parameters (defaults) |
//! |---|---|---|
//! | `disc_random_radius` | radius `Θ ~ U[lo, hi]` | `cx = 0, cy = 0, lo = 0, hi = 1` |
//! | `disc_random_centre_1d_offset` | centre `(Θ, 0)`, `Θ ~ U[lo, hi]` | `r = 1, lo = 0, hi = 2` |
//! | `disc_random_centre_square` | centre `U ~ U[-w, w]²` | `r = 1, half_width = 1` |
//! | `interval_random_centre` (1-D) | `[Θ - r, Θ + r]`, `Θ ~ U[lo, hi]` | `r = 1, lo = -1, hi = 1` |
//! | `half_plane_angle` | `{x2 >= x1 tan Θ}`, `Θ ~ U[a, b]` | `a = 0, b = π` |
//! | `set_or_boundary` (1-D) | `[0, 1]` w.p. `p`, else `{0, 1}` | `p = 0.5` |
//! | `missing_timbit` | unit disc w.p. `p`, else donut `0.5 <= |x| <= 1` | `p = 0.5` |
//! | `blinking_square` | `[0,3]×[0,1]` w.p. `p`, else `[0,1]×[0,1] ∪ [2,3]×[0,1]` | `p = 0.5` |
//! | `flashing_discs` | `B_r(0)` w.p. `p`, else `B_r((a, 0))` | `r = 1, a = 2, p = 0.5` |
//! | `flashing_discs_reverse` | complements of the flashing discs | `r = 1, a = 2, p = 0.5` |
//! | `pacman_random_radius` | pacman of radius `R ~ U[lo, hi]` | `lo = 0, hi = 1` |
//!
//! The pacman of radius `r` is `{|x| <= r} ∩ ({x1 <= 0} ∪ {x2 <= 0})`: a
//! disc with the quadrant `x1 > 0, x2 > 0` removed.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confidence::GaussianCombination;
use crate::distance::oriented_distance;
use crate::error::{Error, Result};
use crate::grid::{BinaryMask, GridDomain, ScalarField};
use crate::meanset::SampleStack;
use crate::quad;
use crate::rng::substream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "disc_random_radius")]
    DiscRandomRadius,
    #[serde(rename = "disc_random_centre_1d_offset", alias = "disc_random_centre")]
    DiscRandomCentre1dOffset,
    #[serde(rename = "disc_random_centre_square")]
    DiscRandomCentreSquare,
    #[serde(rename = "interval_random_centre")]
    IntervalRandomCentre,
    #[serde(rename = "half_plane_angle")]
    HalfPlaneAngle,
    #[serde(rename = "set_or_boundary")]
    SetOrBoundary,
    #[serde(rename = "missing_timbit")]
    MissingTimbit,
    #[serde(rename = "blinking_square")]
    BlinkingSquare,
    #[serde(rename = "flashing_discs")]
    FlashingDiscs,
    #[serde(rename = "flashing_discs_reverse")]
    FlashingDiscsReverse,
    #[serde(rename = "pacman_random_radius")]
    PacmanRandomRadius,
}

impl ModelKind {
    pub const ALL: [ModelKind; 11] = [
        ModelKind::DiscRandomRadius,
        ModelKind::DiscRandomCentre1dOffset,
        ModelKind::DiscRandomCentreSquare,
        ModelKind::IntervalRandomCentre,
        ModelKind::HalfPlaneAngle,
        ModelKind::SetOrBoundary,
        ModelKind::MissingTimbit,
        ModelKind::BlinkingSquare,
        ModelKind::FlashingDiscs,
        ModelKind::FlashingDiscsReverse,
        ModelKind::PacmanRandomRadius,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::DiscRandomRadius => "disc_random_radius",
            ModelKind::DiscRandomCentre1dOffset => "disc_random_centre_1d_offset",
            ModelKind::DiscRandomCentreSquare => "disc_random_centre_square",
            ModelKind::IntervalRandomCentre => "interval_random_centre",
            ModelKind::HalfPlaneAngle => "half_plane_angle",
            ModelKind::SetOrBoundary => "set_or_boundary",
            ModelKind::MissingTimbit => "missing_timbit",
            ModelKind::BlinkingSquare => "blinking_square",
            ModelKind::FlashingDiscs => "flashing_discs",
            ModelKind::FlashingDiscsReverse => "flashing_discs_reverse",
            ModelKind::PacmanRandomRadius => "pacman_random_radius",
        }
    }

    /// Models living on the real line (`ny == 1` grids).
    pub fn is_1d(self) -> bool {
        matches!(self, ModelKind::IntervalRandomCentre | ModelKind::SetOrBoundary)
    }

    /// Parameter names and default values.
    pub fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            ModelKind::DiscRandomRadius => &[("cx", 0.0), ("cy", 0.0), ("lo", 0.0), ("hi", 1.0)],
            ModelKind::DiscRandomCentre1dOffset => &[("r", 1.0), ("lo", 0.0), ("hi", 2.0)],
            ModelKind::DiscRandomCentreSquare => &[("r", 1.0), ("half_width", 1.0)],
            ModelKind::IntervalRandomCentre => &[("r", 1.0), ("lo", -1.0), ("hi", 1.0)],
            ModelKind::HalfPlaneAngle => &[("a", 0.0), ("b", PI)],
            ModelKind::SetOrBoundary | ModelKind::MissingTimbit | ModelKind::BlinkingSquare => &[("p", 0.5)],
            ModelKind::FlashingDiscs | ModelKind::FlashingDiscsReverse => &[("r", 1.0), ("a", 2.0), ("p", 0.5)],
            ModelKind::PacmanRandomRadius => &[("lo", 0.0), ("hi", 1.0)],
        }
    }

    fn is_bernoulli(self) -> bool {
        matches!(
            self,
            ModelKind::SetOrBoundary
                | ModelKind::MissingTimbit
                | ModelKind::BlinkingSquare
                | ModelKind::FlashingDiscs
                | ModelKind::FlashingDiscsReverse
        )
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "disc_random_centre" {
            return Ok(ModelKind::DiscRandomCentre1dOffset);
        }
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnsupportedModel(s.to_string()))
    }
}

/// On-disk model description: `{"kind": ..., "params": {...}, "seed": ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// The random outcome behind one realisation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Draw {
    Scalar(f64),
    Point(f64, f64),
    /// `true` selects the first of the two sets.
    Flag(bool),
}

impl Draw {
    pub fn scalar(&self) -> Option<f64> {
        match *self {
            Draw::Scalar(v) => Some(v),
            _ => None,
        }
    }

    pub fn point(&self) -> Option<(f64, f64)> {
        match *self {
            Draw::Point(x, y) => Some((x, y)),
            _ => None,
        }
    }

    pub fn flag(&self) -> Option<bool> {
        match *self {
            Draw::Flag(b) => Some(b),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomSetModel {
    kind: ModelKind,
    params: BTreeMap<String, f64>,
}

impl RandomSetModel {
    /// Model with `overrides` applied on top of the kind's defaults.
    pub fn new(kind: ModelKind, overrides: &[(&str, f64)]) -> Result<Self> {
        let map = overrides.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        Self::from_params(kind, &map)
    }

    pub fn default_for(kind: ModelKind) -> Self {
        Self::new(kind, &[]).expect("defaults are valid")
    }

    pub fn from_params(kind: ModelKind, overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let mut params: BTreeMap<String, f64> =
            kind.defaults().iter().map(|&(k, v)| (k.to_string(), v)).collect();
        for (k, &v) in overrides {
            match params.get_mut(k) {
                Some(slot) => *slot = v,
                None => {
                    let known: Vec<&str> = kind.defaults().iter().map(|d| d.0).collect();
                    return Err(Error::InvalidParameter(format!(
                        "`{kind}` has no parameter `{k}` (expected one of {known:?})"
                    )));
                }
            }
        }
        let m = RandomSetModel { kind, params };
        m.validate()?;
        Ok(m)
    }

    pub fn from_config(config: &ModelConfig) -> Result<Self> {
        Self::from_params(config.kind, &config.params)
    }

    pub fn to_config(&self, seed: Option<u64>) -> ModelConfig {
        ModelConfig { kind: self.kind, params: self.params.clone(), seed }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// Value of a parameter of this kind. Panics on a name the kind lacks.
    pub fn param(&self, name: &str) -> f64 {
        match self.params.get(name) {
            Some(&v) => v,
            None => panic!("`{}` has no parameter `{name}`", self.kind),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(format!("{}: {msg}", self.kind)));
        if let Some((k, v)) = self.params.iter().find(|(_, v)| !v.is_finite()) {
            return bad(format!("parameter `{k}` = {v} is not finite"));
        }
        let has = |k: &str| self.params.contains_key(k);
        if has("p") && !(0.0..=1.0).contains(&self.param("p")) {
            return bad(format!("probability p = {} outside [0, 1]", self.param("p")));
        }
        if has("lo") && self.param("lo") > self.param("hi") {
            return bad(format!("range [{}, {}] is reversed", self.param("lo"), self.param("hi")));
        }
        if has("r") && self.param("r") <= 0.0 {
            return bad(format!("radius r = {} must be positive", self.param("r")));
        }
        match self.kind {
            ModelKind::DiscRandomRadius | ModelKind::PacmanRandomRadius if self.param("lo") < 0.0 => {
                bad(format!("radii must be >= 0, got lo = {}", self.param("lo")))
            }
            ModelKind::DiscRandomCentreSquare if self.param("half_width") < 0.0 => {
                bad("half_width must be >= 0".into())
            }
            ModelKind::HalfPlaneAngle => {
                let w = self.param("b") - self.param("a");
                if w > 0.0 && w < 2.0 * PI {
                    Ok(())
                } else {
                    bad(format!("need 0 < b - a < 2π, got {w}"))
                }
            }
            _ => Ok(()),
        }
    }

    /// Refuse grids of the wrong dimension for this kind.
    pub fn check_domain(&self, domain: &GridDomain) -> Result<()> {
        match (self.kind.is_1d(), domain.is_1d()) {
            (true, false) => Err(Error::UnsupportedDomain { kind: self.kind.to_string(), want: "1-D (ny = 1)" }),
            (false, true) => Err(Error::UnsupportedDomain { kind: self.kind.to_string(), want: "2-D (ny > 1)" }),
            _ => Ok(()),
        }
    }

    /// Draw the model's random parameter.
    pub fn draw(&self, rng: &mut impl Rng) -> Draw {
        let uniform = |rng: &mut dyn rand::RngCore, lo: f64, hi: f64| {
            if lo == hi {
                lo
            } else {
                rng.random_range(lo..=hi)
            }
        };
        match self.kind {
            ModelKind::DiscRandomRadius
            | ModelKind::DiscRandomCentre1dOffset
            | ModelKind::IntervalRandomCentre
            | ModelKind::PacmanRandomRadius => Draw::Scalar(uniform(rng, self.param("lo"), self.param("hi"))),
            ModelKind::HalfPlaneAngle => Draw::Scalar(uniform(rng, self.param("a"), self.param("b"))),
            ModelKind::DiscRandomCentreSquare => {
                let w = self.param("half_width");
                let x = uniform(rng, -w, w);
                let y = uniform(rng, -w, w);
                Draw::Point(x, y)
            }
            _ => Draw::Flag(rng.random::<f64>() < self.param("p")),
        }
    }

    /// Precompute whatever is shared by all realisations on `domain`.
    pub fn prepare(&self, domain: &GridDomain) -> Result<PreparedModel> {
        self.check_domain(domain)?;
        let cache = match self.kind {
            ModelKind::DiscRandomRadius => {
                let (cx, cy) = (self.param("cx"), self.param("cy"));
                Cache::Shift(ScalarField::from_fn(*domain, |x, y| (x - cx).hypot(y - cy)))
            }
            k if k.is_bernoulli() => {
                let (a, b) = self.rasterise_pair(domain);
                Cache::Pair(oriented_distance(&a)?, oriented_distance(&b)?)
            }
            _ => Cache::Direct,
        };
        Ok(PreparedModel { model: self.clone(), domain: *domain, cache })
    }

    /// One realisation's ODF.
    pub fn sample_odf(&self, domain: &GridDomain, rng: &mut impl Rng) -> Result<ScalarField> {
        let prepared = self.prepare(domain)?;
        Ok(prepared.field(&self.draw(rng)))
    }

    /// The two sets of a Bernoulli kind as masks (first = `Flag(true)`).
    fn rasterise_pair(&self, d: &GridDomain) -> (BinaryMask, BinaryMask) {
        let eps = 1e-9 * d.h;
        let p = |n: &str| self.param(n);
        match self.kind {
            ModelKind::SetOrBoundary => {
                let interval = BinaryMask::from_fn(*d, |x, _| x >= -eps && x <= 1.0 + eps);
                let mut ends = BinaryMask::filled(*d, false);
                for t in [0.0, 1.0] {
                    if let Some((i, j)) = d.nearest_cell(t, 0.0) {
                        ends.set(i, j, true);
                    }
                }
                (interval, ends)
            }
            ModelKind::MissingTimbit => (
                BinaryMask::from_fn(*d, |x, y| x.hypot(y) <= 1.0 + eps),
                BinaryMask::from_fn(*d, |x, y| {
                    let r = x.hypot(y);
                    r >= 0.5 - eps && r <= 1.0 + eps
                }),
            ),
            ModelKind::BlinkingSquare => {
                let inside = |v: f64, lo: f64, hi: f64| v >= lo - eps && v <= hi + eps;
                (
                    BinaryMask::from_fn(*d, |x, y| inside(x, 0.0, 3.0) && inside(y, 0.0, 1.0)),
                    BinaryMask::from_fn(*d, |x, y| {
                        (inside(x, 0.0, 1.0) || inside(x, 2.0, 3.0)) && inside(y, 0.0, 1.0)
                    }),
                )
            }
            ModelKind::FlashingDiscs => {
                let (r, a) = (p("r"), p("a"));
                (
                    BinaryMask::from_fn(*d, |x, y| x.hypot(y) <= r + eps),
                    BinaryMask::from_fn(*d, |x, y| (x - a).hypot(y) <= r + eps),
                )
            }
            ModelKind::FlashingDiscsReverse => {
                let (r, a) = (p("r"), p("a"));
                (
                    BinaryMask::from_fn(*d, |x, y| x.hypot(y) >= r - eps),
                    BinaryMask::from_fn(*d, |x, y| (x - a).hypot(y) >= r - eps),
                )
            }
            _ => unreachable!("not a two-set model"),
        }
    }

    /// Closed-form ODF of the set selected by `draw`, where one exists.
    fn analytic_odf(&self, draw: &Draw, x: f64, y: f64) -> f64 {
        match (self.kind, *draw) {
            (ModelKind::DiscRandomRadius, Draw::Scalar(t)) => {
                (x - self.param("cx")).hypot(y - self.param("cy")) - t
            }
            (ModelKind::DiscRandomCentre1dOffset, Draw::Scalar(t)) => (x - t).hypot(y) - self.param("r"),
            (ModelKind::DiscRandomCentreSquare, Draw::Point(u, v)) => (x - u).hypot(y - v) - self.param("r"),
            (ModelKind::IntervalRandomCentre, Draw::Scalar(t)) => (x - t).abs() - self.param("r"),
            (ModelKind::HalfPlaneAngle, Draw::Scalar(t)) => x * t.sin() - y * t.cos(),
            (ModelKind::PacmanRandomRadius, Draw::Scalar(r)) => pacman_odf(x, y, r),
            (kind, draw) => panic!("draw {draw:?} does not belong to `{kind}`"),
        }
    }

    /// Analytic expectation `E[b_A(x)]` at a point.
    pub(crate) fn expected_value(&self, x: f64, y: f64) -> f64 {
        let p = |n: &str| self.param(n);
        match self.kind {
            ModelKind::DiscRandomRadius => (x - p("cx")).hypot(y - p("cy")) - 0.5 * (p("lo") + p("hi")),
            ModelKind::DiscRandomCentre1dOffset => {
                let (lo, hi) = (p("lo"), p("hi"));
                let mean = if hi > lo {
                    (sqrt_antiderivative(x - lo, y) - sqrt_antiderivative(x - hi, y)) / (hi - lo)
                } else {
                    (x - lo).hypot(y)
                };
                mean - p("r")
            }
            ModelKind::DiscRandomCentreSquare => {
                let w = p("half_width");
                let mean = if w > 0.0 {
                    // inner integral over u2 in closed form, outer over u1 by quadrature
                    let inner =
                        |u1: f64| sqrt_antiderivative(y + w, x - u1) - sqrt_antiderivative(y - w, x - u1);
                    quad::integrate(inner, -w, w, 1e-10, &[x]) / (4.0 * w * w)
                } else {
                    x.hypot(y)
                };
                mean - p("r")
            }
            ModelKind::IntervalRandomCentre => {
                let (lo, hi) = (p("lo"), p("hi"));
                let mean = if x <= lo {
                    0.5 * (lo + hi) - x
                } else if x >= hi {
                    x - 0.5 * (lo + hi)
                } else {
                    ((x - lo).powi(2) + (hi - x).powi(2)) / (2.0 * (hi - lo))
                };
                mean - p("r")
            }
            ModelKind::HalfPlaneAngle => {
                let (a, b) = (p("a"), p("b"));
                let c = 2.0 / (b - a) * (0.5 * (b - a)).sin();
                let m = 0.5 * (a + b);
                c * (x * m.sin() - y * m.cos())
            }
            ModelKind::SetOrBoundary => {
                let interval = (x - 0.5).abs() - 0.5;
                let ends = x.abs().min((x - 1.0).abs());
                p("p") * interval + (1.0 - p("p")) * ends
            }
            ModelKind::MissingTimbit => {
                let r = x.hypot(y);
                p("p") * (r - 1.0) + (1.0 - p("p")) * (r - 1.0).max(0.5 - r)
            }
            ModelKind::BlinkingSquare => {
                let long = box_sdf(x, y, (0.0, 3.0), (0.0, 1.0));
                let pair = box_sdf(x, y, (0.0, 1.0), (0.0, 1.0)).min(box_sdf(x, y, (2.0, 3.0), (0.0, 1.0)));
                p("p") * long + (1.0 - p("p")) * pair
            }
            ModelKind::FlashingDiscs => {
                let (r, a) = (p("r"), p("a"));
                p("p") * (x.hypot(y) - r) + (1.0 - p("p")) * ((x - a).hypot(y) - r)
            }
            ModelKind::FlashingDiscsReverse => {
                let (r, a) = (p("r"), p("a"));
                p("p") * (r - x.hypot(y)) + (1.0 - p("p")) * (r - (x - a).hypot(y))
            }
            ModelKind::PacmanRandomRadius => {
                let (lo, hi) = (p("lo"), p("hi"));
                if hi == lo {
                    return pacman_odf(x, y, lo);
                }
                // kinks where the radius passes |x|, |x1| or |x2|
                let breaks = [x.hypot(y), x.abs(), y.abs()];
                quad::integrate(|r| pacman_odf(x, y, r), lo, hi, 1e-10, &breaks) / (hi - lo)
            }
        }
    }

    /// Gaussian field approximating the limit of `sqrt(n) (b̄_n - E[b_A])`
    /// on `domain`.
    ///
    /// * disc radius: `-Z` with `Z ~ N(0, var Θ)`;
    /// * half plane: `x1 Z1 - x2 Z2` with `(Z1, Z2)` distributed as the
    ///   centred `(sin Θ, cos Θ)`;
    /// * two-set models: `(b_1 - b_2) Z` with `Z ~ N(0, p(1-p))`;
    /// * remaining models: a quadrature expansion
    ///   `Σ_k sqrt(w_k) (b(·, θ_k) - b̄) ξ_k` over Gauss–Legendre nodes of the
    ///   random parameter, whose covariance is the quadrature estimate of
    ///   `cov(b(x), b(y))`.
    pub fn limiting_field(&self, domain: &GridDomain) -> Result<GaussianCombination> {
        self.check_domain(domain)?;
        let p = |n: &str| self.param(n);
        match self.kind {
            ModelKind::DiscRandomRadius => {
                let var = (p("hi") - p("lo")).powi(2) / 12.0;
                GaussianCombination::new(vec![ScalarField::constant(*domain, -1.0)], &DMatrix::from_element(1, 1, var))
            }
            ModelKind::HalfPlaneAngle => {
                let cov = half_plane_covariance(p("a"), p("b"));
                let basis = vec![ScalarField::from_fn(*domain, |x, _| x), ScalarField::from_fn(*domain, |_, y| -y)];
                GaussianCombination::new(basis, &cov)
            }
            k if k.is_bernoulli() => {
                let prepared = self.prepare(domain)?;
                let Cache::Pair(first, second) = &prepared.cache else { unreachable!() };
                let diff = ScalarField::new(
                    *domain,
                    first.values().iter().zip(second.values()).map(|(a, b)| a - b).collect(),
                )?;
                let pr = p("p");
                GaussianCombination::new(vec![diff], &DMatrix::from_element(1, 1, pr * (1.0 - pr)))
            }
            _ => {
                let prepared = self.prepare(domain)?;
                let atoms = self.quadrature_atoms();
                let fields: Vec<ScalarField> = atoms.iter().map(|(_, d)| prepared.field(d)).collect();
                let mut mean = vec![0.0; domain.len()];
                for ((w, _), f) in atoms.iter().zip(&fields) {
                    for (m, v) in mean.iter_mut().zip(f.values()) {
                        *m += w * v;
                    }
                }
                let basis = atoms
                    .iter()
                    .zip(fields)
                    .map(|((w, _), f)| {
                        let s = w.sqrt();
                        let vals = f.values().iter().zip(&mean).map(|(v, m)| s * (v - m)).collect();
                        ScalarField::new(*domain, vals)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(GaussianCombination::standard(basis))
            }
        }
    }

    /// Probability-weighted draws (weights sum to one) discretising the
    /// model's parameter distribution.
    fn quadrature_atoms(&self) -> Vec<(f64, Draw)> {
        let (x, w) = quad::gauss_legendre(4);
        let panels = 16;
        let line = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
            if hi == lo {
                return vec![(1.0, lo)];
            }
            let width = (hi - lo) / panels as f64;
            (0..panels)
                .flat_map(|k| {
                    let c = lo + (k as f64 + 0.5) * width;
                    x.iter().zip(&w).map(move |(&t, &wt)| (0.5 * wt / panels as f64, c + 0.5 * width * t))
                })
                .collect()
        };
        match self.kind {
            ModelKind::DiscRandomCentreSquare => {
                let wdt = self.param("half_width");
                let (x8, w8) = quad::gauss_legendre(8);
                let nodes: Vec<(f64, f64)> = if wdt == 0.0 {
                    vec![(1.0, 0.0)]
                } else {
                    x8.iter().zip(&w8).map(|(&t, &wt)| (0.5 * wt, wdt * t)).collect()
                };
                nodes
                    .iter()
                    .flat_map(|&(wa, a)| nodes.iter().map(move |&(wb, b)| (wa * wb, Draw::Point(a, b))))
                    .collect()
            }
            _ => {
                let (lo, hi) = match self.kind {
                    ModelKind::HalfPlaneAngle => (self.param("a"), self.param("b")),
                    _ => (self.param("lo"), self.param("hi")),
                };
                line(lo, hi).into_iter().map(|(wt, t)| (wt, Draw::Scalar(t))).collect()
            }
        }
    }
}

enum Cache {
    /// `base - θ` (disc with random radius).
    Shift(ScalarField),
    /// Grid ODFs of the two sets of a Bernoulli model.
    Pair(ScalarField, ScalarField),
    /// Evaluate the closed form per cell.
    Direct,
}

/// A model bound to a grid, with per-grid work done once.
pub struct PreparedModel {
    model: RandomSetModel,
    domain: GridDomain,
    cache: Cache,
}

impl PreparedModel {
    pub fn model(&self) -> &RandomSetModel {
        &self.model
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    /// ODF of the realisation described by `draw`.
    pub fn field(&self, draw: &Draw) -> ScalarField {
        match (&self.cache, *draw) {
            (Cache::Shift(base), Draw::Scalar(t)) => base.map(|v| v - t),
            (Cache::Pair(first, second), Draw::Flag(f)) => {
                if f {
                    first.clone()
                } else {
                    second.clone()
                }
            }
            _ => ScalarField::from_fn(self.domain, |x, y| self.model.analytic_odf(draw, x, y)),
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> (Draw, ScalarField) {
        let d = self.model.draw(rng);
        (d, self.field(&d))
    }
}

/// `n` IID realisations; sample `i` uses stream `i` of `seed`.
pub fn sample_stack(model: &RandomSetModel, domain: &GridDomain, n: usize, seed: u64) -> Result<SampleStack> {
    Ok(sample_stack_with_draws(model, domain, n, seed)?.0)
}

/// As [`sample_stack`], also returning each sample's random parameter.
pub fn sample_stack_with_draws(
    model: &RandomSetModel,
    domain: &GridDomain,
    n: usize,
    seed: u64,
) -> Result<(SampleStack, Vec<Draw>)> {
    if n == 0 {
        return Err(Error::EmptyStack);
    }
    let prepared = model.prepare(domain)?;
    let (draws, fields): (Vec<Draw>, Vec<ScalarField>) =
        (0..n as u64).into_par_iter().map(|i| prepared.sample(&mut substream(seed, i))).unzip();
    Ok((SampleStack::new(fields)?, draws))
}

/// Draws only (no fields), with the same streams as [`sample_stack`].
pub fn sample_draws(model: &RandomSetModel, n: usize, seed: u64) -> Vec<Draw> {
    (0..n as u64).map(|i| model.draw(&mut substream(seed, i))).collect()
}

/// Plug-in estimate `|x - Ū_n|` of `f(x) = |x|` from observed centres.
pub fn disc_centre_plug_in(domain: &GridDomain, centres: &[(f64, f64)]) -> Result<ScalarField> {
    if centres.is_empty() {
        return Err(Error::EmptyStack);
    }
    let n = centres.len() as f64;
    let ux = centres.iter().map(|c| c.0).sum::<f64>() / n;
    let uy = centres.iter().map(|c| c.1).sum::<f64>() / n;
    Ok(ScalarField::from_fn(*domain, |x, y| (x - ux).hypot(y - uy)))
}

/// Oriented distance function of the pacman of radius `r`.
pub fn pacman_odf(x: f64, y: f64, r: f64) -> f64 {
    let rho = x.hypot(y);
    let inside = rho <= r && (x <= 0.0 || y <= 0.0);
    // the arc spans every direction except the open first quadrant
    let d_arc = if x > 0.0 && y > 0.0 {
        (x - r).hypot(y).min(x.hypot(y - r))
    } else {
        (rho - r).abs()
    };
    let d_seg_x = (x - x.clamp(0.0, r)).hypot(y);
    let d_seg_y = x.hypot(y - y.clamp(0.0, r));
    let d = d_arc.min(d_seg_x).min(d_seg_y);
    if inside {
        -d
    } else {
        d
    }
}

/// Signed distance to the axis-aligned rectangle `[x0, x1] × [y0, y1]`.
pub(crate) fn box_sdf(x: f64, y: f64, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) -> f64 {
    let qx = (x - 0.5 * (x0 + x1)).abs() - 0.5 * (x1 - x0);
    let qy = (y - 0.5 * (y0 + y1)).abs() - 0.5 * (y1 - y0);
    qx.max(0.0).hypot(qy.max(0.0)) + qx.max(qy).min(0.0)
}

/// `∫_0^t sqrt(s² + c²) ds`.
fn sqrt_antiderivative(t: f64, c: f64) -> f64 {
    let c = c.abs();
    if c == 0.0 {
        return 0.5 * t * t.abs();
    }
    0.5 * (t * t.hypot(c) + c * c * (t / c).asinh())
}

/// Covariance of `(sin Θ, cos Θ)` for `Θ ~ U[a, b]`.
pub fn half_plane_covariance(a: f64, b: f64) -> DMatrix<f64> {
    let l = b - a;
    let es = (a.cos() - b.cos()) / l;
    let ec = (b.sin() - a.sin()) / l;
    let ess = 0.5 - ((2.0 * b).sin() - (2.0 * a).sin()) / (4.0 * l);
    let ecc = 0.5 + ((2.0 * b).sin() - (2.0 * a).sin()) / (4.0 * l);
    let esc = ((2.0 * a).cos() - (2.0 * b).cos()) / (4.0 * l);
    DMatrix::from_row_slice(2, 2, &[ess - es * es, esc - es * ec, esc - es * ec, ecc - ec * ec])
}
