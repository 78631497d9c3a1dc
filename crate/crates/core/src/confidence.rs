//! Sup-quantiles of fluctuation fields and the confidence regions they
//! calibrate.
//!
//! With `Z_n = sqrt(n) (f̂_n - f)` and its limit `Z`, the quantiles
//!
//! * `q1`: `(1 - α)` quantile of `max_W Z`,
//! * `q2`: `(1 - α)` quantile of `max_W |Z|`,
//! * `q21`: `α/2` quantile of `min_W Z`,
//! * `q22`: `(1 - α/2)` quantile of `max_W Z`
//!
//! give regions such as `{x ∈ W : f̂_n(x) <= p + q1/sqrt(n)}` that contain
//! the target set with probability at least `1 - α`. Quantiles come either
//! from a nonparametric bootstrap over a stack of observed ODFs or from
//! Monte-Carlo draws of a known Gaussian limit.
//!
//! Empirical quantiles use the order statistic at 1-based index
//! `ceil(prob * B)`. Replicate `b` always uses random stream `b`, and the
//! per-replicate statistics are gathered in index order, so reports are
//! bit-identical for any number of worker threads.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, GridDomain, ScalarField};
use crate::meanset::{expected_odf, mean_odf, SampleStack};
use crate::models::{sample_stack, RandomSetModel};
use crate::rng::{child_seed, substream};

pub const DEFAULT_BOOTSTRAP_REPLICATES: usize = 1000;
pub const DEFAULT_GAUSSIAN_DRAWS: usize = 2000;

/// Extremes of one fluctuation replicate over the window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupStat {
    pub max: f64,
    pub abs_max: f64,
    pub min: f64,
}

impl SupStat {
    fn of(values: &[f64]) -> SupStat {
        let mut s = SupStat { max: f64::NEG_INFINITY, abs_max: 0.0, min: f64::INFINITY };
        for &v in values {
            s.max = s.max.max(v);
            s.min = s.min.min(v);
            s.abs_max = s.abs_max.max(v.abs());
        }
        s
    }
}

/// Monte-Carlo standard errors of the four quantiles; infinite when they
/// cannot be estimated (a single replicate). Serialised as `null` then.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileErrors {
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_infinity")]
    pub q1: f64,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_infinity")]
    pub q2: f64,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_infinity")]
    pub q21: f64,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_infinity")]
    pub q22: f64,
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn null_as_infinity<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileReport {
    pub alpha: f64,
    pub q1: f64,
    pub q2: f64,
    pub q21: f64,
    pub q22: f64,
    pub replicates: usize,
    pub mc_stderr: QuantileErrors,
    pub seed: u64,
    pub window_id: String,
    /// `"bootstrap"`, `"gaussian"`, or `"exact"`.
    pub source: String,
}

impl QuantileReport {
    /// Extract the quantiles from recorded replicates.
    pub fn from_replicates(stats: &[SupStat], alpha: f64, seed: u64, window_id: String, source: &str) -> Self {
        assert!(!stats.is_empty(), "at least one replicate is required");
        let sorted = |f: fn(&SupStat) -> f64| {
            let mut v: Vec<f64> = stats.iter().map(f).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let maxes = sorted(|s| s.max);
        let abs = sorted(|s| s.abs_max);
        let mins = sorted(|s| s.min);
        let (hi, lo2, hi2) = (1.0 - alpha, 0.5 * alpha, 1.0 - 0.5 * alpha);
        QuantileReport {
            alpha,
            q1: order_statistic(&maxes, hi),
            q2: order_statistic(&abs, hi),
            q21: order_statistic(&mins, lo2),
            q22: order_statistic(&maxes, hi2),
            replicates: stats.len(),
            mc_stderr: QuantileErrors {
                q1: quantile_stderr(&maxes, hi),
                q2: quantile_stderr(&abs, hi),
                q21: quantile_stderr(&mins, lo2),
                q22: quantile_stderr(&maxes, hi2),
            },
            seed,
            window_id,
            source: source.to_string(),
        }
    }

    /// A report carrying known quantiles (no Monte-Carlo error).
    pub fn exact(alpha: f64, q1: f64, q2: f64, q21: f64, q22: f64, window_id: String) -> Self {
        QuantileReport {
            alpha,
            q1,
            q2,
            q21,
            q22,
            replicates: 0,
            mc_stderr: QuantileErrors { q1: 0.0, q2: 0.0, q21: 0.0, q22: 0.0 },
            seed: 0,
            window_id,
            source: "exact".into(),
        }
    }

    pub fn symmetric(&self) -> BandQuantiles {
        BandQuantiles::Symmetric(self.q2)
    }

    pub fn asymmetric(&self) -> BandQuantiles {
        BandQuantiles::Asymmetric { q21: self.q21, q22: self.q22 }
    }
}

/// Order statistic at 1-based index `ceil(prob * B)` of sorted values.
pub fn order_statistic(sorted: &[f64], prob: f64) -> f64 {
    let b = sorted.len();
    // guard against 0.95 * 1000 = 950.0000000000001
    let k = ((prob * b as f64) - 1e-9).ceil().clamp(1.0, b as f64) as usize;
    sorted[k - 1]
}

/// Density-free standard error of a sample quantile: half the spread of
/// the order statistics one binomial standard deviation either side.
pub fn quantile_stderr(sorted: &[f64], prob: f64) -> f64 {
    let b = sorted.len() as f64;
    if sorted.len() < 2 {
        return f64::INFINITY;
    }
    let centre = b * prob;
    let sd = (b * prob * (1.0 - prob)).sqrt();
    let idx = |t: f64| (t.ceil().clamp(1.0, b) as usize) - 1;
    0.5 * (sorted[idx(centre + sd)] - sorted[idx(centre - sd)])
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1)")))
    }
}

fn window_cells(domain: &GridDomain, window: &BinaryMask) -> Result<Vec<usize>> {
    domain.ensure_same(window.domain())?;
    let cells = window.indices();
    if cells.is_empty() {
        return Err(Error::EmptyWindow);
    }
    Ok(cells)
}

/// Short description of a window for reports.
pub fn describe_window(window: &BinaryMask) -> String {
    if window.is_full() {
        return "full".into();
    }
    let d = window.domain();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for k in window.indices() {
        let (i, j) = d.unindex(k);
        let (x, y) = d.centre(i, j);
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    format!("{} cells within [{x0}, {x1}] x [{y0}, {y1}]", window.count())
}

/// Source of draws of a fluctuation field.
pub trait FluctuationSampler: Send + Sync {
    fn domain(&self) -> &GridDomain;

    /// One draw of the field at the flat indices `cells`, written to `out`.
    fn sample_cells(&self, rng: &mut ChaCha8Rng, cells: &[usize], out: &mut [f64]);
}

/// `Z(x) = Σ_j (L ξ)_j h_j(x)` with `ξ ~ N(0, I)`: a finite Gaussian
/// combination of fixed basis fields whose coefficient covariance is
/// `L Lᵀ`.
#[derive(Clone, Debug)]
pub struct GaussianCombination {
    domain: GridDomain,
    basis: Vec<ScalarField>,
    factor: DMatrix<f64>,
}

impl GaussianCombination {
    /// Coefficients with covariance `cov`, factored by Cholesky, or by a
    /// symmetric eigendecomposition when `cov` is only semi-definite.
    pub fn new(basis: Vec<ScalarField>, cov: &DMatrix<f64>) -> Result<Self> {
        let k = basis.len();
        if cov.nrows() != k || cov.ncols() != k {
            return Err(Error::DimensionMismatch(format!(
                "{k} basis fields but a {}x{} covariance",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let domain = Self::common_domain(&basis)?;
        Ok(GaussianCombination { domain, basis, factor: covariance_factor(cov)? })
    }

    /// Independent standard normal coefficients.
    pub fn standard(basis: Vec<ScalarField>) -> Self {
        let k = basis.len();
        let domain = Self::common_domain(&basis).expect("basis fields share a domain");
        GaussianCombination { domain, basis, factor: DMatrix::identity(k, k) }
    }

    fn common_domain(basis: &[ScalarField]) -> Result<GridDomain> {
        let first = basis.first().ok_or_else(|| Error::DimensionMismatch("no basis fields".into()))?;
        for f in basis {
            first.domain().ensure_same(f.domain())?;
        }
        Ok(*first.domain())
    }

    pub fn basis(&self) -> &[ScalarField] {
        &self.basis
    }

    /// `Var Z` at flat cell index `k`.
    pub fn variance_at(&self, k: usize) -> f64 {
        let h = DVector::from_iterator(self.basis.len(), self.basis.iter().map(|f| f.values()[k]));
        (self.factor.transpose() * h).norm_squared()
    }
}

impl FluctuationSampler for GaussianCombination {
    fn domain(&self) -> &GridDomain {
        &self.domain
    }

    fn sample_cells(&self, rng: &mut ChaCha8Rng, cells: &[usize], out: &mut [f64]) {
        let k = self.basis.len();
        let xi = DVector::from_iterator(k, (0..k).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let coef = &self.factor * xi;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (c, h) in coef.iter().zip(&self.basis) {
            let vals = h.values();
            for (o, &cell) in out.iter_mut().zip(cells) {
                *o += c * vals[cell];
            }
        }
    }
}

/// A matrix `L` with `L Lᵀ = cov`.
pub(crate) fn covariance_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = 0.5 * (cov + cov.transpose());
    if let Some(ch) = sym.clone().cholesky() {
        return Ok(ch.l());
    }
    let eig = sym.symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-10 * scale {
        return Err(Error::NotPsd(min));
    }
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots))
}

/// Limit of `sqrt(n) (|x - Ū_n| - |x|)` for centres `U ~ U[-w, w]²`:
/// `Z(x) = -x/|x| · G` away from the origin and `|G|` at it, with
/// `G ~ N(0, (w²/3) I)`.
#[derive(Clone, Debug)]
pub struct DiscCentreLimit {
    domain: GridDomain,
    sd: f64,
}

impl DiscCentreLimit {
    pub fn new(domain: GridDomain, half_width: f64) -> Self {
        DiscCentreLimit { domain, sd: half_width / 3f64.sqrt() }
    }
}

impl FluctuationSampler for DiscCentreLimit {
    fn domain(&self) -> &GridDomain {
        &self.domain
    }

    fn sample_cells(&self, rng: &mut ChaCha8Rng, cells: &[usize], out: &mut [f64]) {
        let g1 = self.sd * rng.sample::<f64, _>(StandardNormal);
        let g2 = self.sd * rng.sample::<f64, _>(StandardNormal);
        for (o, &k) in out.iter_mut().zip(cells) {
            let (i, j) = self.domain.unindex(k);
            let (x, y) = self.domain.centre(i, j);
            let r = x.hypot(y);
            *o = if r == 0.0 { g1.hypot(g2) } else { -(x * g1 + y * g2) / r };
        }
    }
}

/// Per-draw extremes of `S` Gaussian-field draws over the window.
pub fn gaussian_replicates(
    sampler: &dyn FluctuationSampler,
    window: &BinaryMask,
    draws: usize,
    seed: u64,
) -> Result<Vec<SupStat>> {
    if draws == 0 {
        return Err(Error::InvalidParameter("need at least one draw".into()));
    }
    let cells = window_cells(sampler.domain(), window)?;
    Ok((0..draws as u64)
        .into_par_iter()
        .map_init(
            || vec![0.0; cells.len()],
            |buf, s| {
                sampler.sample_cells(&mut substream(seed, s), &cells, buf);
                SupStat::of(buf)
            },
        )
        .collect())
}

/// Quantiles of the sup functionals from `S` draws of a known limit field.
pub fn mc_sup_quantile(
    sampler: &dyn FluctuationSampler,
    window: &BinaryMask,
    alpha: f64,
    draws: usize,
    seed: u64,
) -> Result<QuantileReport> {
    check_alpha(alpha)?;
    let stats = gaussian_replicates(sampler, window, draws, seed)?;
    Ok(QuantileReport::from_replicates(&stats, alpha, seed, describe_window(window), "gaussian"))
}

/// Per-replicate extremes of `Z*_b = sqrt(n) (b̄*_b - b̄_n)` over the window,
/// resampling the stack's fields with replacement.
pub fn bootstrap_replicates(
    stack: &SampleStack,
    window: &BinaryMask,
    replicates: usize,
    seed: u64,
) -> Result<Vec<SupStat>> {
    let n = stack.len();
    if n < 2 {
        return Err(Error::StackTooSmall { got: n, need: 2 });
    }
    if replicates == 0 {
        return Err(Error::InvalidParameter("need at least one bootstrap replicate".into()));
    }
    let cells = window_cells(stack.domain(), window)?;
    let mean = mean_odf(stack);
    let centre: Vec<f64> = cells.iter().map(|&k| mean.values()[k]).collect();

    // Identical fields (common for two-set models) are pooled so that a
    // replicate costs one pass per distinct field, not per sample.
    let mut groups: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut distinct: Vec<Vec<f64>> = Vec::new();
    let mut group_of = Vec::with_capacity(n);
    for f in stack.fields() {
        let vals: Vec<f64> = cells.iter().map(|&k| f.values()[k]).collect();
        let key: Vec<u64> = vals.iter().map(|v| v.to_bits()).collect();
        let g = *groups.entry(key).or_insert_with(|| {
            distinct.push(vals);
            distinct.len() - 1
        });
        group_of.push(g);
    }

    let root_n = (n as f64).sqrt();
    let inv_n = 1.0 / n as f64;
    Ok((0..replicates as u64)
        .into_par_iter()
        .map_init(
            || (vec![0u32; distinct.len()], vec![0.0; cells.len()]),
            |(counts, acc), b| {
                let mut rng = substream(seed, b);
                counts.iter_mut().for_each(|c| *c = 0);
                for _ in 0..n {
                    counts[group_of[rng.random_range(0..n)]] += 1;
                }
                acc.iter_mut().for_each(|a| *a = 0.0);
                for (g, &c) in counts.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    let c = c as f64;
                    for (a, v) in acc.iter_mut().zip(&distinct[g]) {
                        *a += c * v;
                    }
                }
                for (a, m) in acc.iter_mut().zip(&centre) {
                    *a = root_n * (*a * inv_n - m);
                }
                SupStat::of(acc)
            },
        )
        .collect())
}

/// Nonparametric bootstrap quantiles of the mean-ODF fluctuation.
pub fn bootstrap_quantiles(
    stack: &SampleStack,
    window: &BinaryMask,
    alpha: f64,
    replicates: usize,
    seed: u64,
) -> Result<QuantileReport> {
    check_alpha(alpha)?;
    let stats = bootstrap_replicates(stack, window, replicates, seed)?;
    Ok(QuantileReport::from_replicates(&stats, alpha, seed, describe_window(window), "bootstrap"))
}

/// Symmetric (`q2`) or asymmetric (`q21 <= 0 <= q22`) band quantiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandQuantiles {
    Symmetric(f64),
    Asymmetric { q21: f64, q22: f64 },
}

impl BandQuantiles {
    /// Offsets added to the lower and upper level.
    fn offsets(self) -> (f64, f64) {
        match self {
            BandQuantiles::Symmetric(q) => (-q, q),
            BandQuantiles::Asymmetric { q21, q22 } => (q21, q22),
        }
    }
}

impl From<f64> for BandQuantiles {
    fn from(q: f64) -> Self {
        BandQuantiles::Symmetric(q)
    }
}

fn check_n(n: usize) -> Result<f64> {
    if n == 0 {
        Err(Error::InvalidParameter("sample size n must be >= 1".into()))
    } else {
        Ok((n as f64).sqrt())
    }
}

fn masked(f: &ScalarField, window: &BinaryMask, pred: impl Fn(f64) -> bool) -> Result<BinaryMask> {
    window_cells(f.domain(), window)?;
    let cells = f.values().iter().zip(window.cells()).map(|(&v, &w)| w && pred(v)).collect();
    BinaryMask::new(*f.domain(), cells)
}

/// `{x ∈ W : f̂(x) <= p + q1/sqrt(n)}`.
pub fn ci_sublevel(fhat: &ScalarField, n: usize, p: f64, q1: f64, window: &BinaryMask) -> Result<BinaryMask> {
    let t = p + q1 / check_n(n)?;
    masked(fhat, window, |v| v <= t)
}

/// `{x ∈ W : p1 + lo/sqrt(n) <= f̂(x) <= p2 + hi/sqrt(n)}` with
/// `(lo, hi) = (-q2, q2)` or `(q21, q22)`.
pub fn ci_band(
    fhat: &ScalarField,
    n: usize,
    p1: f64,
    p2: f64,
    q: BandQuantiles,
    window: &BinaryMask,
) -> Result<BinaryMask> {
    if p1.is_nan() || p2.is_nan() || p1 > p2 {
        return Err(Error::InvalidParameter(format!("need p1 <= p2, got ({p1}, {p2})")));
    }
    let root_n = check_n(n)?;
    let (lo, hi) = q.offsets();
    let (a, b) = (p1 + lo / root_n, p2 + hi / root_n);
    masked(fhat, window, |v| a <= v && v <= b)
}

/// Confidence region for the level boundary `{f = p}`.
pub fn ci_level_boundary(
    fhat: &ScalarField,
    n: usize,
    p: f64,
    q: BandQuantiles,
    window: &BinaryMask,
) -> Result<BinaryMask> {
    ci_band(fhat, n, p, p, q, window)
}

/// `{x ∈ W : b̄_n(x) <= q1/sqrt(n)}`.
pub fn ci_mean_set(stack: &SampleStack, q1: f64, window: &BinaryMask) -> Result<BinaryMask> {
    ci_sublevel(&mean_odf(stack), stack.len(), 0.0, q1, window)
}

/// `{x ∈ W : |b̄_n(x)| <= q2/sqrt(n)}` (or the asymmetric analogue).
pub fn ci_mean_boundary(stack: &SampleStack, q: BandQuantiles, window: &BinaryMask) -> Result<BinaryMask> {
    ci_level_boundary(&mean_odf(stack), stack.len(), 0.0, q, window)
}

/// Sample covariance (denominator `n - 1`) of the ODF values at two cells.
pub fn empirical_fluctuation_cov(stack: &SampleStack, x: usize, y: usize) -> Result<f64> {
    let n = stack.len();
    if n < 2 {
        return Err(Error::StackTooSmall { got: n, need: 2 });
    }
    let len = stack.domain().len();
    if x >= len || y >= len {
        let (i, j) = stack.domain().unindex(x.max(y));
        return Err(Error::IndexOutOfRange { i, j, nx: stack.domain().nx, ny: stack.domain().ny });
    }
    let a: Vec<f64> = stack.fields().iter().map(|f| f.values()[x]).collect();
    let b: Vec<f64> = stack.fields().iter().map(|f| f.values()[y]).collect();
    let (ma, mb) = (a.iter().sum::<f64>() / n as f64, b.iter().sum::<f64>() / n as f64);
    Ok(a.iter().zip(&b).map(|(u, v)| (u - ma) * (v - mb)).sum::<f64>() / (n - 1) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageTarget {
    MeanSet,
    MeanBoundary,
}

/// Where a coverage experiment takes its quantiles from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileSource {
    /// Bootstrap each simulated stack with this many replicates.
    Bootstrap { replicates: usize },
    /// Monte-Carlo quantiles of the model's limiting field, computed once.
    Limit { draws: usize },
    /// Known quantiles.
    Fixed { q1: f64, q2: f64 },
}

#[derive(Clone, Debug)]
pub struct CoverageConfig {
    pub n: usize,
    pub trials: usize,
    pub alpha: f64,
    pub source: QuantileSource,
    pub target: CoverageTarget,
    pub seed: u64,
    /// Cells with `|E[b_A]| <= truth_tol` form the true boundary; the true
    /// set is `{E[b_A] <= truth_tol}`.
    pub truth_tol: f64,
    /// Defaults to the whole grid.
    pub window: Option<BinaryMask>,
}

impl CoverageConfig {
    pub fn new(n: usize, trials: usize, alpha: f64, source: QuantileSource, target: CoverageTarget, seed: u64) -> Self {
        CoverageConfig { n, trials, alpha, source, target, seed, truth_tol: 1e-9, window: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub model: String,
    pub target: CoverageTarget,
    pub n: usize,
    pub trials: usize,
    pub alpha: f64,
    pub covered: usize,
    pub rate: f64,
    pub truth_cells: usize,
    pub source: QuantileSource,
    pub seed: u64,
}

/// Fraction of seeded trials for which `trial` reports success. Trial `t`
/// receives its own derived seed.
pub fn coverage_rate<F>(trials: usize, seed: u64, trial: F) -> Result<f64>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let hits = (0..trials as u64)
        .into_par_iter()
        .map(|t| trial(child_seed(seed, t)))
        .collect::<Result<Vec<bool>>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / trials as f64)
}

/// Simulate `trials` stacks of size `n`, build the confidence region for
/// the model's expected set or boundary, and count how often it contains
/// the truth computed from the expected ODF.
pub fn coverage_experiment(model: &RandomSetModel, domain: &GridDomain, cfg: &CoverageConfig) -> Result<CoverageReport> {
    check_alpha(cfg.alpha)?;
    let window = cfg.window.clone().unwrap_or_else(|| BinaryMask::filled(*domain, true));
    let cells = window_cells(domain, &window)?;
    let expected = expected_odf(model, domain)?;
    let truth: Vec<usize> = cells
        .iter()
        .copied()
        .filter(|&k| {
            let e = expected.values()[k];
            match cfg.target {
                CoverageTarget::MeanSet => e <= cfg.truth_tol,
                CoverageTarget::MeanBoundary => e.abs() <= cfg.truth_tol,
            }
        })
        .collect();
    if truth.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "the target has no cells on this grid within tolerance {}",
            cfg.truth_tol
        )));
    }
    let fixed = match cfg.source {
        QuantileSource::Limit { draws } => {
            let field = model.limiting_field(domain)?;
            let r = mc_sup_quantile(&field, &window, cfg.alpha, draws, child_seed(cfg.seed, u64::MAX))?;
            Some((r.q1, r.q2))
        }
        QuantileSource::Fixed { q1, q2 } => Some((q1, q2)),
        QuantileSource::Bootstrap { .. } => None,
    };
    let n = cfg.n;
    let covered = |trial_seed: u64| -> Result<bool> {
        let stack = sample_stack(model, domain, n, child_seed(trial_seed, 0))?;
        let (q1, q2) = match (fixed, cfg.source) {
            (Some(q), _) => q,
            (None, QuantileSource::Bootstrap { replicates }) => {
                let r = bootstrap_quantiles(&stack, &window, cfg.alpha, replicates, child_seed(trial_seed, 1))?;
                (r.q1, r.q2)
            }
            _ => unreachable!(),
        };
        let region = match cfg.target {
            CoverageTarget::MeanSet => ci_mean_set(&stack, q1, &window)?,
            CoverageTarget::MeanBoundary => ci_mean_boundary(&stack, BandQuantiles::Symmetric(q2), &window)?,
        };
        Ok(truth.iter().all(|&k| region.cells()[k]))
    };
    let rate = coverage_rate(cfg.trials, cfg.seed, covered)?;
    Ok(CoverageReport {
        model: model.kind().to_string(),
        target: cfg.target,
        n,
        trials: cfg.trials,
        alpha: cfg.alpha,
        covered: (rate * cfg.trials as f64).round() as usize,
        rate,
        truth_cells: truth.len(),
        source: cfg.source,
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanset::empirical_mean_set;
    use crate::models::{ModelKind, Draw};
    use proptest::prelude::*;

    fn plane(h: f64) -> GridDomain {
        GridDomain::covering(-2.0, 2.0, -2.0, 2.0, h).unwrap()
    }

    #[test]
    fn order_statistic_convention() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(order_statistic(&v, 0.95), 950.0);
        assert_eq!(order_statistic(&v, 0.025), 25.0);
        assert_eq!(order_statistic(&v, 0.9751), 976.0);
        assert_eq!(order_statistic(&[3.0], 0.5), 3.0);
        assert!(quantile_stderr(&[3.0], 0.95).is_infinite());
        assert!(quantile_stderr(&v, 0.95) > 0.0);
    }

    #[test]
    fn identical_fields_give_zero_quantiles() {
        let d = plane(0.5);
        let f = ScalarField::from_fn(d, |x, y| x.hypot(y) - 1.0);
        let s = SampleStack::new(vec![f; 5]).unwrap();
        let w = BinaryMask::filled(d, true);
        let r = bootstrap_quantiles(&s, &w, 0.05, 50, 1).unwrap();
        // zero up to rounding in the mean
        for q in [r.q1, r.q2, r.q21, r.q22] {
            assert!(q.abs() < 1e-12, "{q}");
        }
    }

    #[test]
    fn single_replicate_report_and_json() {
        let d = plane(0.5);
        let m = RandomSetModel::default_for(ModelKind::DiscRandomRadius);
        let s = sample_stack(&m, &d, 10, 3).unwrap();
        let w = BinaryMask::filled(d, true);
        let r = bootstrap_quantiles(&s, &w, 0.05, 1, 9).unwrap();
        assert!(r.mc_stderr.q1.is_infinite());
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"q1\":null"));
        let back: QuantileReport = serde_json::from_str(&json).unwrap();
        assert!(back.mc_stderr.q2.is_infinite());
        assert_eq!(back.q1, r.q1);
    }

    #[test]
    fn error_cases() {
        let d = plane(0.5);
        let f = ScalarField::constant(d, 0.0);
        let one = SampleStack::new(vec![f.clone()]).unwrap();
        let w = BinaryMask::filled(d, true);
        assert!(matches!(bootstrap_quantiles(&one, &w, 0.05, 10, 0), Err(Error::StackTooSmall { .. })));
        let two = SampleStack::new(vec![f.clone(), f]).unwrap();
        let empty = BinaryMask::filled(d, false);
        assert!(matches!(bootstrap_quantiles(&two, &empty, 0.05, 10, 0), Err(Error::EmptyWindow)));
        assert!(bootstrap_quantiles(&two, &w, 1.0, 10, 0).is_err());
        assert!(matches!(empirical_fluctuation_cov(&one, 0, 1), Err(Error::StackTooSmall { .. })));
    }

    #[test]
    fn zero_variance_sampler() {
        let d = plane(0.5);
        let z = GaussianCombination::new(vec![ScalarField::constant(d, 1.0)], &DMatrix::zeros(1, 1)).unwrap();
        let r = mc_sup_quantile(&z, &BinaryMask::filled(d, true), 0.05, 100, 1).unwrap();
        assert_eq!((r.q1, r.q2, r.q21, r.q22), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn not_psd_is_rejected() {
        let d = plane(0.5);
        let basis = vec![ScalarField::constant(d, 1.0), ScalarField::constant(d, 2.0)];
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(GaussianCombination::new(basis, &cov), Err(Error::NotPsd(_))));
    }

    #[test]
    fn semidefinite_covariance_uses_eigen_fallback() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let l = covariance_factor(&cov).unwrap();
        assert!((&l * l.transpose() - &cov).abs().max() < 1e-12);
    }

    #[test]
    fn disc_radius_exact_quantiles() {
        // Z ≡ -sqrt(var) N(0,1): q1 = 1.645 sd, q2 = 1.96 sd
        let d = plane(0.5);
        let m = RandomSetModel::default_for(ModelKind::DiscRandomRadius);
        let z = m.limiting_field(&d).unwrap();
        let r = mc_sup_quantile(&z, &BinaryMask::filled(d, true), 0.05, 20_000, 5).unwrap();
        let sd = (1.0f64 / 12.0).sqrt();
        assert!((r.q1 - 1.645 * sd).abs() < 0.02, "{}", r.q1);
        assert!((r.q2 - 1.96 * sd).abs() < 0.02, "{}", r.q2);
    }

    #[test]
    fn masks_basic_properties() {
        let d = plane(0.125);
        let f = ScalarField::from_fn(d, |x, y| x.hypot(y));
        let w = BinaryMask::filled(d, true);
        let plug = crate::levelset::sublevel_set(&f, 1.0);
        assert_eq!(ci_sublevel(&f, 100, 1.0, 0.0, &w).unwrap(), plug);
        let mut prev = plug.clone();
        for q in [0.5, 1.0, 2.0] {
            let r = ci_sublevel(&f, 100, 1.0, q, &w).unwrap();
            assert!(prev.is_subset_of(&r).unwrap());
            prev = r;
        }
        let bd = crate::levelset::level_boundary_with(&f, 1.0, 0.0, crate::levelset::BoundaryMode::Tolerance).unwrap();
        assert_eq!(ci_level_boundary(&f, 100, 1.0, 0.0.into(), &w).unwrap(), bd);
        let sym = ci_band(&f, 100, 0.5, 1.0, BandQuantiles::Symmetric(2.0), &w).unwrap();
        let asym = ci_band(&f, 100, 0.5, 1.0, BandQuantiles::Asymmetric { q21: -1.5, q22: 2.0 }, &w).unwrap();
        assert!(asym.is_subset_of(&sym).unwrap());
        let huge = ci_band(&f, 100, 1.0, 1.0, BandQuantiles::Symmetric(1e6), &w).unwrap();
        assert!(huge.is_full());
        assert!(matches!(ci_sublevel(&f, 100, 1.0, 1.0, &BinaryMask::filled(d, false)), Err(Error::EmptyWindow)));
    }

    #[test]
    fn disc_radius_mean_set_ci_is_wider_disc() {
        let d = plane(0.02);
        let m = RandomSetModel::default_for(ModelKind::DiscRandomRadius);
        let s = sample_stack(&m, &d, 100, 8).unwrap();
        let sd = (1.0f64 / 12.0).sqrt();
        let region = ci_mean_set(&s, 1.645 * sd, &BinaryMask::filled(d, true)).unwrap();
        // radius R̄ + 1.645 sd / 10
        let rbar = -mean_odf(&s).values()[d.index(100, 100)];
        let disc = BinaryMask::from_fn(d, |x, y| x.hypot(y) <= rbar + 1.645 * sd / 10.0);
        assert!(crate::distance::hausdorff(&region, &disc).unwrap() <= d.diagonal());
        assert!(empirical_mean_set(&s).is_subset_of(&region).unwrap());
    }

    #[test]
    fn bootstrap_is_deterministic_and_window_monotone() {
        let d = plane(0.25);
        let m = RandomSetModel::default_for(ModelKind::PacmanRandomRadius);
        let s = sample_stack(&m, &d, 20, 4).unwrap();
        let w1 = BinaryMask::from_fn(d, |x, y| x.abs() <= 1.0 && y.abs() <= 1.0);
        let w2 = BinaryMask::filled(d, true);
        let a = bootstrap_quantiles(&s, &w2, 0.05, 200, 7).unwrap();
        let b = bootstrap_quantiles(&s, &w2, 0.05, 200, 7).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let r1 = bootstrap_replicates(&s, &w1, 200, 7).unwrap();
        let r2 = bootstrap_replicates(&s, &w2, 200, 7).unwrap();
        for (x, y) in r1.iter().zip(&r2) {
            assert!(x.max <= y.max && x.abs_max <= y.abs_max && x.min >= y.min);
        }
        let q1 = bootstrap_quantiles(&s, &w1, 0.05, 200, 7).unwrap();
        assert!(q1.q1 <= a.q1 && q1.q2 <= a.q2);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let d = plane(0.25);
        let m = RandomSetModel::default_for(ModelKind::DiscRandomCentre1dOffset);
        let s = sample_stack(&m, &d, 30, 2).unwrap();
        let w = BinaryMask::filled(d, true);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| serde_json::to_string(&bootstrap_quantiles(&s, &w, 0.1, 300, 11).unwrap()).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn coverage_disc_radius_limit_quantiles() {
        let d = GridDomain::covering(-1.0, 1.0, -1.0, 1.0, 0.125).unwrap();
        let m = RandomSetModel::default_for(ModelKind::DiscRandomRadius);
        let cfg = CoverageConfig::new(100, 500, 0.05, QuantileSource::Limit { draws: 4000 }, CoverageTarget::MeanSet, 1);
        let r = coverage_experiment(&m, &d, &cfg).unwrap();
        assert!(r.rate >= 0.93, "{r:?}");
        assert!(r.truth_cells > 0);
    }

    #[test]
    fn coverage_disc_radius_bootstrap() {
        let d = GridDomain::covering(-1.0, 1.0, -1.0, 1.0, 0.25).unwrap();
        let m = RandomSetModel::default_for(ModelKind::DiscRandomRadius);
        let cfg = CoverageConfig::new(
            100,
            200,
            0.05,
            QuantileSource::Bootstrap { replicates: 200 },
            CoverageTarget::MeanBoundary,
            2,
        );
        let r = coverage_experiment(&m, &d, &cfg).unwrap();
        assert!(r.rate >= 0.9, "{r:?}");
    }

    #[test]
    fn coverage_decreases_with_alpha() {
        let d = GridDomain::covering(-1.0, 1.0, -1.0, 1.0, 0.25).unwrap();
        let m = RandomSetModel::default_for(ModelKind::DiscRandomRadius);
        let rate = |alpha| {
            let cfg = CoverageConfig::new(50, 200, alpha, QuantileSource::Limit { draws: 2000 }, CoverageTarget::MeanSet, 3);
            coverage_experiment(&m, &d, &cfg).unwrap().rate
        };
        let (a, b, c) = (rate(0.05), rate(0.5), rate(0.95));
        assert!(a >= b && b >= c, "{a} {b} {c}");
        assert!(c < 0.2);
    }

    #[test]
    fn set_or_boundary_exact_coverage() {
        // the boundary region misses part of [0, 1] iff |p̂ - 1/2| > 0.98/sqrt(n)
        let d = GridDomain::line(-0.5, 1.0 / 32.0, 65).unwrap();
        let m = RandomSetModel::default_for(ModelKind::SetOrBoundary);
        let mut cfg = CoverageConfig::new(
            1000,
            400,
            0.05,
            QuantileSource::Fixed { q1: 0.5 * 1.645, q2: 0.5 * 1.96 },
            CoverageTarget::MeanBoundary,
            5,
        );
        cfg.truth_tol = 1e-9;
        let r = coverage_experiment(&m, &d, &cfg).unwrap();
        assert_eq!(r.truth_cells, 33);
        assert!((r.rate - 0.95).abs() < 0.035, "{r:?}");
    }

    #[test]
    fn fluctuation_covariance() {
        let d = plane(0.25);
        let f = ScalarField::constant(d, 0.3);
        let s = SampleStack::new(vec![f.clone(), f]).unwrap();
        assert_eq!(empirical_fluctuation_cov(&s, 5, 5).unwrap(), 0.0);

        // interval model: sample covariance against quadrature of the model's
        let line = GridDomain::line(-2.0, 0.25, 17).unwrap();
        let m = RandomSetModel::default_for(ModelKind::IntervalRandomCentre);
        let s = sample_stack(&m, &line, 20_000, 12).unwrap();
        for (a, b) in [(4usize, 8usize), (8, 8), (2, 14), (6, 11)] {
            let (x, y) = (-2.0 + 0.25 * a as f64, -2.0 + 0.25 * b as f64);
            let exy = crate::quad::integrate(|t| ((x - t).abs() - 1.0) * ((y - t).abs() - 1.0), -1.0, 1.0, 1e-12, &[x, y]) / 2.0;
            let exact = exy - m.expected_value(x, 0.0) * m.expected_value(y, 0.0);
            let got = empirical_fluctuation_cov(&s, a, b).unwrap();
            assert!((got - exact).abs() < 0.01, "({x}, {y}): {got} vs {exact}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn increment_variance_and_covariance_bounds(seed in 0u64..1000, i0 in 0usize..17, j0 in 0usize..17, i1 in 0usize..17, j1 in 0usize..17) {
            let d = plane(0.25);
            let m = RandomSetModel::default_for(ModelKind::PacmanRandomRadius);
            let n = 400;
            let s = sample_stack(&m, &d, n, seed).unwrap();
            let (kx, ky) = (d.index(i0, j0), d.index(i1, j1));
            let (x, y) = (d.centre(i0, j0), d.centre(i1, j1));
            let dist = (x.0 - y.0).hypot(x.1 - y.1);
            // var(b(x) - b(y)) <= |x - y|^2
            let v = empirical_fluctuation_cov(&s, kx, kx).unwrap() + empirical_fluctuation_cov(&s, ky, ky).unwrap()
                - 2.0 * empirical_fluctuation_cov(&s, kx, ky).unwrap();
            prop_assert!(v <= dist * dist + 1e-9);
            // |cov(Z(y) - Z(x), Z(y') - Z(x'))| <= 2 |y - x| |y' - x'|, up to sampling error
            let (kx2, ky2) = (d.index(16 - i0, j1), d.index(i1, 16 - j0));
            let x2 = d.centre(16 - i0, j1);
            let y2 = d.centre(i1, 16 - j0);
            let dist2 = (x2.0 - y2.0).hypot(x2.1 - y2.1);
            let c = |a, b| empirical_fluctuation_cov(&s, a, b).unwrap();
            let cov = c(ky, ky2) - c(ky, kx2) - c(kx, ky2) + c(kx, kx2);
            prop_assert!(cov.abs() <= 2.0 * dist * dist2 + 4.0 / (n as f64).sqrt());
        }
    }

    #[test]
    fn disc_centre_limit_quantile() {
        let d = plane(0.05);
        let z = DiscCentreLimit::new(d, 1.0);
        let r = mc_sup_quantile(&z, &BinaryMask::filled(d, true), 0.05, 4000, 3).unwrap();
        assert!((r.q2 - (5.991f64 / 3.0).sqrt()).abs() < 0.08, "{}", r.q2);
        let _ = Draw::Flag(true);
    }
}
