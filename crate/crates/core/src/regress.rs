//! Covariate domains of normal linear models.
//!
//! For `E[Y | x] = β · x̃(x)` with a feature map `x̃`, the least-squares
//! estimate `β̂` gives the response surface `f̂(x) = ±β̂ · x̃(x)`. Its
//! fluctuation converges to the Gaussian field `Z · x̃(x)` with
//! `Z ~ N(0, Σ)`, estimated by `Σ̂ = σ̂² (X'X)⁻¹`. Sup-quantiles of that
//! field calibrate confidence regions `{x : f̂(x) <= p + q1/sqrt(n)}` for
//! the covariate set on which the mean response is below a level.
//!
//! Quantiles are drawn with `Z ~ N(0, Σ̂)` exactly as `Σ̂` is defined
//! above, and the region still divides by `sqrt(n)`; this reproduces the
//! standard tree-volume worked numbers (q1 ≈ 0.23 for the cherry trees).

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::confidence::{ci_band, ci_sublevel, mc_sup_quantile, BandQuantiles, GaussianCombination, QuantileReport};
use crate::error::{Error, Result};
use crate::grid::{BinaryMask, GridDomain, ScalarField};

/// One component of the feature map `x̃`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureTerm {
    Constant,
    Coord(usize),
    LogCoord(usize),
    Product(usize, usize),
}

impl FeatureTerm {
    fn eval(self, x: &[f64]) -> std::result::Result<f64, String> {
        Ok(match self {
            FeatureTerm::Constant => 1.0,
            FeatureTerm::Coord(k) => x[k],
            FeatureTerm::LogCoord(k) => {
                if !(x[k] > 0.0) {
                    return Err(format!("log of covariate {k} = {}", x[k]));
                }
                x[k].ln()
            }
            FeatureTerm::Product(k, l) => x[k] * x[l],
        })
    }

    fn max_coord(self) -> Option<usize> {
        match self {
            FeatureTerm::Constant => None,
            FeatureTerm::Coord(k) | FeatureTerm::LogCoord(k) => Some(k),
            FeatureTerm::Product(k, l) => Some(k.max(l)),
        }
    }
}

/// Ordered list of feature terms; `β` has one entry per term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureMap {
    pub terms: Vec<FeatureTerm>,
}

impl FeatureMap {
    pub fn new(terms: Vec<FeatureTerm>) -> Self {
        FeatureMap { terms }
    }

    /// `(1, x_0, x_1, ...)` for `d` covariates.
    pub fn linear(d: usize) -> Self {
        let mut terms = vec![FeatureTerm::Constant];
        terms.extend((0..d).map(FeatureTerm::Coord));
        FeatureMap { terms }
    }

    /// `(1, log x_0, log x_1, ...)` for `d` covariates.
    pub fn log_linear(d: usize) -> Self {
        let mut terms = vec![FeatureTerm::Constant];
        terms.extend((0..d).map(FeatureTerm::LogCoord));
        FeatureMap { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every term refers to one of `d` covariates.
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::DimensionMismatch("feature map has no terms".into()));
        }
        for t in &self.terms {
            if let Some(k) = t.max_coord() {
                if k >= d {
                    return Err(Error::DimensionMismatch(format!(
                        "term {t:?} refers to covariate {k} but only {d} are available"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `x̃(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.terms
            .iter()
            .map(|t| {
                t.eval(x).map_err(|reason| Error::DomainViolation {
                    x: x[0],
                    y: x.get(1).copied().unwrap_or(0.0),
                    reason,
                })
            })
            .collect()
    }

    /// Whether every `β · x̃` is a sum of monotone functions of distinct
    /// coordinates, so that its extremes over a rectangle sit at corners.
    pub fn corner_extremal(&self) -> bool {
        let mut seen = Vec::new();
        for t in &self.terms {
            match *t {
                FeatureTerm::Constant => {}
                FeatureTerm::Coord(k) | FeatureTerm::LogCoord(k) => {
                    if seen.contains(&k) {
                        return false;
                    }
                    seen.push(k);
                }
                FeatureTerm::Product(..) => return false,
            }
        }
        true
    }

    /// The feature fields `x̃_j` over a grid, covariates being `(x, y)`.
    pub fn basis_fields(&self, domain: &GridDomain) -> Result<Vec<ScalarField>> {
        self.validate(2)?;
        let mut cols = vec![Vec::with_capacity(domain.len()); self.len()];
        for (x, y) in domain.centres() {
            for (c, v) in cols.iter_mut().zip(self.eval(&[x, y])?) {
                c.push(v);
            }
        }
        Ok(cols.into_iter().map(|v| ScalarField::from_values_unchecked(*domain, v)).collect())
    }
}

/// Least-squares fit of a normal linear model.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedModel {
    pub beta_hat: DVector<f64>,
    pub sigma2_hat: f64,
    /// `σ̂² (X'X)⁻¹`.
    pub sigma_hat: DMatrix<f64>,
    pub n: usize,
    pub rss: f64,
}

impl FittedModel {
    pub fn report(&self) -> FitReport {
        FitReport {
            beta_hat: self.beta_hat.iter().copied().collect(),
            sigma2_hat: self.sigma2_hat,
            sigma_hat: self.sigma_hat.row_iter().map(|r| r.iter().copied().collect()).collect(),
            n: self.n,
            rss: self.rss,
        }
    }
}

/// Serialisable view of a [`FittedModel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub beta_hat: Vec<f64>,
    pub sigma2_hat: f64,
    pub sigma_hat: Vec<Vec<f64>>,
    pub n: usize,
    pub rss: f64,
}

/// Design matrix with one row `x̃(row)` per observation.
pub fn design_matrix(rows: &[Vec<f64>], fmap: &FeatureMap) -> Result<DMatrix<f64>> {
    let d = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
        return Err(Error::DimensionMismatch(format!("row {i} has {} covariates, expected {d}", r.len())));
    }
    fmap.validate(d)?;
    let mut x = DMatrix::zeros(rows.len(), fmap.len());
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in fmap.eval(r)?.into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    Ok(x)
}

/// Ordinary least squares via a QR factorisation of the design matrix,
/// with `σ̂² = RSS / (n - p - 1)` and `Σ̂ = σ̂² (X'X)⁻¹`.
pub fn ols_fit(rows: &[Vec<f64>], responses: &[f64], fmap: &FeatureMap) -> Result<FittedModel> {
    if rows.len() != responses.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} covariate rows but {} responses",
            rows.len(),
            responses.len()
        )));
    }
    let x = design_matrix(rows, fmap)?;
    let (n, k) = x.shape();
    if n < k + 1 {
        return Err(Error::DimensionMismatch(format!("{n} observations cannot fit {k} coefficients with an error variance")));
    }
    let y = DVector::from_column_slice(responses);
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || r.diagonal().iter().any(|v| v.abs() <= 1e-12 * scale) {
        return Err(Error::RankDeficient);
    }
    let qty = qr.q().transpose() * &y;
    let beta_hat = r.solve_upper_triangular(&qty).ok_or(Error::RankDeficient)?;
    let resid = &y - &x * &beta_hat;
    let rss = resid.norm_squared();
    let sigma2_hat = rss / (n - k) as f64;
    // (X'X)⁻¹ = R⁻¹ R⁻ᵀ
    let r_inv = r.solve_upper_triangular(&DMatrix::identity(k, k)).ok_or(Error::RankDeficient)?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let sigma_hat = (sigma2_hat * (&xtx_inv + xtx_inv.transpose())) * 0.5;
    Ok(FittedModel { beta_hat, sigma2_hat, sigma_hat, n, rss })
}

/// `f̂(x) = sign · β̂ · x̃(x)` at every cell centre, covariates `(x, y)`.
pub fn predict_field(model: &FittedModel, fmap: &FeatureMap, domain: &GridDomain, sign: f64) -> Result<ScalarField> {
    if model.beta_hat.len() != fmap.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} feature terms",
            model.beta_hat.len(),
            fmap.len()
        )));
    }
    let basis = fmap.basis_fields(domain)?;
    let mut vals = vec![0.0; domain.len()];
    for (b, f) in model.beta_hat.iter().zip(&basis) {
        for (v, x) in vals.iter_mut().zip(f.values()) {
            *v += sign * b * x;
        }
    }
    Ok(ScalarField::from_values_unchecked(*domain, vals))
}

/// The limiting fluctuation `Z · x̃` with `Z ~ N(0, Σ̂)`. Its law is
/// symmetric, so the sign of the response surface does not matter.
pub fn limiting_field(model: &FittedModel, fmap: &FeatureMap, domain: &GridDomain) -> Result<GaussianCombination> {
    GaussianCombination::new(fmap.basis_fields(domain)?, &model.sigma_hat)
}

/// The four corner cells of the grid.
pub fn corner_window(domain: &GridDomain) -> BinaryMask {
    let mut m = BinaryMask::filled(*domain, false);
    for i in [0, domain.nx - 1] {
        for j in [0, domain.ny - 1] {
            m.set(i, j, true);
        }
    }
    m
}

/// Monte-Carlo sup-quantiles of `Z · x̃` over the window from `draws`
/// Gaussian draws. When the window is the whole grid and the feature map
/// is corner-extremal, only the four corner cells are evaluated; every
/// replicate's extremes are unchanged by this.
pub fn gaussian_field_quantiles(
    model: &FittedModel,
    fmap: &FeatureMap,
    window: &BinaryMask,
    alpha: f64,
    draws: usize,
    seed: u64,
) -> Result<QuantileReport> {
    let domain = window.domain();
    let field = limiting_field(model, fmap, domain)?;
    let mut report = if window.is_full() && fmap.corner_extremal() {
        mc_sup_quantile(&field, &corner_window(domain), alpha, draws, seed)?
    } else {
        mc_sup_quantile(&field, window, alpha, draws, seed)?
    };
    report.window_id = crate::confidence::describe_window(window);
    Ok(report)
}

/// `{x ∈ W : f̂(x) <= p + q1/sqrt(n)}` for the fitted surface.
pub fn covariate_region(
    model: &FittedModel,
    fmap: &FeatureMap,
    sign: f64,
    p: f64,
    q1: f64,
    window: &BinaryMask,
) -> Result<BinaryMask> {
    let f = predict_field(model, fmap, window.domain(), sign)?;
    ci_sublevel(&f, model.n, p, q1, window)
}

/// Band region `{x ∈ W : p1 - ... <= f̂(x) <= p2 + ...}` for the fitted surface.
pub fn covariate_band(
    model: &FittedModel,
    fmap: &FeatureMap,
    sign: f64,
    (p1, p2): (f64, f64),
    q: BandQuantiles,
    window: &BinaryMask,
) -> Result<BinaryMask> {
    let f = predict_field(model, fmap, window.domain(), sign)?;
    ci_band(&f, model.n, p1, p2, q, window)
}

/// Columns of a numeric CSV file with a header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

pub fn parse_table(text: &str, path: &Path) -> Result<Table> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::parse(path, "missing header row"))?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().trim_matches('"').to_string()).collect();
    let mut columns = vec![Vec::new(); names.len()];
    for (row, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != names.len() {
            return Err(Error::parse(path, format!("row {} has {} fields, header has {}", row + 1, cells.len(), names.len())));
        }
        for (c, s) in columns.iter_mut().zip(cells) {
            let v = s.trim().parse::<f64>().map_err(|e| Error::parse(path, format!("row {}: `{}`: {e}", row + 1, s.trim())))?;
            c.push(v);
        }
    }
    Ok(Table { names, columns })
}

pub fn read_table(path: &Path) -> Result<Table> {
    parse_table(&std::fs::read_to_string(path)?, path)
}

/// How a data table maps onto a regression, stored as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionSpec {
    /// Column names; covariate `k` of the feature map is `covariates[k]`.
    pub covariates: Vec<String>,
    pub response: String,
    /// Regress `log(response)` instead of the response.
    #[serde(default)]
    pub log_response: bool,
    pub terms: FeatureMap,
    /// Use `f̂ = -β̂ · x̃`, turning "mean response at least t" into a
    /// sublevel set at `-t`.
    #[serde(default)]
    pub negate: bool,
}

impl RegressionSpec {
    pub fn sign(&self) -> f64 {
        if self.negate {
            -1.0
        } else {
            1.0
        }
    }

    /// Covariate rows and responses drawn from the table.
    pub fn extract(&self, table: &Table) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let missing = |n: &str| Error::InvalidParameter(format!("no column named `{n}`"));
        let covs: Vec<&[f64]> = self
            .covariates
            .iter()
            .map(|n| table.column(n).ok_or_else(|| missing(n)))
            .collect::<Result<_>>()?;
        let mut y = table.column(&self.response).ok_or_else(|| missing(&self.response))?.to_vec();
        if self.log_response {
            for (i, v) in y.iter_mut().enumerate() {
                if !(*v > 0.0) {
                    return Err(Error::InvalidParameter(format!("response row {} = {v} has no logarithm", i + 1)));
                }
                *v = v.ln();
            }
        }
        let rows = (0..table.rows()).map(|i| covs.iter().map(|c| c[i]).collect()).collect();
        Ok((rows, y))
    }

    pub fn fit(&self, table: &Table) -> Result<FittedModel> {
        let (rows, y) = self.extract(table)?;
        ols_fit(&rows, &y, &self.terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levelset::{directional_monotonicity, sublevel_set};
    use crate::rng::substream;
    use rand::Rng;

    fn trees() -> (RegressionSpec, Table) {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/trees.csv");
        let spec = RegressionSpec {
            covariates: vec!["girth".into(), "height".into()],
            response: "volume".into(),
            log_response: true,
            terms: FeatureMap::log_linear(2),
            negate: true,
        };
        (spec, read_table(&path).unwrap())
    }

    #[test]
    fn exact_line() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0]).collect();
        let m = ols_fit(&rows, &y, &FeatureMap::linear(1)).unwrap();
        assert!(m.beta_hat[0].abs() < 1e-12 && (m.beta_hat[1] - 2.0).abs() < 1e-12);
        assert!(m.sigma2_hat < 1e-24);
    }

    #[test]
    fn matches_normal_equations_and_residuals_are_orthogonal() {
        let mut rng = substream(42, 0);
        let rows: Vec<Vec<f64>> = (0..10).map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
        let y: Vec<f64> = (0..10).map(|_| rng.random_range(-5.0..5.0)).collect();
        let fmap = FeatureMap::linear(2);
        let m = ols_fit(&rows, &y, &fmap).unwrap();
        // oracle: (X'X)⁻¹ X'y by an explicit inverse
        let x = design_matrix(&rows, &fmap).unwrap();
        let yv = DVector::from_column_slice(&y);
        let xtx_inv = (x.transpose() * &x).try_inverse().unwrap();
        let beta = &xtx_inv * x.transpose() * &yv;
        assert!((&beta - &m.beta_hat).amax() < 1e-8);
        let rss = (&yv - &x * &beta).norm_squared();
        assert!((m.sigma2_hat - rss / 7.0).abs() < 1e-10);
        assert!((&m.sigma_hat - xtx_inv * (rss / 7.0)).amax() < 1e-8);
        let r = &yv - &x * &m.beta_hat;
        assert!((x.transpose() * r).amax() < 1e-8 * yv.amax());
    }

    #[test]
    fn fit_errors() {
        let rows = vec![vec![1.0], vec![1.0], vec![1.0]];
        assert!(matches!(ols_fit(&rows, &[1.0, 2.0, 3.0], &FeatureMap::linear(1)), Err(Error::RankDeficient)));
        assert!(matches!(ols_fit(&rows, &[1.0], &FeatureMap::linear(1)), Err(Error::DimensionMismatch(_))));
        let two = vec![vec![1.0], vec![2.0]];
        assert!(matches!(ols_fit(&two, &[1.0, 2.0], &FeatureMap::linear(1)), Err(Error::DimensionMismatch(_))));
        let bad = FeatureMap::new(vec![FeatureTerm::Constant, FeatureTerm::Coord(3)]);
        assert!(ols_fit(&rows, &[1.0, 2.0, 3.0], &bad).is_err());
    }

    #[test]
    fn trees_fit_matches_reference_values() {
        let (spec, table) = trees();
        assert_eq!(table.rows(), 31);
        let m = spec.fit(&table).unwrap();
        for (got, want) in m.beta_hat.iter().zip([-6.63, 1.98, 1.12]) {
            assert!((got - want).abs() < 0.01, "{got} vs {want}");
        }
        let printed = [[0.6397, 0.0208, -0.1601], [0.0208, 0.0056, -0.0081], [-0.1601, -0.0081, 0.0418]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((m.sigma_hat[(i, j)] - printed[i][j]).abs() < 0.002, "({i},{j}) {}", m.sigma_hat[(i, j)]);
            }
        }
    }

    fn trees_domain() -> GridDomain {
        GridDomain::covering(5.0, 25.0, 50.0, 100.0, 0.5).unwrap()
    }

    #[test]
    fn prediction_and_domain_violation() {
        let (spec, table) = trees();
        let m = spec.fit(&table).unwrap();
        let d = trees_domain();
        let f = predict_field(&m, &spec.terms, &d, -1.0).unwrap();
        assert!(f.values().iter().all(|v| v.is_finite()));
        // decreasing in both covariates
        assert!(directional_monotonicity(&f.map(|v| -v), (1.0, 0.0)).unwrap());
        let touching = GridDomain::covering(0.0, 25.0, 50.0, 100.0, 0.5).unwrap();
        assert!(matches!(predict_field(&m, &spec.terms, &touching, -1.0), Err(Error::DomainViolation { .. })));

        let c = FittedModel { beta_hat: DVector::from_element(1, 3.5), sigma2_hat: 0.0, sigma_hat: DMatrix::zeros(1, 1), n: 4, rss: 0.0 };
        let f = predict_field(&c, &FeatureMap::new(vec![FeatureTerm::Constant]), &d, 1.0).unwrap();
        assert!(f.values().iter().all(|&v| v == 3.5));
    }

    #[test]
    fn zero_covariance_gives_zero_quantiles() {
        let d = trees_domain();
        let m = FittedModel { beta_hat: DVector::zeros(3), sigma2_hat: 0.0, sigma_hat: DMatrix::zeros(3, 3), n: 10, rss: 0.0 };
        let r = gaussian_field_quantiles(&m, &FeatureMap::log_linear(2), &BinaryMask::filled(d, true), 0.05, 200, 1).unwrap();
        assert_eq!((r.q1, r.q2, r.q21, r.q22), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn corner_shortcut_matches_full_grid_per_replicate() {
        let (spec, table) = trees();
        let m = spec.fit(&table).unwrap();
        let d = GridDomain::covering(5.0, 25.0, 50.0, 100.0, 1.0).unwrap();
        let z = limiting_field(&m, &spec.terms, &d).unwrap();
        let full = crate::confidence::gaussian_replicates(&z, &BinaryMask::filled(d, true), 300, 9).unwrap();
        let corners = crate::confidence::gaussian_replicates(&z, &corner_window(&d), 300, 9).unwrap();
        for (a, b) in full.iter().zip(&corners) {
            assert!((a.max - b.max).abs() < 1e-12 && (a.min - b.min).abs() < 1e-12);
        }
        assert!(spec.terms.corner_extremal());
        assert!(!FeatureMap::new(vec![FeatureTerm::Coord(0), FeatureTerm::LogCoord(0)]).corner_extremal());
    }

    #[test]
    fn trees_quantile_and_regions() {
        let (spec, table) = trees();
        let m = spec.fit(&table).unwrap();
        let d = trees_domain();
        let w = BinaryMask::filled(d, true);
        let r = gaussian_field_quantiles(&m, &spec.terms, &w, 0.05, 20_000, 3).unwrap();
        assert!((r.q1 - 0.2303).abs() < 0.02, "{}", r.q1);

        let p = -30f64.ln();
        let est = covariate_region(&m, &spec.terms, -1.0, p, 0.0, &w).unwrap();
        let f = predict_field(&m, &spec.terms, &d, -1.0).unwrap();
        assert_eq!(est, sublevel_set(&f, p));
        let region = covariate_region(&m, &spec.terms, -1.0, p, r.q1, &w).unwrap();
        assert!(est.is_subset_of(&region).unwrap());
        assert!(region.count() > est.count());
        // the difference is a thin band
        assert!(crate::distance::hausdorff(&est, &region).unwrap() < 2.0);
        let all = covariate_region(&m, &spec.terms, -1.0, f.max() + 1.0, 0.0, &w).unwrap();
        assert!(all.is_full());
        // monotone in p and q1
        let lower = covariate_region(&m, &spec.terms, -1.0, p - 0.1, r.q1, &w).unwrap();
        assert!(lower.is_subset_of(&region).unwrap());
        let band = covariate_band(&m, &spec.terms, -1.0, (p, p), BandQuantiles::Symmetric(r.q2), &w).unwrap();
        let wide = covariate_region(&m, &spec.terms, -1.0, p, r.q2, &w).unwrap();
        assert!(band.is_subset_of(&wide).unwrap());
    }

    #[test]
    fn spec_json_round_trip() {
        let (spec, _) = trees();
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("{\"log_coord\":0}"));
        assert_eq!(serde_json::from_str::<RegressionSpec>(&json).unwrap(), spec);
        assert!(serde_json::from_str::<RegressionSpec>(r#"{"covariates":[],"response":"y","terms":["constant"],"bogus":1}"#).is_err());
    }

    #[test]
    fn table_errors() {
        let p = Path::new("t.csv");
        assert!(parse_table("", p).is_err());
        assert!(parse_table("a,b\n1,2,3\n", p).is_err());
        assert!(parse_table("a,b\n1,x\n", p).is_err());
        let t = parse_table("a,b\n1,2\n3,4\n", p).unwrap();
        assert_eq!(t.column("b"), Some(&[2.0, 4.0][..]));
    }
}
