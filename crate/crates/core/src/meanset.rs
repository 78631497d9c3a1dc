//! Mean oriented distance functions and the sets they define.
//!
//! For ODFs `b_1, …, b_n` of observed sets, the mean ODF is
//! `b̄_n = (1/n) Σ b_i`; the empirical mean set is `{b̄_n <= 0}` and the
//! empirical mean boundary is `{b̄_n = 0}`. Their population counterparts
//! come from `E[b_A]`, available here for every built-in model.
//!
//! A stack on disk is a directory holding `manifest.json` plus one field CSV
//! per sample:
//!
//! ```json
//! {"domain": {"x0": -2.0, "y0": -2.0, "h": 0.05, "nx": 81, "ny": 81},
//!  "files": ["sample_0000.csv", "sample_0001.csv"]}
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{read_field_csv, write_field_csv, BinaryMask, GridDomain, ScalarField};
use crate::levelset::{level_boundary, sublevel_set};
use crate::models::RandomSetModel;

/// Slack allowed above the 1-Lipschitz bound when validating stacks, to
/// absorb rounding in externally produced fields.
pub const LIPSCHITZ_SLACK: f64 = 1e-9;

/// ODFs of `n >= 1` observed sets on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleStack {
    domain: GridDomain,
    fields: Vec<ScalarField>,
}

impl SampleStack {
    /// Validates a common domain and the 1-Lipschitz bound of every field.
    pub fn new(fields: Vec<ScalarField>) -> Result<Self> {
        Self::with_slack(fields, LIPSCHITZ_SLACK)
    }

    pub fn with_slack(fields: Vec<ScalarField>, slack: f64) -> Result<Self> {
        let first = fields.first().ok_or(Error::EmptyStack)?;
        let domain = *first.domain();
        for (index, f) in fields.iter().enumerate() {
            domain.ensure_same(f.domain())?;
            let excess = f.lipschitz_excess();
            if excess > slack {
                return Err(Error::NotLipschitz { index, excess });
            }
        }
        Ok(SampleStack { domain, fields })
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn fields(&self) -> &[ScalarField] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn into_fields(self) -> Vec<ScalarField> {
        self.fields
    }
}

/// Cellwise mean, summed in sample order.
pub fn mean_odf(stack: &SampleStack) -> ScalarField {
    let mut sum = vec![0.0; stack.domain.len()];
    for f in &stack.fields {
        for (s, v) in sum.iter_mut().zip(f.values()) {
            *s += v;
        }
    }
    let n = stack.len() as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    ScalarField::new(stack.domain, sum).expect("mean of finite fields is finite")
}

/// `{x : b̄_n(x) <= 0}`.
pub fn empirical_mean_set(stack: &SampleStack) -> BinaryMask {
    sublevel_set(&mean_odf(stack), 0.0)
}

/// `{x : b̄_n(x) = 0}` with sign-change capture and tolerance `tol`.
pub fn empirical_mean_boundary(stack: &SampleStack, tol: f64) -> Result<BinaryMask> {
    level_boundary(&mean_odf(stack), 0.0, tol)
}

/// `E[b_A]` at every cell centre. Closed forms are used where they exist;
/// the pacman and the disc with a uniformly distributed centre fall back
/// to adaptive Gauss–Legendre quadrature over the random parameter.
pub fn expected_odf(model: &RandomSetModel, domain: &GridDomain) -> Result<ScalarField> {
    model.check_domain(domain)?;
    let values = domain.centres().map(|(x, y)| model.expected_value(x, y)).collect();
    ScalarField::new(*domain, values)
}

/// `{x : E[b_A](x) <= 0}`.
pub fn expected_set(model: &RandomSetModel, domain: &GridDomain) -> Result<BinaryMask> {
    Ok(sublevel_set(&expected_odf(model, domain)?, 0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackManifest {
    pub domain: GridDomain,
    pub files: Vec<String>,
}

pub const MANIFEST: &str = "manifest.json";

/// Write `stack` into `dir` (created if missing).
pub fn write_stack_dir(dir: &Path, stack: &SampleStack) -> Result<()> {
    fs::create_dir_all(dir)?;
    let width = stack.len().to_string().len().max(4);
    let files: Vec<String> = (0..stack.len()).map(|i| format!("sample_{i:0width$}.csv")).collect();
    for (name, f) in files.iter().zip(stack.fields()) {
        write_field_csv(&dir.join(name), f)?;
    }
    let manifest = StackManifest { domain: stack.domain, files };
    fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

/// Read a stack directory, refusing fields whose header disagrees with the
/// manifest domain.
pub fn read_stack_dir(dir: &Path) -> Result<SampleStack> {
    let manifest_path = dir.join(MANIFEST);
    let text = fs::read_to_string(&manifest_path)?;
    let manifest: StackManifest =
        serde_json::from_str(&text).map_err(|e| Error::parse(&manifest_path, e.to_string()))?;
    manifest.domain.validate()?;
    if manifest.files.is_empty() {
        return Err(Error::EmptyStack);
    }
    let mut fields = Vec::with_capacity(manifest.files.len());
    for name in &manifest.files {
        let path: PathBuf = dir.join(name);
        let f = read_field_csv(&path)?;
        manifest
            .domain
            .ensure_same(f.domain())
            .map_err(|_| Error::DomainMismatch(format!("{} does not match {}", path.display(), manifest.domain)))?;
        fields.push(f);
    }
    SampleStack::new(fields)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{hausdorff, oriented_distance};
    use crate::levelset::{check_consistency, level_boundary_with, BoundaryMode};
    use crate::models::{sample_stack, ModelKind};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plane(h: f64) -> GridDomain {
        GridDomain::covering(-2.0, 2.0, -2.0, 2.0, h).unwrap()
    }

    fn disc(d: GridDomain, r: f64) -> BinaryMask {
        BinaryMask::from_fn(d, |x, y| x.hypot(y) <= r)
    }

    #[test]
    fn stack_validation() {
        let d = plane(0.5);
        let e = plane(0.25);
        assert!(matches!(SampleStack::new(vec![]), Err(Error::EmptyStack)));
        let a = ScalarField::constant(d, 1.0);
        assert!(matches!(
            SampleStack::new(vec![a.clone(), ScalarField::constant(e, 1.0)]),
            Err(Error::DomainMismatch(_))
        ));
        let steep = ScalarField::from_fn(d, |x, _| 3.0 * x);
        assert!(matches!(SampleStack::new(vec![a, steep]), Err(Error::NotLipschitz { index: 1, .. })));
    }

    #[test]
    fn mean_of_one_is_identity() {
        let d = plane(0.25);
        let f = oriented_distance(&disc(d, 1.0)).unwrap();
        assert_eq!(mean_odf(&SampleStack::new(vec![f.clone()]).unwrap()), f);
    }

    #[test]
    fn set_and_complement_nearly_cancel() {
        // the boundary layer belongs to whichever set is passed in, so
        // b_A + b_{A^c} is not exactly zero but stays within one diagonal
        let d = plane(0.125);
        let a = disc(d, 1.0);
        let s = SampleStack::new(vec![oriented_distance(&a).unwrap(), oriented_distance(&a.complement()).unwrap()])
            .unwrap();
        let m = mean_odf(&s);
        assert!(m.values().iter().all(|v| v.abs() <= 0.5 * d.diagonal() + 1e-12));
    }

    #[test]
    fn mean_matches_direct_summation() {
        let d = GridDomain::new(0.0, 0.0, 0.5, 9, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fields: Vec<ScalarField> = (0..6)
            .map(|_| {
                let c: (f64, f64) = (rng.random_range(0.0..4.0), rng.random_range(0.0..3.0));
                ScalarField::from_fn(d, |x, y| (x - c.0).hypot(y - c.1) - 0.5)
            })
            .collect();
        let s = SampleStack::new(fields.clone()).unwrap();
        let m = mean_odf(&s);
        for k in 0..d.len() {
            let direct = fields.iter().map(|f| f.values()[k]).sum::<f64>() / 6.0;
            assert!((m.values()[k] - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn identical_discs_and_radius_average() {
        let d = plane(0.05);
        let f = oriented_distance(&disc(d, 0.8)).unwrap();
        let s = SampleStack::new(vec![f.clone(), f.clone(), f]).unwrap();
        assert_eq!(empirical_mean_set(&s), disc(d, 0.8));

        let s = SampleStack::new(vec![
            oriented_distance(&disc(d, 0.4)).unwrap(),
            oriented_distance(&disc(d, 0.6)).unwrap(),
        ])
        .unwrap();
        let got = empirical_mean_set(&s);
        assert!(hausdorff(&got, &disc(d, 0.5)).unwrap() <= d.diagonal());
    }

    #[test]
    fn set_or_boundary_minority_interval() {
        // 4 intervals and 6 point pairs: p̂ = 0.4 < 0.5 gives the two points
        let d = GridDomain::line(-0.5, 1.0 / 32.0, 65).unwrap();
        let m = RandomSetModel::default_for(ModelKind::SetOrBoundary);
        let prep = m.prepare(&d).unwrap();
        let mut fields = vec![prep.field(&crate::models::Draw::Flag(true)); 4];
        fields.extend(vec![prep.field(&crate::models::Draw::Flag(false)); 6]);
        let s = SampleStack::new(fields).unwrap();
        let set = empirical_mean_set(&s);
        let pts: Vec<f64> = set.indices().into_iter().map(|k| d.centres().nth(k).unwrap().0).collect();
        assert_eq!(pts, vec![0.0, 1.0]);
    }

    #[test]
    fn expected_odf_closed_forms() {
        let d = plane(0.1);
        let m = RandomSetModel::new(ModelKind::DiscRandomRadius, &[("lo", 0.2), ("hi", 1.0)]).unwrap();
        let e = expected_odf(&m, &d).unwrap();
        let want = ScalarField::from_fn(d, |x, y| x.hypot(y) - 0.6);
        assert!(e.sup_distance(&want).unwrap() < 1e-12);

        let line = GridDomain::line(-2.0, 0.125, 33).unwrap();
        let e = expected_odf(&RandomSetModel::default_for(ModelKind::IntervalRandomCentre), &line).unwrap();
        for (k, (x, _)) in line.centres().enumerate() {
            let want = if x <= -1.0 {
                -x - 1.0
            } else if x >= 1.0 {
                x - 1.0
            } else {
                0.5 * x * x - 0.5
            };
            assert!((e.values()[k] - want).abs() < 1e-12);
        }

        let e = expected_odf(&RandomSetModel::default_for(ModelKind::HalfPlaneAngle), &d).unwrap();
        let want = ScalarField::from_fn(d, |x, _| 2.0 * x / std::f64::consts::PI);
        assert!(e.sup_distance(&want).unwrap() < 1e-12);

        let m = RandomSetModel::new(ModelKind::MissingTimbit, &[("p", 1.0 / 3.0)]).unwrap();
        let e = expected_odf(&m, &d).unwrap();
        let want = ScalarField::from_fn(d, |x, y| {
            let r = x.hypot(y);
            if r >= 0.75 {
                r - 1.0
            } else {
                -r / 3.0
            }
        });
        assert!(e.sup_distance(&want).unwrap() < 1e-12);
    }

    #[test]
    fn timbit_donut_then_disc() {
        let d = plane(0.05);
        let donut = BinaryMask::from_fn(d, |x, y| {
            let r = x.hypot(y);
            (0.5..=1.0).contains(&r)
        });
        let m = RandomSetModel::new(ModelKind::MissingTimbit, &[("p", 0.25)]).unwrap();
        let set = expected_set(&m, &d).unwrap();
        assert!(!set.get(40, 40));
        // the inner radius of the expected donut is 0.25, not 0.5
        assert!(hausdorff(&set, &donut).unwrap() <= 0.25 + d.diagonal());
        let m = RandomSetModel::new(ModelKind::MissingTimbit, &[("p", 0.5)]).unwrap();
        assert_eq!(expected_set(&m, &d).unwrap(), disc(d, 1.0));
    }

    #[test]
    fn flashing_discs_collapse_at_critical_spacing() {
        let d = GridDomain::new(-2.0, -2.0, 0.0625, 97, 65).unwrap();
        for (a, nonempty) in [(1.8, true), (2.0, true), (2.2, false)] {
            let m = RandomSetModel::new(ModelKind::FlashingDiscs, &[("a", a)]).unwrap();
            let set = expected_set(&m, &d).unwrap();
            assert_eq!(!set.is_empty(), nonempty, "a = {a}");
        }
        let m = RandomSetModel::default_for(ModelKind::FlashingDiscs);
        let set = expected_set(&m, &d).unwrap();
        let segment = BinaryMask::from_fn(d, |x, y| y == 0.0 && (0.0..=2.0).contains(&x));
        assert_eq!(set, segment);
    }

    #[test]
    fn reverse_discs_fill_the_window() {
        let d = GridDomain::new(-4.0, -4.0, 0.125, 65, 65).unwrap();
        let m = RandomSetModel::default_for(ModelKind::FlashingDiscsReverse);
        let e = expected_odf(&m, &d).unwrap();
        assert!(sublevel_set(&e, 0.0).is_full());
        let bd = level_boundary_with(&e, 0.0, 1e-12, BoundaryMode::Tolerance).unwrap();
        let segment = BinaryMask::from_fn(d, |x, y| y == 0.0 && (0.0..=2.0).contains(&x));
        assert!(segment.is_subset_of(&bd).unwrap());
        let r = check_consistency(&e, 0.0, 1e-12).unwrap();
        assert!(!r.satisfied_b);
    }

    #[test]
    fn blinking_square_is_consistent() {
        let d = GridDomain::new(-0.5, -1.0, 1.0 / 32.0, 129, 97).unwrap();
        let e = expected_odf(&RandomSetModel::default_for(ModelKind::BlinkingSquare), &d).unwrap();
        let r = check_consistency(&e, 0.0, 0.0).unwrap();
        assert!(r.satisfied_a && r.satisfied_b, "{r:?}");
    }

    #[test]
    fn complement_duality() {
        // flashing discs and their reverse are complements of each other:
        // E[A^c] = closure((E[A])^c) up to the tolerance band
        let d = GridDomain::new(-3.0, -2.0, 0.125, 49, 33).unwrap();
        let m = RandomSetModel::new(ModelKind::FlashingDiscs, &[("a", 1.5)]).unwrap();
        let mc = RandomSetModel::new(ModelKind::FlashingDiscsReverse, &[("a", 1.5)]).unwrap();
        let e = expected_odf(&m, &d).unwrap();
        let ec = expected_odf(&mc, &d).unwrap();
        let set_c = sublevel_set(&ec, 0.0);
        let above = BinaryMask::new(d, e.values().iter().map(|&v| v >= 0.0).collect()).unwrap();
        assert_eq!(set_c, above);
    }

    #[test]
    fn consistency_of_mean_set_in_n() {
        let d = GridDomain::new(-1.0, -1.0, 1.0 / 32.0, 65, 65).unwrap();
        let m = RandomSetModel::default_for(ModelKind::DiscRandomRadius);
        let truth = expected_set(&m, &d).unwrap();
        let median = |n: usize| {
            let mut v: Vec<f64> = (0..50)
                .map(|t| hausdorff(&empirical_mean_set(&sample_stack(&m, &d, n, t).unwrap()), &truth).unwrap())
                .collect();
            v.sort_by(f64::total_cmp);
            0.5 * (v[24] + v[25])
        };
        let (a, b, c) = (median(10), median(100), median(1000));
        assert!(a >= b && b >= c, "{a} {b} {c}");
    }

    #[test]
    fn stack_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let d = plane(0.25);
        let m = RandomSetModel::default_for(ModelKind::PacmanRandomRadius);
        let s = sample_stack(&m, &d, 5, 1).unwrap();
        write_stack_dir(dir.path(), &s).unwrap();
        assert_eq!(read_stack_dir(dir.path()).unwrap(), s);

        // a field on another grid is refused
        let other = ScalarField::constant(plane(0.5), 0.0);
        write_field_csv(&dir.path().join("sample_0002.csv"), &other).unwrap();
        assert!(matches!(read_stack_dir(dir.path()), Err(Error::DomainMismatch(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn mean_odf_stays_lipschitz(seed in 0u64..10_000, n in 1usize..8) {
            let d = GridDomain::new(-2.0, -2.0, 0.25, 17, 17).unwrap();
            let m = RandomSetModel::default_for(ModelKind::DiscRandomCentreSquare);
            let s = sample_stack(&m, &d, n, seed).unwrap();
            prop_assert!(mean_odf(&s).lipschitz_excess() <= 1e-12);
        }
    }
}
