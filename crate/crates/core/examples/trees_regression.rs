//! Covariate domain of black cherry trees with log-volume at least log 30,
//! and its 95% confidence region.

use std::path::Path;

use odfset::grid::{BinaryMask, GridDomain};
use odfset::regress::{covariate_region, gaussian_field_quantiles, read_table, FeatureMap, RegressionSpec};

fn main() -> odfset::Result<()> {
    let table = read_table(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/trees.csv"))?;
    let spec = RegressionSpec {
        covariates: vec!["girth".into(), "height".into()],
        response: "volume".into(),
        log_response: true,
        terms: FeatureMap::log_linear(2),
        negate: true,
    };
    let fit = spec.fit(&table)?;
    let report = fit.report();
    println!("beta_hat = {:.3?}", report.beta_hat);
    for row in &report.sigma_hat {
        println!("Sigma_hat row {:8.4?}", row);
    }

    let d = GridDomain::covering(5.0, 25.0, 50.0, 100.0, 0.25)?;
    let w = BinaryMask::filled(d, true);
    let q = gaussian_field_quantiles(&fit, &spec.terms, &w, 0.05, 50_000, 1)?;
    println!("q1 = {:.4} +- {:.4}", q.q1, q.mc_stderr.q1);

    let level = -(30f64.ln());
    let estimate = covariate_region(&fit, &spec.terms, spec.sign(), level, 0.0, &w)?;
    let region = covariate_region(&fit, &spec.terms, spec.sign(), level, q.q1, &w)?;
    println!("estimate: {} of {} cells; confidence region: {} cells", estimate.count(), d.len(), region.count());
    Ok(())
}
