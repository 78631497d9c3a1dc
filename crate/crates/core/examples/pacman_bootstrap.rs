//! Bootstrap confidence regions for the expected set and boundary of a
//! random-radius disc with its upper-right quadrant removed.

use odfset::confidence::{bootstrap_quantiles, ci_mean_boundary, ci_mean_set};
use odfset::distance::hausdorff;
use odfset::grid::{BinaryMask, GridDomain};
use odfset::meanset::{empirical_mean_set, expected_set};
use odfset::models::{sample_stack, ModelKind, RandomSetModel};

fn main() -> odfset::Result<()> {
    let d = GridDomain::covering(-1.5, 1.5, -1.5, 1.5, 1.0 / 32.0)?;
    let model = RandomSetModel::default_for(ModelKind::PacmanRandomRadius);
    let truth = expected_set(&model, &d)?;
    let full = BinaryMask::filled(d, true);
    for n in [25, 100, 400] {
        let stack = sample_stack(&model, &d, n, n as u64)?;
        let q = bootstrap_quantiles(&stack, &full, 0.05, 500, 7)?;
        let set_ci = ci_mean_set(&stack, q.q1, &full)?;
        let bd_ci = ci_mean_boundary(&stack, q.symmetric(), &full)?;
        println!(
            "n = {n:>3}: q1 = {:.3}, q2 = {:.3}; Hausdorff(mean set, expected) = {:.4}; set CI {} cells, covers truth: {}; boundary CI {} cells",
            q.q1,
            q.q2,
            hausdorff(&empirical_mean_set(&stack), &truth)?,
            set_ci.count(),
            truth.is_subset_of(&set_ci)?,
            bd_ci.count()
        );
    }
    Ok(())
}
