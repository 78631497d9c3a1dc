//! The set [0, 1] or its boundary {0, 1} with equal probability: the
//! expected set, its exact quantiles 0.5 * 1.645 and 0.5 * 1.96, and the
//! boundary region (-0.031, 1.031) at n = 1000.

use odfset::confidence::{bootstrap_quantiles, ci_mean_boundary, mc_sup_quantile, BandQuantiles};
use odfset::grid::{BinaryMask, GridDomain};
use odfset::meanset::{empirical_mean_set, expected_set};
use odfset::models::{sample_stack, ModelKind, RandomSetModel};

fn main() -> odfset::Result<()> {
    let d = GridDomain::line(-0.5, 1.0 / 64.0, 129)?;
    let full = BinaryMask::filled(d, true);
    let model = RandomSetModel::default_for(ModelKind::SetOrBoundary);
    let x = |k: usize| d.centre(k, 0).0;

    let set = expected_set(&model, &d)?.indices();
    println!("expected set spans [{}, {}] ({} cells)", x(set[0]), x(*set.last().unwrap()), set.len());

    let lim = mc_sup_quantile(&model.limiting_field(&d)?, &full, 0.05, 20_000, 1)?;
    println!("limit quantiles: q1 = {:.4} (0.8225), q2 = {:.4} (0.98)", lim.q1, lim.q2);

    let stack = sample_stack(&model, &d, 1000, 3)?;
    println!("empirical mean set: {} cells", empirical_mean_set(&stack).count());
    let region = ci_mean_boundary(&stack, BandQuantiles::Symmetric(0.98), &full)?.indices();
    println!("boundary region from {} to {} ({} cells)", x(region[0]), x(*region.last().unwrap()), region.len());

    let boot = bootstrap_quantiles(&stack, &full, 0.05, 2000, 4)?;
    println!("bootstrap quantiles: q1 = {:.4}, q2 = {:.4}", boot.q1, boot.q2);
    Ok(())
}
