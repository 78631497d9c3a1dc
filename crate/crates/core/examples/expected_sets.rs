//! Expected ODFs, expected sets and boundaries of every built-in random set
//! model, with the closure-condition diagnostic at level 0.

use odfset::grid::GridDomain;
use odfset::levelset::{check_consistency, level_boundary};
use odfset::meanset::{expected_odf, expected_set};
use odfset::models::{ModelKind, RandomSetModel};

fn main() -> odfset::Result<()> {
    println!("{:<30} {:>8} {:>9} {:>6} {:>6}", "model", "set", "boundary", "A", "B");
    for kind in ModelKind::ALL {
        let d = if kind.is_1d() {
            GridDomain::line(-2.0, 1.0 / 32.0, 129)?
        } else {
            GridDomain::new(-2.0, -2.0, 1.0 / 16.0, 97, 65)?
        };
        let model = RandomSetModel::default_for(kind);
        let e = expected_odf(&model, &d)?;
        let set = expected_set(&model, &d)?;
        let bd = level_boundary(&e, 0.0, 1e-12)?;
        let r = check_consistency(&e, 0.0, 1e-12)?;
        println!("{:<30} {:>8} {:>9} {:>6} {:>6}", kind.name(), set.count(), bd.count(), r.satisfied_a, r.satisfied_b);
    }
    Ok(())
}
