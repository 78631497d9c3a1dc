//! Sublevel sets, level bands and boundaries of a scalar field, with the
//! grid diagnostic for the two closure conditions.

use odfset::grid::{GridDomain, ScalarField};
use odfset::levelset::{check_consistency, directional_monotonicity, level_band, level_boundary, sublevel_set, LevelSpec};

fn main() -> odfset::Result<()> {
    let d = GridDomain::covering(-2.0, 2.0, -2.0, 2.0, 0.05)?;
    // a tilted bowl with a flat plateau at level 1
    let f = ScalarField::from_fn(d, |x, y| (x * x + 0.5 * y * y).min(1.0));

    let below = sublevel_set(&f, 0.5);
    let band = level_band(&f, &LevelSpec::new(0.25, 0.5, 0.0)?);
    let bd = level_boundary(&f, 0.5, 0.0)?;
    println!("{{f <= 0.5}}: {} cells; band 0.25..0.5: {} cells; boundary: {} cells", below.count(), band.count(), bd.count());

    for p in [0.5, 1.0] {
        let r = check_consistency(&f, p, 1e-12)?;
        println!(
            "level {p}: condition A {} ({} flagged), condition B {} ({} flagged)",
            r.satisfied_a,
            r.cond_a_violations.len(),
            r.satisfied_b,
            r.cond_b_violations.len()
        );
    }
    let ramp = ScalarField::from_fn(d, |x, y| x + 0.3 * y);
    println!("x + 0.3 y increasing along (1, 0): {}", directional_monotonicity(&ramp, (1.0, 0.0))?);
    Ok(())
}
