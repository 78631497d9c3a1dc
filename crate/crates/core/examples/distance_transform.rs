//! Exact distance transform, oriented distance function and Hausdorff
//! distance of simple masks.

use odfset::distance::{distance_transform, hausdorff, oriented_distance};
use odfset::grid::{BinaryMask, GridDomain};

fn main() -> odfset::Result<()> {
    let d = GridDomain::covering(-2.0, 2.0, -2.0, 2.0, 1.0 / 16.0)?;
    let disc = BinaryMask::from_fn(d, |x, y| x.hypot(y) <= 1.0);
    let square = BinaryMask::from_fn(d, |x, y| x.abs() <= 0.75 && y.abs() <= 0.75);

    let dist = distance_transform(&disc)?;
    let odf = oriented_distance(&disc)?;
    let (i, j) = d.nearest_cell(2.0, 0.0).unwrap();
    println!("distance from (2, 0) to the unit disc: {:.4}", dist.get(i, j));
    let (i, j) = d.nearest_cell(0.0, 0.0).unwrap();
    println!("oriented distance at the centre:      {:.4}", odf.get(i, j));
    println!("largest 1-Lipschitz excess:           {:.2e}", odf.lipschitz_excess().max(0.0));

    let h = hausdorff(&disc, &square)?;
    println!("Hausdorff(disc, square):              {h:.4} (continuum value {:.4})", 1.0 - 0.75);
    for delta in [0.1, h] {
        let covered = square.is_subset_of(&disc.dilate(delta)?)? && disc.is_subset_of(&square.dilate(delta)?)?;
        println!("  mutual cover at delta = {delta:.4}: {covered}");
    }
    Ok(())
}
