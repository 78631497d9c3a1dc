//! Binary images on disk as a random-set sample: read 15 PGM masks, average
//! their ODFs, and write the mean set with bootstrap confidence regions.

use std::fs;

use odfset::confidence::{bootstrap_quantiles, ci_mean_boundary, ci_mean_set};
use odfset::distance::oriented_distance;
use odfset::grid::{read_mask_pgm, write_mask_pgm, BinaryMask, GridDomain};
use odfset::meanset::{empirical_mean_set, SampleStack};
use odfset::rng::substream;
use rand::Rng;

fn main() -> odfset::Result<()> {
    let dir = std::env::temp_dir().join("odfset-image-stack");
    fs::create_dir_all(&dir)?;
    // noisy reconstructions of a 30 x 20 rectangle
    let d = GridDomain::new(0.0, 0.0, 1.0, 64, 48)?;
    for k in 0..15u64 {
        let mut rng = substream(11, k);
        let (dx, dy): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let m = BinaryMask::from_fn(d, |x, y| (x - 32.0 - dx).abs() <= 15.0 && (y - 24.0 - dy).abs() <= 10.0);
        write_mask_pgm(&dir.join(format!("scan_{k:02}.pgm")), &m)?;
    }

    let mut paths: Vec<_> = fs::read_dir(&dir)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.retain(|p| p.extension().is_some_and(|e| e == "pgm") && p.file_name().unwrap().to_string_lossy().starts_with("scan_"));
    paths.sort();
    let fields = paths.iter().map(|p| oriented_distance(&read_mask_pgm(p, Some(d))?)).collect::<odfset::Result<Vec<_>>>()?;
    let stack = SampleStack::new(fields)?;

    let full = BinaryMask::filled(d, true);
    let q = bootstrap_quantiles(&stack, &full, 0.05, 1000, 5)?;
    let mean_set = empirical_mean_set(&stack);
    let set_ci = ci_mean_set(&stack, q.q1, &full)?;
    let bd_ci = ci_mean_boundary(&stack, q.symmetric(), &full)?;
    write_mask_pgm(&dir.join("mean_set.pgm"), &mean_set)?;
    write_mask_pgm(&dir.join("ci_set.pgm"), &set_ci)?;
    write_mask_pgm(&dir.join("ci_boundary.pgm"), &bd_ci)?;
    println!(
        "{} images: mean set {} cells, set CI {} cells, boundary CI {} cells (q1 = {:.3}, q2 = {:.3}); written to {}",
        stack.len(),
        mean_set.count(),
        set_ci.count(),
        bd_ci.count(),
        q.q1,
        q.q2,
        dir.display()
    );
    Ok(())
}
