//! Disc of radius one with a uniformly random centre: the sup of the limit
//! fluctuation is |G| with G ~ N(0, I/3), so q2 = sqrt(5.99 / 3). The
//! plug-in band around |x| = 1 is checked for coverage.

use odfset::confidence::{ci_band, coverage_rate, mc_sup_quantile, BandQuantiles, DiscCentreLimit};
use odfset::grid::{BinaryMask, GridDomain};
use odfset::models::{disc_centre_plug_in, sample_draws, ModelKind, RandomSetModel};

fn main() -> odfset::Result<()> {
    let d = GridDomain::covering(-2.0, 2.0, -2.0, 2.0, 0.04)?;
    let full = BinaryMask::filled(d, true);
    let q = mc_sup_quantile(&DiscCentreLimit::new(d, 1.0), &full, 0.05, 20_000, 1)?;
    println!("Monte-Carlo q2 = {:.4} +- {:.4}; exact {:.4}", q.q2, q.mc_stderr.q2, (5.991f64 / 3.0).sqrt());

    let model = RandomSetModel::default_for(ModelKind::DiscRandomCentreSquare);
    let n = 1000;
    let on_circle: Vec<usize> = (0..d.len())
        .filter(|&k| {
            let (i, j) = d.unindex(k);
            let (x, y) = d.centre(i, j);
            (x.hypot(y) - 1.0).abs() < 1e-9
        })
        .collect();
    let rate = coverage_rate(200, 2, |seed| {
        let centres: Vec<(f64, f64)> = sample_draws(&model, n, seed).iter().filter_map(|d| d.point()).collect();
        let band = ci_band(&disc_centre_plug_in(&d, &centres)?, n, 1.0, 1.0, BandQuantiles::Symmetric(q.q2), &full)?;
        Ok(on_circle.iter().all(|&k| band.cells()[k]))
    })?;
    println!("coverage of the circle over 200 samples of n = {n}: {rate:.3}");
    Ok(())
}
