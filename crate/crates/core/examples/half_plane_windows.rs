//! Half planes through the origin at a uniform angle: the limit field is
//! linear, so its window sup scales with the window and the quantile on
//! [-2, 2]^2 is twice that on [-1, 1]^2.

use nalgebra::DMatrix;
use odfset::confidence::{mc_sup_quantile, GaussianCombination};
use odfset::grid::{BinaryMask, GridDomain, ScalarField};
use odfset::models::{ModelKind, RandomSetModel};

fn main() -> odfset::Result<()> {
    let d = GridDomain::covering(-2.0, 2.0, -2.0, 2.0, 0.05)?;
    let w1 = BinaryMask::from_fn(d, |x, y| x.abs() <= 1.0 + 1e-9 && y.abs() <= 1.0 + 1e-9);
    let w2 = BinaryMask::filled(d, true);

    let basis = vec![ScalarField::from_fn(d, |x, _| x), ScalarField::from_fn(d, |_, y| -y)];
    let isotropic = GaussianCombination::new(basis, &(DMatrix::identity(2, 2) * 0.5))?;
    let exact = RandomSetModel::default_for(ModelKind::HalfPlaneAngle).limiting_field(&d)?;
    for (name, z) in [("coefficient covariance I/2", &isotropic), ("covariance of (sin, cos) on [0, pi]", &exact)] {
        let q1 = mc_sup_quantile(z, &w1, 0.05, 20_000, 1)?.q1;
        let q2 = mc_sup_quantile(z, &w2, 0.05, 20_000, 1)?.q1;
        println!("{name}: W1 {q1:.4}, W2 {q2:.4}, ratio {:.4}", q2 / q1);
    }
    Ok(())
}
