// Recovers a known rigid motion from labelled markers, then shows how the
// residual grows with measurement noise.

use nalgebra::{Rotation3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use wheelcom::geometry::{rigid_fit, rotation_angle_between, LabelledPointSet};
use wheelcom::{Point3, RigidTransform};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let local = LabelledPointSet::from_points([
        ("M1", Point3::new(0.00, 0.00, 0.00)),
        ("M2", Point3::new(0.08, 0.01, 0.00)),
        ("M3", Point3::new(0.02, 0.09, 0.01)),
        ("M4", Point3::new(0.03, 0.04, 0.06)),
    ])?;
    let motion = RigidTransform::new(
        Rotation3::from_euler_angles(0.3, -1.1, 2.0),
        Vector3::new(0.4, 1.2, -0.7),
    );
    let observed = local.map_points(|p| motion.transform_point(p));

    let fit = rigid_fit(&local, &observed)?;
    println!(
        "noise-free: rotation error {:.1e} rad, translation error {:.1e} m",
        rotation_angle_between(fit.transform.rotation(), motion.rotation()),
        (fit.transform.translation() - motion.translation()).norm()
    );

    // an occluded marker only removes a label from the match
    let partial = observed.filtered(|l| l != "M2");
    println!("three markers: rms {:.1e} m", rigid_fit(&local, &partial)?.rms_residual);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for sigma_mm in [0.25, 0.5, 1.0, 2.0] {
        let noise = Normal::new(0.0, sigma_mm / 1000.0)?;
        let noisy = LabelledPointSet::from_points(
            observed
                .iter()
                .map(|(l, p)| (l.to_string(), p + Vector3::from_fn(|_, _| noise.sample(&mut rng)))),
        )?;
        let fit = rigid_fit(&local, &noisy)?;
        println!(
            "sigma {sigma_mm:.2} mm: rms {:.3} mm, rotation error {:.3} deg",
            fit.rms_residual * 1000.0,
            rotation_angle_between(fit.transform.rotation(), motion.rotation()).to_degrees()
        );
    }
    Ok(())
}
