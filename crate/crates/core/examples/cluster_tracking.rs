// Defines a marker cluster from a static capture, attaches a probed
// landmark to it and follows both through a moving trial with gaps.

use nalgebra::{Rotation3, Vector3};
use wheelcom::cluster::{define_cluster, extend_cluster, track_and_reconstruct, Frame};
use wheelcom::geometry::LabelledPointSet;
use wheelcom::{Point3, RigidTransform};

fn frame(time: f64, pose: &RigidTransform, markers: &[(&str, Point3)]) -> Frame {
    let set = LabelledPointSet::from_points(markers.iter().map(|(l, p)| (*l, pose.transform_point(p))))
        .expect("unique labels");
    Frame { time, markers: set }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // upper-arm plate in its own coordinates, plus the lateral epicondyle
    let plate = [
        ("LUA1", Point3::new(0.02, -0.10, -0.055)),
        ("LUA2", Point3::new(-0.02, -0.12, -0.060)),
        ("LUA3", Point3::new(0.00, -0.18, -0.065)),
        ("LUA4", Point3::new(0.015, -0.16, -0.045)),
    ];
    let epicondyle = Point3::new(0.0, -0.29, -0.035);

    let rest = RigidTransform::from_translation(Vector3::new(0.1, 1.0, -0.2));
    let statics: Vec<Frame> = (0..10).map(|i| frame(i as f64 / 120.0, &rest, &plate)).collect();
    let cluster = define_cluster("left_upper_arm", &["LUA1", "LUA2", "LUA3", "LUA4"], &statics)?;
    let cluster = extend_cluster(&cluster, "LHLE", &rest.transform_point(&epicondyle), &statics[0])?;

    for (i, angle) in [0.0f64, 30.0, 60.0, 90.0].iter().enumerate() {
        let arm = rest
            * RigidTransform::new(
                Rotation3::from_euler_angles(0.0, 0.0, angle.to_radians()),
                Vector3::zeros(),
            );
        let mut f = frame(i as f64, &arm, &plate);
        if i == 2 {
            f.markers = f.markers.filtered(|l| l != "LUA3");
        }
        let tracked = track_and_reconstruct(&cluster, &f)?;
        let truth = arm.transform_point(&epicondyle);
        let got = tracked.points.get("LHLE").expect("extended point");
        println!(
            "flexion {angle:>4.0} deg, {} markers: epicondyle error {:.1e} m",
            f.markers.len(),
            (got - truth).norm()
        );
    }

    // below three markers the frame is a gap
    let mut f = frame(9.0, &rest, &plate);
    f.markers = f.markers.filtered(|l| l == "LUA1" || l == "LUA2");
    println!("two markers: {}", track_and_reconstruct(&cluster, &f).unwrap_err());
    Ok(())
}
