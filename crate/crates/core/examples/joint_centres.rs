// Joint centres from bony landmarks with the scaling regressions of the
// bundled anthropometric table.

use nalgebra::Vector3;
use wheelcom::anthropometry::{
    cervical_joint_centre, hip_joint_centres, lumbar_joint_centre, pelvis_frame, shoulder_joint_centres,
    AnthropometricTable, Sex,
};
use wheelcom::Point3;

fn show(name: &str, p: &Point3) {
    println!("{name:<5} ({:>7.4}, {:>7.4}, {:>7.4}) m", p.x, p.y, p.z);
}

fn main() -> wheelcom::Result<()> {
    let table = AnthropometricTable::dumas_2007();
    let reg = table.regression(Sex::Female);

    let lasis = Point3::new(0.14, 0.60, -0.12);
    let rasis = Point3::new(0.14, 0.60, 0.12);
    let sym = Point3::new(0.16, 0.515, 0.0);
    let pelvis = pelvis_frame(&lasis, &rasis, &sym)?;
    println!("pelvis frame x axis {:?}", pelvis.axis(0).as_slice());

    let ljc = lumbar_joint_centre(&lasis, &rasis, &sym, reg)?;
    let (lhjc, rhjc) = hip_joint_centres(&lasis, &rasis, &sym, reg)?;
    show("LJC", &ljc);
    show("LHJC", &lhjc);
    show("RHJC", &rhjc);

    let c7 = ljc + Vector3::new(-0.05, 0.44, 0.0);
    let ij = c7 + Vector3::new(0.14, -0.06, 0.0);
    show("CJC", &cervical_joint_centre(&c7, &ij, &ljc, reg)?);

    let lac = c7 + Vector3::new(0.02, -0.02, -0.18);
    let rac = c7 + Vector3::new(0.02, -0.02, 0.18);
    let (lsjc, rsjc) = shoulder_joint_centres(&lac, &rac, &-Vector3::y(), reg)?;
    show("LSJC", &lsjc);
    show("RSJC", &rsjc);
    println!("table: {}", table.provenance());
    Ok(())
}
