// Pressure centre under the four wheels: tare with the empty chair,
// per-sample CoP, window average and body mass from the plates.

use wheelcom::forceplate::{compute_zero_offset, cop_average, cop_instant, mass_from_plates, ForceRecord, ForceSample};
use wheelcom::Point3;

fn main() -> wheelcom::Result<()> {
    // rear left, rear right, front left, front right, wheelchair frame
    let contacts = [
        Point3::new(-0.05, 0.0, -0.28),
        Point3::new(-0.05, 0.0, 0.28),
        Point3::new(0.45, 0.0, -0.28),
        Point3::new(0.45, 0.0, 0.28),
    ];
    let chair = [40.0, 40.0, 29.0, 28.0];
    let empty = ForceRecord::new(
        (0..100)
            .map(|i| ForceSample {
                time: i as f64 / 1000.0,
                forces: chair,
            })
            .collect(),
    )?;
    let offsets = compute_zero_offset(&empty)?;

    let loaded = |i: usize| {
        let sway = 5.0 * (i as f64 * 0.01).sin();
        let subject = [100.0 + sway, 100.0 - sway, 300.0 + sway, 300.0 - sway];
        ForceSample {
            time: i as f64 / 1000.0,
            forces: std::array::from_fn(|k| chair[k] + subject[k]),
        }
    };
    let first = cop_instant(&loaded(0), &offsets, &contacts)?;
    println!(
        "first sample: AP {:.4} m, ML {:.4} m, load {:.1} N",
        first.ap, first.ml, first.total_force
    );

    let trial = ForceRecord::new((0..2000).map(loaded).collect())?;
    let avg = cop_average(&trial, &offsets, &contacts, (0.0, 2.0))?;
    println!(
        "2 s average: AP {:.4} m, ML {:.5} m over {} samples ({} excluded)",
        avg.cop.ap, avg.cop.ml, avg.used, avg.excluded
    );
    println!(
        "mass from plates: {:.2} kg",
        mass_from_plates(&trial, &offsets, (0.0, 2.0))?
    );
    Ok(())
}
