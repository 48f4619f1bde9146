//! Reference centre of pressure from the four vertical wheel forces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Below this total zeroed load (N) the pressure centre is undefined.
pub const FORCE_EPSILON: f64 = 10.0;

/// Standard gravity used to turn plate load into body mass.
pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceSample {
    pub time: f64,
    /// Vertical force per plate, in contact order.
    pub forces: [f64; 4],
}

/// Force samples with strictly increasing times.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ForceRecord {
    samples: Vec<ForceSample>,
}

impl ForceRecord {
    pub fn new(samples: Vec<ForceSample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if !s.time.is_finite() || s.forces.iter().any(|f| !f.is_finite()) {
                return Err(Error::NonFiniteInput(format!("force sample {i}")));
            }
            if i > 0 && s.time <= samples[i - 1].time {
                return Err(Error::MalformedDocument(format!(
                    "force sample times must increase (sample {i} at {} s)",
                    s.time
                )));
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[ForceSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn window(&self, window: (f64, f64)) -> impl Iterator<Item = &ForceSample> {
        self.samples
            .iter()
            .filter(move |s| s.time >= window.0 && s.time <= window.1)
    }
}

/// Per-plate load of the empty wheelchair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ZeroOffset(pub [f64; 4]);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopSample {
    pub time: f64,
    pub ap: f64,
    pub ml: f64,
    pub total_force: f64,
    /// Some zeroed force was negative (sensor noise); the point may then
    /// fall outside the contact polygon.
    pub negative_force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopAverage {
    pub cop: CopSample,
    pub used: usize,
    /// Samples skipped for negligible load.
    pub excluded: usize,
}

pub fn compute_zero_offset(empty: &ForceRecord) -> Result<ZeroOffset> {
    if empty.is_empty() {
        return Err(Error::EmptyRecord);
    }
    let mut sum = [0.0; 4];
    for s in empty.samples() {
        for (acc, f) in sum.iter_mut().zip(s.forces) {
            *acc += f;
        }
    }
    let n = empty.len() as f64;
    Ok(ZeroOffset(sum.map(|v| v / n)))
}

/// Force-weighted mean of the contact (x, z) coordinates, with contacts
/// given in the wheelchair frame.
pub fn cop_instant(sample: &ForceSample, offsets: &ZeroOffset, contacts: &[Point3; 4]) -> Result<CopSample> {
    let zeroed: [f64; 4] = std::array::from_fn(|i| sample.forces[i] - offsets.0[i]);
    let total: f64 = zeroed.iter().sum();
    if !(total > FORCE_EPSILON) {
        return Err(Error::NegligibleLoad {
            total,
            epsilon: FORCE_EPSILON,
        });
    }
    let mut ap = 0.0;
    let mut ml = 0.0;
    for (f, c) in zeroed.iter().zip(contacts) {
        ap += f * c.x;
        ml += f * c.z;
    }
    Ok(CopSample {
        time: sample.time,
        ap: ap / total,
        ml: ml / total,
        total_force: total,
        negative_force: zeroed.iter().any(|f| *f < 0.0),
    })
}

/// Mean of the per-sample pressure centres inside the window.
pub fn cop_average(
    record: &ForceRecord,
    offsets: &ZeroOffset,
    contacts: &[Point3; 4],
    window: (f64, f64),
) -> Result<CopAverage> {
    let (mut ap, mut ml, mut force) = (0.0, 0.0, 0.0);
    let (mut used, mut excluded) = (0usize, 0usize);
    let mut negative_force = false;
    for s in record.window(window) {
        match cop_instant(s, offsets, contacts) {
            Ok(c) => {
                ap += c.ap;
                ml += c.ml;
                force += c.total_force;
                negative_force |= c.negative_force;
                used += 1;
            }
            Err(Error::NegligibleLoad { .. }) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    if used + excluded == 0 {
        return Err(Error::EmptyWindow {
            t0: window.0,
            t1: window.1,
        });
    }
    if used == 0 {
        return Err(Error::AllSamplesNegligible { count: excluded });
    }
    let n = used as f64;
    Ok(CopAverage {
        cop: CopSample {
            time: 0.5 * (window.0 + window.1),
            ap: ap / n,
            ml: ml / n,
            total_force: force / n,
            negative_force,
        },
        used,
        excluded,
    })
}

/// Subject mass from the mean zeroed plate load inside the window.
pub fn mass_from_plates(record: &ForceRecord, offsets: &ZeroOffset, window: (f64, f64)) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for s in record.window(window) {
        sum += s.forces.iter().zip(offsets.0).map(|(f, o)| f - o).sum::<f64>();
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyWindow {
            t0: window.0,
            t1: window.1,
        });
    }
    let load = sum / n as f64;
    if !(load > FORCE_EPSILON) {
        return Err(Error::NegligibleLoad {
            total: load,
            epsilon: FORCE_EPSILON,
        });
    }
    Ok(load / GRAVITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn rectangle() -> [Point3; 4] {
        [
            Point3::new(-0.05, 0.0, -0.28),
            Point3::new(-0.05, 0.0, 0.28),
            Point3::new(0.45, 0.0, -0.28),
            Point3::new(0.45, 0.0, 0.28),
        ]
    }

    fn sample(forces: [f64; 4]) -> ForceSample {
        ForceSample { time: 0.0, forces }
    }

    #[test]
    fn zero_offsets() {
        let r = ForceRecord::new(
            (0..10)
                .map(|i| ForceSample {
                    time: i as f64 * 1e-3,
                    forces: [50.0, 60.0, 20.0, 25.0],
                })
                .collect(),
        )
        .unwrap();
        assert_eq!(compute_zero_offset(&r).unwrap(), ZeroOffset([50.0, 60.0, 20.0, 25.0]));
        let zero = ForceRecord::new(vec![sample([0.0; 4])]).unwrap();
        assert_eq!(compute_zero_offset(&zero).unwrap(), ZeroOffset([0.0; 4]));
        assert!(matches!(
            compute_zero_offset(&ForceRecord::default()),
            Err(Error::EmptyRecord)
        ));
    }

    #[test]
    fn zero_offsets_converge() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let sigma = 2.0;
        let noise = Normal::new(0.0, sigma).unwrap();
        let base = [50.0, 60.0, 20.0, 25.0];
        let n = 10_000;
        let r = ForceRecord::new(
            (0..n)
                .map(|i| ForceSample {
                    time: i as f64 * 1e-3,
                    forces: base.map(|b| b + noise.sample(&mut rng)),
                })
                .collect(),
        )
        .unwrap();
        let z = compute_zero_offset(&r).unwrap();
        for (o, b) in z.0.iter().zip(base) {
            assert!((o - b).abs() < 3.0 * sigma / (n as f64).sqrt());
        }
    }

    #[test]
    fn record_requires_increasing_time() {
        let s = vec![sample([1.0; 4]), sample([1.0; 4])];
        assert!(ForceRecord::new(s).is_err());
    }

    #[test]
    fn cop_examples() {
        let z = ZeroOffset::default();
        let c = cop_instant(&sample([100.0; 4]), &z, &rectangle()).unwrap();
        assert_relative_eq!(c.ap, 0.20, epsilon = 1e-15);
        assert_relative_eq!(c.ml, 0.0, epsilon = 1e-15);

        let c = cop_instant(&sample([500.0, 0.0, 0.0, 0.0]), &z, &rectangle()).unwrap();
        assert_eq!((c.ap, c.ml), (-0.05, -0.28));

        let c = cop_instant(&sample([100.0, 100.0, 300.0, 300.0]), &z, &rectangle()).unwrap();
        assert_relative_eq!(c.ap, 0.325, epsilon = 1e-15);
        assert_eq!(c.total_force, 800.0);

        let err = cop_instant(&sample([2.0; 4]), &z, &rectangle()).unwrap_err();
        assert!(matches!(err, Error::NegligibleLoad { .. }));
    }

    #[test]
    fn zeroing_removes_wheelchair() {
        let empty = [30.0, 35.0, 20.0, 22.0];
        let subject = [210.0, 190.0, 160.0, 170.0];
        let loaded = std::array::from_fn(|i| empty[i] + subject[i]);
        let a = cop_instant(&sample(loaded), &ZeroOffset(empty), &rectangle()).unwrap();
        let b = cop_instant(&sample(subject), &ZeroOffset::default(), &rectangle()).unwrap();
        assert!((a.ap - b.ap).abs() < 1e-12 && (a.ml - b.ml).abs() < 1e-12);
    }

    #[test]
    fn averaging() {
        let z = ZeroOffset::default();
        let rec = ForceRecord::new(vec![
            ForceSample {
                time: 0.0,
                forces: [300.0, 300.0, 200.0, 200.0],
            },
            ForceSample {
                time: 0.001,
                forces: [0.0; 4],
            },
            ForceSample {
                time: 0.002,
                forces: [200.0, 200.0, 300.0, 300.0],
            },
        ])
        .unwrap();
        let avg = cop_average(&rec, &z, &rectangle(), (0.0, 1.0)).unwrap();
        assert_eq!((avg.used, avg.excluded), (2, 1));
        assert_relative_eq!(avg.cop.ap, 0.2, epsilon = 1e-15);

        assert!(matches!(
            cop_average(&rec, &z, &rectangle(), (5.0, 6.0)),
            Err(Error::EmptyWindow { .. })
        ));
        assert!(matches!(
            cop_average(&rec, &z, &rectangle(), (0.0005, 0.0015)),
            Err(Error::AllSamplesNegligible { count: 1 })
        ));
    }

    #[test]
    fn sinusoidal_shift_averages_out() {
        let mean = [150.0, 150.0, 250.0, 250.0];
        let rec = ForceRecord::new(
            (0..2000)
                .map(|i| {
                    let t = i as f64 / 1000.0;
                    let d = 40.0 * (2.0 * std::f64::consts::PI * 1.5 * t).sin();
                    ForceSample {
                        time: t,
                        forces: [mean[0] + d, mean[1] + d, mean[2] - d, mean[3] - d],
                    }
                })
                .collect(),
        )
        .unwrap();
        let avg = cop_average(&rec, &ZeroOffset::default(), &rectangle(), (0.0, 2.0)).unwrap();
        let expected = cop_instant(&sample(mean), &ZeroOffset::default(), &rectangle()).unwrap();
        assert!((avg.cop.ap - expected.ap).abs() < 1e-6);
        assert!((avg.cop.ml - expected.ml).abs() < 1e-6);
    }

    #[test]
    fn plate_mass() {
        let rec = ForceRecord::new(vec![sample([9.81 * 20.0; 4])]).unwrap();
        assert_relative_eq!(
            mass_from_plates(&rec, &ZeroOffset::default(), (0.0, 1.0)).unwrap(),
            80.0,
            epsilon = 1e-12
        );
    }

    proptest! {
        #[test]
        fn scale_invariant(f in prop::array::uniform4(0.0f64..1000.0), k in 0.01f64..100.0) {
            prop_assume!(f.iter().sum::<f64>() * k.min(1.0) > 2.0 * FORCE_EPSILON);
            let z = ZeroOffset::default();
            let a = cop_instant(&sample(f), &z, &rectangle()).unwrap();
            let b = cop_instant(&sample(f.map(|v| v * k)), &z, &rectangle()).unwrap();
            prop_assert!((a.ap - b.ap).abs() <= 1e-15 && (a.ml - b.ml).abs() <= 1e-15);
        }

        #[test]
        fn inside_support(f in prop::array::uniform4(0.0f64..1000.0)) {
            prop_assume!(f.iter().sum::<f64>() > FORCE_EPSILON);
            let c = cop_instant(&sample(f), &ZeroOffset::default(), &rectangle()).unwrap();
            prop_assert!((-0.05..=0.45).contains(&c.ap));
            prop_assert!((-0.28..=0.28).contains(&c.ml));
            prop_assert!(!c.negative_force);
        }
    }
}
