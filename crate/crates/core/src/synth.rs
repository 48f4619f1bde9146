//! Synthetic sessions with known ground truth.
//!
//! A seated skeleton is posed by forward kinematics on a small body tree
//! (wheelchair, trunk, head, upper arms, forearms with hands). Pelvis and
//! legs stay on the wheelchair. The true centre of mass is computed here
//! from the generator's own segment frames, independently of the
//! estimation code, and the plate forces are chosen so that their pressure
//! centre equals its ground projection. Noise is added after the truth is
//! recorded.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix3, Rotation3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::anthropometry::{AnthropometricTable, PointRef, SegmentId, Sex};
use crate::body::ProbedPoint;
use crate::cluster::{Frame, PelvisCloud};
use crate::error::{Error, Result};
use crate::forceplate::{ForceSample, GRAVITY};
use crate::geometry::{Axis, LabelledPointSet, Point3, RigidTransform};
use crate::io::{
    to_plate_order, write_force_csv, write_marker_csv, write_pelvis_cloud, write_probed_points, Manifest, MassSpec,
    ProbingEntry, Recording, SessionFiles, SubjectSpec, TrialEntry, Wheel, FORMAT_VERSION, MANIFEST_FILE,
};
use crate::landmarks::*;
use crate::validation::Posture;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Per-coordinate marker and probe noise, metres.
    pub marker_sigma_m: f64,
    /// Per-plate force noise, newtons.
    pub force_sigma_n: f64,
}

impl NoiseModel {
    pub const NONE: NoiseModel = NoiseModel {
        marker_sigma_m: 0.0,
        force_sigma_n: 0.0,
    };
}

/// Segment lengths of the synthetic subject, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyDimensions {
    pub pelvis_width: f64,
    /// Lumbar joint centre to C7, vertical.
    pub trunk_height: f64,
    pub head_height: f64,
    pub shoulder_half_width: f64,
    pub upper_arm: f64,
    pub forearm: f64,
    pub hand: f64,
    pub thigh: f64,
    pub shank: f64,
}

impl Default for BodyDimensions {
    fn default() -> Self {
        Self {
            pelvis_width: 0.25,
            trunk_height: 0.46,
            head_height: 0.21,
            shoulder_half_width: 0.19,
            upper_arm: 0.29,
            forearm: 0.26,
            hand: 0.08,
            thigh: 0.42,
            shank: 0.42,
        }
    }
}

impl BodyDimensions {
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            pelvis_width: self.pelvis_width * k,
            trunk_height: self.trunk_height * k,
            head_height: self.head_height * k,
            shoulder_half_width: self.shoulder_half_width * k,
            upper_arm: self.upper_arm * k,
            forearm: self.forearm * k,
            hand: self.hand * k,
            thigh: self.thigh * k,
            shank: self.shank * k,
        }
    }
}

/// Joint angles in degrees. Trunk flexion leans forward about the lumbar
/// centre, positive lateral bend goes to the right, shoulder flexion
/// raises the arm forward and abduction raises it sideways.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PostureAngles {
    pub trunk_flexion: f64,
    pub trunk_lateral: f64,
    pub neck_flexion: f64,
    pub left_shoulder_flexion: f64,
    pub left_shoulder_abduction: f64,
    pub right_shoulder_flexion: f64,
    pub right_shoulder_abduction: f64,
    pub left_elbow_flexion: f64,
    pub right_elbow_flexion: f64,
}

impl PostureAngles {
    /// Default angles for each posture label.
    pub fn for_posture(posture: Posture) -> Self {
        let z = Self::default();
        match posture {
            Posture::FullExtension => Self {
                trunk_flexion: -15.0,
                left_shoulder_flexion: 170.0,
                right_shoulder_flexion: 170.0,
                ..z
            },
            Posture::ArmsBackward => Self {
                left_shoulder_flexion: -45.0,
                right_shoulder_flexion: -45.0,
                ..z
            },
            Posture::Neutral => z,
            Posture::ArmsForward => Self {
                left_shoulder_flexion: 90.0,
                right_shoulder_flexion: 90.0,
                left_elbow_flexion: 10.0,
                right_elbow_flexion: 10.0,
                ..z
            },
            Posture::FrontReach => Self {
                trunk_flexion: 35.0,
                neck_flexion: 10.0,
                left_shoulder_flexion: 90.0,
                right_shoulder_flexion: 90.0,
                ..z
            },
            Posture::LeftReach => Self {
                trunk_lateral: -20.0,
                left_shoulder_abduction: 90.0,
                ..z
            },
            Posture::LeftArmRaised => Self {
                left_shoulder_abduction: 170.0,
                ..z
            },
            Posture::RightArmRaised => Self {
                right_shoulder_abduction: 170.0,
                ..z
            },
            Posture::RightReach => Self {
                trunk_lateral: 20.0,
                right_shoulder_abduction: 90.0,
                ..z
            },
        }
    }

    fn jittered(&self, rng: &mut ChaCha8Rng, amplitude: f64) -> Self {
        if amplitude == 0.0 {
            return *self;
        }
        let u = Uniform::new_inclusive(-amplitude, amplitude).expect("finite amplitude");
        let mut j = |v: f64| v + u.sample(rng);
        Self {
            trunk_flexion: j(self.trunk_flexion),
            trunk_lateral: j(self.trunk_lateral),
            neck_flexion: j(self.neck_flexion),
            left_shoulder_flexion: j(self.left_shoulder_flexion),
            left_shoulder_abduction: j(self.left_shoulder_abduction),
            right_shoulder_flexion: j(self.right_shoulder_flexion),
            right_shoulder_abduction: j(self.right_shoulder_abduction),
            left_elbow_flexion: j(self.left_elbow_flexion),
            right_elbow_flexion: j(self.right_elbow_flexion),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostureSpec {
    pub posture: Posture,
    pub angles: PostureAngles,
}

/// Wheelchair layout in its own frame (x forward, y up, z right, origin on
/// the ground under the rear axle midpoint).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WheelchairSpec {
    pub rear_half_track: f64,
    pub rear_wheel_radius: f64,
    pub front_x: f64,
    pub front_half_track: f64,
    pub empty_mass_kg: f64,
    pub empty_com: Point3,
    pub markers: Vec<(String, Point3)>,
}

impl Default for WheelchairSpec {
    fn default() -> Self {
        Self {
            rear_half_track: 0.30,
            rear_wheel_radius: 0.30,
            front_x: 0.45,
            front_half_track: 0.22,
            empty_mass_kg: 14.0,
            empty_com: Point3::new(0.15, 0.35, 0.0),
            markers: vec![
                ("WC1".into(), Point3::new(-0.12, 0.75, -0.22)),
                ("WC2".into(), Point3::new(-0.12, 0.75, 0.22)),
                ("WC3".into(), Point3::new(0.05, 0.52, -0.25)),
                ("WC4".into(), Point3::new(0.30, 0.50, 0.25)),
            ],
        }
    }
}

impl WheelchairSpec {
    /// Contacts in rear-left, rear-right, front-left, front-right order.
    pub fn contacts(&self) -> [Point3; 4] {
        [
            Point3::new(0.0, 0.0, -self.rear_half_track),
            Point3::new(0.0, 0.0, self.rear_half_track),
            Point3::new(self.front_x, 0.0, -self.front_half_track),
            Point3::new(self.front_x, 0.0, self.front_half_track),
        ]
    }

    fn contacts_xz(&self) -> [[f64; 2]; 4] {
        self.contacts().map(|c| [c.x, c.z])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScenario {
    pub seed: u64,
    pub sex: Sex,
    pub total_mass_kg: f64,
    /// Write `"from-plates"` instead of the mass into the manifest.
    pub mass_from_plates: bool,
    pub dimensions: BodyDimensions,
    pub wheelchair: WheelchairSpec,
    pub postures: Vec<PostureSpec>,
    pub trials_per_posture: u32,
    /// Uniform per-trial perturbation of every joint angle, degrees.
    pub jitter_deg: f64,
    pub noise: NoiseModel,
    pub trial_duration_s: f64,
    pub marker_rate_hz: f64,
    pub force_rate_hz: f64,
    pub table: AnthropometricTable,
    pub plate_to_wheel: [Wheel; 4],
}

impl SyntheticScenario {
    /// Nine postures by three trials with typical lab noise.
    pub fn standard(seed: u64) -> Self {
        Self {
            seed,
            sex: Sex::Male,
            total_mass_kg: 72.0,
            mass_from_plates: false,
            dimensions: BodyDimensions::default(),
            wheelchair: WheelchairSpec::default(),
            postures: Posture::ALL
                .iter()
                .map(|&posture| PostureSpec {
                    posture,
                    angles: PostureAngles::for_posture(posture),
                })
                .collect(),
            trials_per_posture: 3,
            jitter_deg: 2.0,
            noise: NoiseModel {
                marker_sigma_m: 0.001,
                force_sigma_n: 2.0,
            },
            trial_duration_s: 2.0,
            marker_rate_hz: 120.0,
            force_rate_hz: 1000.0,
            table: AnthropometricTable::synthetic(),
            plate_to_wheel: [Wheel::RearRight, Wheel::RearLeft, Wheel::FrontRight, Wheel::FrontLeft],
        }
    }

    pub fn noise_free(seed: u64) -> Self {
        Self {
            noise: NoiseModel::NONE,
            ..Self::standard(seed)
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            self.total_mass_kg,
            self.trial_duration_s,
            self.marker_rate_hz,
            self.force_rate_hz,
            self.wheelchair.empty_mass_kg,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::MalformedDocument(
                "scenario masses, rates and duration must be positive".into(),
            ));
        }
        let sigmas = [self.noise.marker_sigma_m, self.noise.force_sigma_n, self.jitter_deg];
        if sigmas.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::MalformedDocument(
                "noise levels must be finite and non-negative".into(),
            ));
        }
        if self.postures.is_empty() || self.trials_per_posture == 0 {
            return Err(Error::MalformedDocument("scenario has no trials".into()));
        }
        if self.wheelchair.markers.len() < 3 {
            return Err(Error::MalformedDocument("wheelchair needs at least 3 markers".into()));
        }
        Ok(())
    }
}

/// Noise-free state of one recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTruth {
    pub posture: Posture,
    pub trial: u32,
    pub angles: PostureAngles,
    /// Whole-body centre of mass in the wheelchair frame.
    pub com: Point3,
    /// Markers, landmarks and joint centres in laboratory coordinates.
    pub landmarks: BTreeMap<String, Point3>,
    /// Subject-only vertical forces in contact order, newtons.
    pub forces: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub total_mass_kg: f64,
    /// Wheelchair frame to laboratory.
    pub wheelchair_pose: RigidTransform,
    pub segment_masses: Vec<(SegmentId, f64)>,
    pub static_trial: TrialTruth,
    pub trials: Vec<TrialTruth>,
}

/// Minimum-norm non-negative forces on four contacts carrying `load` with
/// its pressure centre at (`ap`, `ml`). Every active set is tried and the
/// smallest feasible solution kept.
pub fn distribute_load(load: f64, ap: f64, ml: f64, contacts: &[[f64; 2]; 4]) -> Result<[f64; 4]> {
    let b = nalgebra::DVector::from_column_slice(&[load, load * ap, load * ml]);
    let tol = 1e-9 * load.abs().max(1.0);
    let mut best: Option<([f64; 4], f64)> = None;
    for mask in 1u8..16 {
        let idx: Vec<usize> = (0..4).filter(|i| mask & (1 << i) != 0).collect();
        let a = DMatrix::from_fn(3, idx.len(), |r, c| match r {
            0 => 1.0,
            1 => contacts[idx[c]][0],
            _ => contacts[idx[c]][1],
        });
        let Ok(pinv) = a.clone().pseudo_inverse(1e-12) else {
            continue;
        };
        let x = pinv * &b;
        if (&a * &x - &b).norm() > tol || x.iter().any(|v| *v < -tol) {
            continue;
        }
        let mut f = [0.0; 4];
        for (k, &i) in idx.iter().enumerate() {
            f[i] = x[k].max(0.0);
        }
        let norm = x.norm();
        if best.is_none_or(|(_, n)| norm < n) {
            best = Some((f, norm));
        }
    }
    best.map(|(f, _)| f).ok_or(Error::InfeasibleCoM { ap, ml })
}

/// Rigid body of the skeleton tree a point moves with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Part {
    Chair,
    Thorax,
    Head,
    UpperArm(Side),
    Forearm(Side),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Side {
    Left,
    Right,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

fn segment_part(id: SegmentId) -> Part {
    use SegmentId::*;
    match id {
        Head => Part::Head,
        Thorax => Part::Thorax,
        LeftUpperArm => Part::UpperArm(Side::Left),
        RightUpperArm => Part::UpperArm(Side::Right),
        LeftForearm | LeftHand => Part::Forearm(Side::Left),
        RightForearm | RightHand => Part::Forearm(Side::Right),
        Pelvis | LeftThigh | RightThigh | LeftShank | RightShank | LeftFoot | RightFoot => Part::Chair,
    }
}

/// Skeleton in the neutral posture, wheelchair coordinates.
struct Anatomy {
    points: BTreeMap<String, (Part, Point3)>,
    cluster_markers: BTreeMap<String, Vec<String>>,
}

impl Anatomy {
    fn add(&mut self, label: &str, part: Part, p: Point3) {
        self.points.insert(label.to_string(), (part, p));
    }

    fn get(&self, label: &str) -> Point3 {
        self.points[label].1
    }

    fn add_cluster(&mut self, name: &str, part: Part, markers: &[(String, Point3)]) {
        for (l, p) in markers {
            self.add(l, part, *p);
        }
        self.cluster_markers
            .insert(name.to_string(), markers.iter().map(|(l, _)| l.clone()).collect());
    }
}

fn side_markers(prefix: &str, base: Point3, side: Side, offsets: [[f64; 3]; 4]) -> Vec<(String, Point3)> {
    offsets
        .iter()
        .enumerate()
        .map(|(i, o)| {
            (
                format!("{prefix}{}", i + 1),
                base + Vector3::new(o[0], o[1], side.sign() * o[2]),
            )
        })
        .collect()
}

/// Unit vector of `v` without its component along unit `axis`.
fn orthogonal_unit(v: Vector3<f64>, axis: &Vector3<f64>) -> Vector3<f64> {
    (v - axis * axis.dot(&v)).normalize()
}

fn build_anatomy(s: &SyntheticScenario) -> Anatomy {
    let d = &s.dimensions;
    let reg = s.table.regression(s.sex);
    let mut a = Anatomy {
        points: BTreeMap::new(),
        cluster_markers: BTreeMap::new(),
    };
    let chair = Part::Chair;

    // wheelchair
    let wc = &s.wheelchair;
    a.add(
        LEFT_WHEEL_CENTRE,
        chair,
        Point3::new(0.0, wc.rear_wheel_radius, -wc.rear_half_track),
    );
    a.add(
        RIGHT_WHEEL_CENTRE,
        chair,
        Point3::new(0.0, wc.rear_wheel_radius, wc.rear_half_track),
    );
    for (l, p) in PROBED_CONTACTS.iter().zip(wc.contacts()) {
        a.add(l, chair, p);
    }
    a.add_cluster(WHEELCHAIR_CLUSTER, chair, &wc.markers);

    // pelvis
    let w = d.pelvis_width;
    let mid = Point3::new(0.14, 0.60, 0.0);
    let lasis = mid - Vector3::new(0.0, 0.0, w / 2.0);
    let rasis = mid + Vector3::new(0.0, 0.0, w / 2.0);
    let sym = mid + Vector3::new(0.02, -0.085, 0.0);
    a.add(LASIS, chair, lasis);
    a.add(RASIS, chair, rasis);
    a.add(SYM, chair, sym);
    a.add(LPSIS, chair, mid + Vector3::new(-0.16, 0.02, -0.045));
    a.add(RPSIS, chair, mid + Vector3::new(-0.16, 0.02, 0.045));

    // pelvis regressions, written out directly
    let pz = (rasis - lasis).normalize();
    let py = -orthogonal_unit(sym - mid, &pz);
    let px = py.cross(&pz);
    let at = |o: [f64; 3]| mid + (px * o[0] + py * o[1] + pz * o[2]) * w;
    let ljc = at(reg.lumbar_offset);
    let [hx, hy, hz] = reg.hip_offset;
    a.add(LJC, chair, ljc);
    a.add(LHJC, chair, at([hx, hy, -hz]));
    a.add(RHJC, chair, at([hx, hy, hz]));

    // legs, rigid with the chair
    for side in [Side::Left, Side::Right] {
        let sg = side.sign();
        let (hjc, kjc, ajc, le, me, lm, mm) = match side {
            Side::Left => (LHJC, LKJC, LAJC, LFLE, LFME, LLM, LMM),
            Side::Right => (RHJC, RKJC, RAJC, RFLE, RFME, RLM, RMM),
        };
        let knee = a.get(hjc) + Vector3::new(d.thigh, -0.03, sg * 0.02);
        let ankle = knee + Vector3::new(0.06, -d.shank, 0.0);
        let ke = Vector3::new(0.0, 0.005, sg * 0.045);
        let ae = Vector3::new(-0.01, 0.0, sg * 0.035);
        a.add(le, chair, knee + ke);
        a.add(me, chair, knee - ke);
        a.add(lm, chair, ankle + ae);
        a.add(mm, chair, ankle - ae);
        // the estimator's joint centres are the landmark midpoints
        a.add(kjc, chair, nalgebra::center(&a.get(le), &a.get(me)));
        a.add(ajc, chair, nalgebra::center(&a.get(lm), &a.get(mm)));
    }

    // trunk
    let thorax = Part::Thorax;
    let c7 = ljc + Vector3::new(-0.05, d.trunk_height, 0.0);
    let ij = c7 + Vector3::new(0.14, -0.06, 0.0);
    a.add(C7, thorax, c7);
    a.add(IJ, thorax, ij);
    let lac = c7 + Vector3::new(0.02, -0.02, -d.shoulder_half_width);
    let rac = c7 + Vector3::new(0.02, -0.02, d.shoulder_half_width);
    a.add(LAC, thorax, lac);
    a.add(RAC, thorax, rac);
    a.add_cluster(
        THORAX_CLUSTER,
        thorax,
        &[
            ("TH1".into(), c7 + Vector3::new(-0.04, -0.08, 0.0)),
            ("TH2".into(), c7 + Vector3::new(-0.05, -0.16, -0.05)),
            ("TH3".into(), c7 + Vector3::new(-0.05, -0.16, 0.05)),
            ("TH4".into(), c7 + Vector3::new(-0.02, -0.23, 0.01)),
        ],
    );
    // cervical regression: along C7 -> notch, then up in the sagittal plane
    let cx = (ij - c7).normalize();
    let cy = -orthogonal_unit(ljc - c7, &cx);
    let depth = (ij - c7).norm();
    let [ca, cb] = reg.cervical_offset;
    let cjc = c7 + (cx * ca + cy * cb) * depth;
    a.add(CJC, thorax, cjc);

    // head
    let head = Part::Head;
    a.add(HV, head, cjc + Vector3::new(-0.01, d.head_height, 0.0));
    a.add(SEL, head, cjc + Vector3::new(0.10, 0.11, 0.0));
    a.add_cluster(
        HEAD_CLUSTER,
        head,
        &[
            ("HD1".into(), cjc + Vector3::new(-0.07, 0.17, 0.0)),
            ("HD2".into(), cjc + Vector3::new(0.0, 0.19, -0.07)),
            ("HD3".into(), cjc + Vector3::new(0.0, 0.185, 0.07)),
            ("HD4".into(), cjc + Vector3::new(0.05, 0.205, 0.01)),
        ],
    );

    // arms hang straight down from shoulder centres below the acromions
    let drop = Vector3::new(0.0, -reg.shoulder_ratio * (rac - lac).norm(), 0.0);
    for side in [Side::Left, Side::Right] {
        let sg = side.sign();
        let ua = Part::UpperArm(side);
        let fa = Part::Forearm(side);
        let (ac, sjc, ejc, wjc, hle, hme, us, rs, mc2, mc5, uac, fac, uap, fap) = match side {
            Side::Left => (
                lac,
                LSJC,
                LEJC,
                LWJC,
                LHLE,
                LHME,
                LUS,
                LRS,
                LMC2,
                LMC5,
                LEFT_UPPER_ARM_CLUSTER,
                LEFT_FOREARM_CLUSTER,
                "LUA",
                "LFA",
            ),
            Side::Right => (
                rac,
                RSJC,
                REJC,
                RWJC,
                RHLE,
                RHME,
                RUS,
                RRS,
                RMC2,
                RMC5,
                RIGHT_UPPER_ARM_CLUSTER,
                RIGHT_FOREARM_CLUSTER,
                "RUA",
                "RFA",
            ),
        };
        let shoulder = ac + drop;
        let elbow_target = shoulder + Vector3::new(0.0, -d.upper_arm, 0.0);
        let wrist_target = elbow_target + Vector3::new(0.0, -d.forearm, 0.0);
        let ee = Vector3::new(0.0, 0.0, sg * 0.035);
        let we = Vector3::new(0.0, 0.0, sg * 0.03);
        a.add(sjc, ua, shoulder);
        a.add(hle, ua, elbow_target + ee);
        a.add(hme, ua, elbow_target - ee);
        let elbow = nalgebra::center(&a.get(hle), &a.get(hme));
        a.add(ejc, ua, elbow);
        a.add(rs, fa, wrist_target + we);
        a.add(us, fa, wrist_target - we);
        let wrist = nalgebra::center(&a.get(rs), &a.get(us));
        a.add(wjc, fa, wrist);
        a.add(mc2, fa, wrist + Vector3::new(0.01, -d.hand, sg * 0.03));
        a.add(mc5, fa, wrist + Vector3::new(0.0, -0.95 * d.hand, -sg * 0.025));
        let uam = side_markers(
            uap,
            shoulder,
            side,
            [
                [0.02, -0.10, 0.055],
                [-0.02, -0.12, 0.06],
                [0.0, -0.18, 0.065],
                [0.015, -0.16, 0.045],
            ],
        );
        a.add_cluster(uac, ua, &uam);
        let fam = side_markers(
            fap,
            elbow,
            side,
            [
                [0.02, -0.08, 0.04],
                [-0.02, -0.09, 0.04],
                [0.0, -0.16, 0.035],
                [0.01, -0.13, 0.05],
            ],
        );
        a.add_cluster(fac, fa, &fam);
    }
    a
}

fn about(centre: &Point3, rotation: Rotation3<f64>) -> RigidTransform {
    RigidTransform::new(rotation, centre.coords - rotation * centre.coords)
}

fn deg(v: f64) -> f64 {
    v.to_radians()
}

/// Rigid motion of every body part for the given angles, in wheelchair
/// coordinates.
fn part_motions(a: &Anatomy, angles: &PostureAngles) -> BTreeMap<Part, RigidTransform> {
    let rx = |t: f64| Rotation3::from_axis_angle(&Vector3::x_axis(), deg(t));
    let rz = |t: f64| Rotation3::from_axis_angle(&Vector3::z_axis(), deg(t));
    let trunk = about(&a.get(LJC), rx(angles.trunk_lateral) * rz(-angles.trunk_flexion));
    let head = trunk * about(&a.get(CJC), rz(-angles.neck_flexion));
    let mut m = BTreeMap::new();
    m.insert(Part::Chair, RigidTransform::identity());
    m.insert(Part::Thorax, trunk);
    m.insert(Part::Head, head);
    for side in [Side::Left, Side::Right] {
        let (sjc, ejc, flex, abd, elbow) = match side {
            Side::Left => (
                LSJC,
                LEJC,
                angles.left_shoulder_flexion,
                angles.left_shoulder_abduction,
                angles.left_elbow_flexion,
            ),
            Side::Right => (
                RSJC,
                REJC,
                angles.right_shoulder_flexion,
                angles.right_shoulder_abduction,
                angles.right_elbow_flexion,
            ),
        };
        let upper = trunk * about(&a.get(sjc), rz(flex) * rx(-side.sign() * abd));
        let fore = upper * about(&a.get(ejc), rz(elbow));
        m.insert(Part::UpperArm(side), upper);
        m.insert(Part::Forearm(side), fore);
    }
    m
}

/// Segment frame from the recipe, built with plain vector algebra: the
/// primary axis along origin -> end, the plane axis toward the plane
/// point, the remaining axis completing a right-handed triad.
fn oracle_frame(a: &Anatomy, s: &crate::anthropometry::LcsRecipe) -> (Matrix3<f64>, Point3, f64) {
    let resolve = |r: &PointRef| match r {
        PointRef::Label(l) => a.get(l),
        PointRef::Midpoint([p, q]) => Point3::from((a.get(p).coords + a.get(q).coords) / 2.0),
    };
    let o = resolve(&s.origin);
    let along = resolve(&s.primary_end) - o;
    let e1 = along.normalize();
    let e2 = orthogonal_unit(resolve(&s.plane_point) - o, &e1);
    let slot = |axis: Axis| match axis {
        Axis::X => 0usize,
        Axis::Y => 1,
        Axis::Z => 2,
    };
    let mut cols = [Vector3::zeros(); 3];
    let sign = |a: crate::geometry::SignedAxis| if a.negative { -1.0 } else { 1.0 };
    let (p, q) = (slot(s.primary_axis.axis), slot(s.plane_axis.axis));
    cols[p] = e1 * sign(s.primary_axis);
    cols[q] = e2 * sign(s.plane_axis);
    let r = 3 - p - q;
    cols[r] = cols[(r + 1) % 3].cross(&cols[(r + 2) % 3]);
    (Matrix3::from_columns(&cols), o, along.norm())
}

/// Segment masses and neutral-posture centres of mass per body part.
fn segment_truth(s: &SyntheticScenario, a: &Anatomy) -> Vec<(SegmentId, f64, Part, Point3)> {
    let sum: f64 = s.table.segments().map(|e| e.params(s.sex).mass_fraction).sum();
    SegmentId::ALL
        .iter()
        .map(|&id| {
            let e = s.table.segment(id);
            let params = e.params(s.sex);
            let (basis, origin, length) = oracle_frame(a, &e.lcs);
            let local = Vector3::from(params.com_ratios) * length;
            let com = origin + basis * local;
            (id, s.total_mass_kg * params.mass_fraction / sum, segment_part(id), com)
        })
        .collect()
}

fn posed_points(
    a: &Anatomy,
    motions: &BTreeMap<Part, RigidTransform>,
    pose: &RigidTransform,
) -> BTreeMap<String, Point3> {
    a.points
        .iter()
        .map(|(l, (part, p))| (l.clone(), pose.transform_point(&motions[part].transform_point(p))))
        .collect()
}

fn true_com(segments: &[(SegmentId, f64, Part, Point3)], motions: &BTreeMap<Part, RigidTransform>) -> Point3 {
    let total: f64 = segments.iter().map(|s| s.1).sum();
    let weighted = segments.iter().fold(Vector3::zeros(), |acc, (_, m, part, c)| {
        acc + motions[part].transform_point(c).coords * *m
    });
    Point3::from(weighted / total)
}

struct Noise {
    rng: ChaCha8Rng,
    marker: Normal<f64>,
    force: Normal<f64>,
}

impl Noise {
    fn point(&mut self, p: &Point3) -> Point3 {
        let mut q = *p;
        for v in q.iter_mut() {
            *v += self.marker.sample(&mut self.rng);
        }
        q
    }
}

fn marker_labels(a: &Anatomy) -> Vec<String> {
    CLUSTERS
        .iter()
        .flat_map(|c| a.cluster_markers[*c].iter().cloned())
        .chain(HAND_MARKERS.iter().map(|l| l.to_string()))
        .collect()
}

fn noisy_frames(
    labels: &[String],
    truth: &BTreeMap<String, Point3>,
    count: usize,
    rate: f64,
    noise: &mut Noise,
) -> Vec<Frame> {
    (0..count)
        .map(|i| {
            let markers: LabelledPointSet = labels.iter().map(|l| (l.clone(), noise.point(&truth[l]))).collect();
            Frame {
                time: i as f64 / rate,
                markers,
            }
        })
        .collect()
}

fn noisy_forces(base: &[f64; 4], count: usize, rate: f64, noise: &mut Noise) -> Vec<ForceSample> {
    (0..count)
        .map(|i| ForceSample {
            time: i as f64 / rate,
            forces: base.map(|f| f + noise.force.sample(&mut noise.rng)),
        })
        .collect()
}

const PROBING_FRAMES: usize = 12;

/// Builds every session file plus the noise-free truth.
pub fn generate(s: &SyntheticScenario) -> Result<(SessionFiles, GroundTruth)> {
    s.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let anatomy = build_anatomy(s);
    let segments = segment_truth(s, &anatomy);
    let labels = marker_labels(&anatomy);
    let contacts_xz = s.wheelchair.contacts_xz();

    let yaw = Uniform::new_inclusive(-30.0f64, 30.0).expect("range").sample(&mut rng);
    let shift = Uniform::new_inclusive(-0.5f64, 0.5).expect("range");
    let pose = RigidTransform::new(
        Rotation3::from_axis_angle(&Vector3::y_axis(), deg(yaw)),
        Vector3::new(shift.sample(&mut rng), 0.0, shift.sample(&mut rng)),
    );

    let weight = s.total_mass_kg * GRAVITY;
    let truth_for = |posture: Posture, trial: u32, angles: PostureAngles| -> Result<TrialTruth> {
        let motions = part_motions(&anatomy, &angles);
        let com = true_com(&segments, &motions);
        let forces = distribute_load(weight, com.x, com.z, &contacts_xz)?;
        Ok(TrialTruth {
            posture,
            trial,
            angles,
            com,
            landmarks: posed_points(&anatomy, &motions, &pose),
            forces,
        })
    };
    let static_truth = truth_for(Posture::Neutral, 0, PostureAngles::default())?;
    let mut trials = Vec::new();
    for spec in &s.postures {
        for trial in 1..=s.trials_per_posture {
            let angles = spec.angles.jittered(&mut rng, s.jitter_deg);
            trials.push(truth_for(spec.posture, trial, angles)?);
        }
    }
    let empty = &s.wheelchair;
    let empty_forces = distribute_load(
        empty.empty_mass_kg * GRAVITY,
        empty.empty_com.x,
        empty.empty_com.z,
        &contacts_xz,
    )?;

    let mut noise = Noise {
        rng,
        marker: Normal::new(0.0, s.noise.marker_sigma_m).expect("validated sigma"),
        force: Normal::new(0.0, s.noise.force_sigma_n).expect("validated sigma"),
    };
    let n_markers = (s.trial_duration_s * s.marker_rate_hz).round() as usize;
    let n_forces = (s.trial_duration_s * s.force_rate_hz).round() as usize;
    let plate = |samples: Vec<ForceSample>| write_force_csv(&to_plate_order(&samples, &s.plate_to_wheel));
    let loaded = |subject: &[f64; 4]| -> [f64; 4] { std::array::from_fn(|i| empty_forces[i] + subject[i]) };

    let mut files = SessionFiles::new();
    let table_file = "anthropometric_table.json";
    files.insert(table_file, s.table.to_document() + "\n");

    // probing: one capture per cluster, subject in the neutral posture
    let mut probing = Vec::new();
    for cluster in CLUSTERS {
        let frames = noisy_frames(
            &labels,
            &static_truth.landmarks,
            PROBING_FRAMES,
            s.marker_rate_hz,
            &mut noise,
        );
        let time = frames[PROBING_FRAMES / 2].time;
        let points: Vec<ProbedPoint> = PROBED_POINTS
            .iter()
            .filter(|(_, c)| *c == cluster)
            .map(|(l, _)| *l)
            .chain(
                PROBED_CONTACTS
                    .iter()
                    .copied()
                    .filter(|_| cluster == WHEELCHAIR_CLUSTER),
            )
            .map(|l| ProbedPoint {
                label: l.to_string(),
                cluster: cluster.to_string(),
                time,
                position: noise.point(&static_truth.landmarks[l]),
            })
            .collect();
        let markers = format!("probing/{cluster}.csv");
        let pts = format!("probing/{cluster}_points.json");
        files.insert(&markers, write_marker_csv(&frames, &labels));
        files.insert(&pts, write_probed_points(&points));
        probing.push(ProbingEntry {
            markers: markers.into(),
            points: pts.into(),
        });
    }

    // pelvis cloud, subject moved forward and tilted on the seat
    let mid = nalgebra::center(&anatomy.get(LASIS), &anatomy.get(RASIS));
    let fore = RigidTransform::from_translation(Vector3::new(0.08, 0.0, 0.01))
        * about(&mid, Rotation3::from_axis_angle(&Vector3::z_axis(), deg(-10.0)));
    let cloud_point = |l: &str, n: &mut Noise| n.point(&pose.transform_point(&fore.transform_point(&anatomy.get(l))));
    let cloud = PelvisCloud::new(
        cloud_point(LASIS, &mut noise),
        cloud_point(RASIS, &mut noise),
        cloud_point(SYM, &mut noise),
        cloud_point(LPSIS, &mut noise),
        cloud_point(RPSIS, &mut noise),
    )?;
    files.insert("pelvis_cloud.json", write_pelvis_cloud(&cloud));

    files.insert(
        "forces/empty_wheelchair.csv",
        plate(noisy_forces(&empty_forces, n_forces, s.force_rate_hz, &mut noise)),
    );

    let static_frames = noisy_frames(
        &labels,
        &static_truth.landmarks,
        n_markers,
        s.marker_rate_hz,
        &mut noise,
    );
    files.insert("static/markers.csv", write_marker_csv(&static_frames, &labels));
    files.insert(
        "static/forces.csv",
        plate(noisy_forces(
            &loaded(&static_truth.forces),
            n_forces,
            s.force_rate_hz,
            &mut noise,
        )),
    );

    let mut entries = Vec::new();
    for t in &trials {
        let stem = format!("trials/{}_{}", t.posture.key(), t.trial);
        let frames = noisy_frames(&labels, &t.landmarks, n_markers, s.marker_rate_hz, &mut noise);
        files.insert(format!("{stem}_markers.csv"), write_marker_csv(&frames, &labels));
        files.insert(
            format!("{stem}_forces.csv"),
            plate(noisy_forces(&loaded(&t.forces), n_forces, s.force_rate_hz, &mut noise)),
        );
        entries.push(TrialEntry {
            posture: t.posture,
            trial: t.trial,
            markers: format!("{stem}_markers.csv").into(),
            forces: format!("{stem}_forces.csv").into(),
        });
    }

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        subject: SubjectSpec {
            sex: s.sex,
            total_mass_kg: if s.mass_from_plates {
                MassSpec::FromPlates
            } else {
                MassSpec::Kilograms(s.total_mass_kg)
            },
        },
        anthropometric_table: table_file.into(),
        clusters: anatomy.cluster_markers.clone(),
        probing,
        pelvis_cloud: Some("pelvis_cloud.json".into()),
        empty_wheelchair_forces: "forces/empty_wheelchair.csv".into(),
        static_trial: Recording {
            markers: "static/markers.csv".into(),
            forces: "static/forces.csv".into(),
        },
        plate_to_wheel: s.plate_to_wheel,
        trials: entries,
        window: None,
    };
    files.insert(MANIFEST_FILE, manifest.to_json());

    let truth = GroundTruth {
        total_mass_kg: s.total_mass_kg,
        wheelchair_pose: pose,
        segment_masses: segments.iter().map(|(id, m, _, _)| (*id, *m)).collect(),
        static_trial: static_truth,
        trials,
    };
    Ok((files, truth))
}
