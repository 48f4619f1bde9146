//! Body-segment parameters and joint-centre regression rules.
//!
//! Every numeric constant lives in a JSON table document (see
//! `data/*.json`); the code only knows the shape of the rules. A table also
//! carries the segment frame recipes its centre-of-mass ratios were defined
//! in, so ratios and frames always travel together.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_lcs, AxisRoles, Point3, RigidTransform, SignedAxis};
use crate::landmarks::*;

pub const TABLE_FORMAT_VERSION: u32 = 1;

/// Tolerance on the per-sex sum of mass fractions.
pub const MASS_FRACTION_SUM_RANGE: (f64, f64) = (0.99, 1.01);

const DUMAS_2007_DOCUMENT: &str = include_str!("../data/dumas2007_table.json");
const SYNTHETIC_DOCUMENT: &str = include_str!("../data/synthetic_table.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Female,
    Male,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentId {
    Head,
    Thorax,
    Pelvis,
    LeftUpperArm,
    RightUpperArm,
    LeftForearm,
    RightForearm,
    LeftHand,
    RightHand,
    LeftThigh,
    RightThigh,
    LeftShank,
    RightShank,
    LeftFoot,
    RightFoot,
}

impl SegmentId {
    pub const ALL: [SegmentId; 15] = [
        SegmentId::Head,
        SegmentId::Thorax,
        SegmentId::Pelvis,
        SegmentId::LeftUpperArm,
        SegmentId::RightUpperArm,
        SegmentId::LeftForearm,
        SegmentId::RightForearm,
        SegmentId::LeftHand,
        SegmentId::RightHand,
        SegmentId::LeftThigh,
        SegmentId::RightThigh,
        SegmentId::LeftShank,
        SegmentId::RightShank,
        SegmentId::LeftFoot,
        SegmentId::RightFoot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SegmentId::Head => "head",
            SegmentId::Thorax => "thorax",
            SegmentId::Pelvis => "pelvis",
            SegmentId::LeftUpperArm => "left_upper_arm",
            SegmentId::RightUpperArm => "right_upper_arm",
            SegmentId::LeftForearm => "left_forearm",
            SegmentId::RightForearm => "right_forearm",
            SegmentId::LeftHand => "left_hand",
            SegmentId::RightHand => "right_hand",
            SegmentId::LeftThigh => "left_thigh",
            SegmentId::RightThigh => "right_thigh",
            SegmentId::LeftShank => "left_shank",
            SegmentId::RightShank => "right_shank",
            SegmentId::LeftFoot => "left_foot",
            SegmentId::RightFoot => "right_foot",
        }
    }

    /// Cluster that carries the segment. The pelvis and lower limbs ride
    /// on the wheelchair; hands use the forearm cluster plus their
    /// metacarpal markers.
    pub fn tracking_cluster(self) -> &'static str {
        use SegmentId::*;
        match self {
            Head => HEAD_CLUSTER,
            Thorax => THORAX_CLUSTER,
            LeftUpperArm => LEFT_UPPER_ARM_CLUSTER,
            RightUpperArm => RIGHT_UPPER_ARM_CLUSTER,
            LeftForearm | LeftHand => LEFT_FOREARM_CLUSTER,
            RightForearm | RightHand => RIGHT_FOREARM_CLUSTER,
            Pelvis | LeftThigh | RightThigh | LeftShank | RightShank | LeftFoot | RightFoot => WHEELCHAIR_CLUSTER,
        }
    }
}

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mass fraction of total body mass and centre-of-mass position in the
/// segment frame, as fractions of segment length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentParams {
    pub mass_fraction: f64,
    #[serde(rename = "com")]
    pub com_ratios: [f64; 3],
}

/// A point named in a frame recipe: a landmark label or the midpoint of two.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRef {
    Label(String),
    Midpoint([String; 2]),
}

impl PointRef {
    pub fn labels(&self) -> Vec<&str> {
        match self {
            PointRef::Label(l) => vec![l.as_str()],
            PointRef::Midpoint([a, b]) => vec![a.as_str(), b.as_str()],
        }
    }

    pub fn resolve(&self, lookup: impl Fn(&str) -> Option<Point3>) -> Result<Point3> {
        let get = |l: &str| lookup(l).ok_or_else(|| Error::UnknownLabel(l.to_string()));
        match self {
            PointRef::Label(l) => get(l),
            PointRef::Midpoint([a, b]) => crate::geometry::midpoint(&get(a)?, &get(b)?),
        }
    }
}

impl fmt::Display for PointRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointRef::Label(l) => f.write_str(l),
            PointRef::Midpoint([a, b]) => write!(f, "mid({a},{b})"),
        }
    }
}

/// How to build a segment frame from landmarks. The segment length used
/// for the centre-of-mass ratios is `|primary_end - origin|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcsRecipe {
    pub origin: PointRef,
    pub primary_end: PointRef,
    pub plane_point: PointRef,
    pub primary_axis: SignedAxis,
    pub plane_axis: SignedAxis,
}

impl LcsRecipe {
    pub fn roles(&self) -> Result<AxisRoles> {
        AxisRoles::new(self.primary_axis, self.plane_axis)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        [&self.origin, &self.primary_end, &self.plane_point]
            .into_iter()
            .flat_map(|p| p.labels())
    }

    /// Frame pose and segment length from resolved landmark positions.
    pub fn evaluate(&self, lookup: impl Fn(&str) -> Option<Point3>) -> Result<(RigidTransform, f64)> {
        let origin = self.origin.resolve(&lookup)?;
        let end = self.primary_end.resolve(&lookup)?;
        let plane = self.plane_point.resolve(&lookup)?;
        let lcs = build_lcs(&origin, &end, &plane, self.roles()?)?;
        Ok((lcs, (end - origin).norm()))
    }
}

/// Joint-centre regression coefficients. Offsets are fractions of a
/// reference width (pelvis: inter-ASIS distance; cervical: C7 to
/// suprasternal notch distance).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionParams {
    /// Lumbar joint centre in the pelvis frame (x forward, y up, z right).
    pub lumbar_offset: [f64; 3],
    /// Right hip joint centre in the pelvis frame; the left one is its
    /// mirror image (z negated).
    pub hip_offset: [f64; 3],
    /// Cervical joint centre from C7: along C7 -> notch, then upward in the
    /// thorax sagittal plane.
    pub cervical_offset: [f64; 2],
    /// Shoulder centre drop below the acromion, as a fraction of the
    /// inter-acromial distance.
    pub shoulder_ratio: f64,
}

impl RegressionParams {
    pub fn zero() -> Self {
        Self {
            lumbar_offset: [0.0; 3],
            hip_offset: [0.0; 3],
            cervical_offset: [0.0; 2],
            shoulder_ratio: 0.17,
        }
    }

    fn validate(&self) -> Result<()> {
        let all = self
            .lumbar_offset
            .iter()
            .chain(&self.hip_offset)
            .chain(&self.cervical_offset)
            .chain(std::iter::once(&self.shoulder_ratio));
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::MalformedDocument("non-finite regression coefficient".into()));
        }
        if !(self.shoulder_ratio > 0.0 && self.shoulder_ratio < 1.0) {
            return Err(Error::MalformedDocument(format!(
                "shoulder_ratio {} outside (0, 1)",
                self.shoulder_ratio
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerSex<T> {
    pub female: T,
    pub male: T,
}

impl<T> PerSex<T> {
    pub fn get(&self, sex: Sex) -> &T {
        match sex {
            Sex::Female => &self.female,
            Sex::Male => &self.male,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentEntry {
    pub segment: SegmentId,
    pub lcs: LcsRecipe,
    pub female: SegmentParams,
    pub male: SegmentParams,
}

impl SegmentEntry {
    pub fn params(&self, sex: Sex) -> &SegmentParams {
        match sex {
            Sex::Female => &self.female,
            Sex::Male => &self.male,
        }
    }
}

/// Validated anthropometric table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableDocument", into = "TableDocument")]
pub struct AnthropometricTable {
    provenance: String,
    regression: PerSex<RegressionParams>,
    segments: BTreeMap<SegmentId, SegmentEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDocument {
    format_version: u32,
    provenance: String,
    regression: PerSex<RegressionParams>,
    segments: Vec<SegmentEntry>,
}

impl TryFrom<TableDocument> for AnthropometricTable {
    type Error = Error;

    fn try_from(doc: TableDocument) -> Result<Self> {
        if doc.format_version != TABLE_FORMAT_VERSION {
            return Err(Error::MalformedDocument(format!(
                "unsupported table format_version {}",
                doc.format_version
            )));
        }
        if doc.provenance.trim().is_empty() {
            return Err(Error::MalformedDocument("provenance is mandatory".into()));
        }
        doc.regression.female.validate()?;
        doc.regression.male.validate()?;

        let mut segments = BTreeMap::new();
        for entry in doc.segments {
            entry.lcs.roles()?;
            for sex in [Sex::Female, Sex::Male] {
                let p = entry.params(sex);
                if !(p.mass_fraction > 0.0 && p.mass_fraction < 1.0) {
                    return Err(Error::MassFractionOutOfRange(format!(
                        "{} ({sex:?}) mass fraction {}",
                        entry.segment, p.mass_fraction
                    )));
                }
                if p.com_ratios.iter().any(|v| !v.is_finite()) {
                    return Err(Error::MalformedDocument(format!(
                        "{} has non-finite com ratios",
                        entry.segment
                    )));
                }
            }
            let id = entry.segment;
            if segments.insert(id, entry).is_some() {
                return Err(Error::MalformedDocument(format!("segment {id} listed twice")));
            }
        }
        if let Some(missing) = SegmentId::ALL.iter().find(|s| !segments.contains_key(s)) {
            return Err(Error::MissingSegment(missing.to_string()));
        }
        for sex in [Sex::Female, Sex::Male] {
            let sum: f64 = segments.values().map(|e| e.params(sex).mass_fraction).sum();
            let (lo, hi) = MASS_FRACTION_SUM_RANGE;
            if !(lo..=hi).contains(&sum) {
                return Err(Error::MassFractionOutOfRange(format!(
                    "{sex:?} mass fractions sum to {sum}"
                )));
            }
        }
        Ok(Self {
            provenance: doc.provenance,
            regression: doc.regression,
            segments,
        })
    }
}

impl From<AnthropometricTable> for TableDocument {
    fn from(t: AnthropometricTable) -> Self {
        Self {
            format_version: TABLE_FORMAT_VERSION,
            provenance: t.provenance,
            regression: t.regression,
            segments: t.segments.into_values().collect(),
        }
    }
}

/// Parses and validates a JSON table document.
pub fn load_table(document: &str) -> Result<AnthropometricTable> {
    let doc: TableDocument = serde_json::from_str(document).map_err(|e| Error::MalformedDocument(e.to_string()))?;
    AnthropometricTable::try_from(doc)
}

impl AnthropometricTable {
    /// Published adult values; see the provenance string for sources.
    pub fn dumas_2007() -> Self {
        load_table(DUMAS_2007_DOCUMENT).expect("bundled table is valid")
    }

    /// Invented, self-consistent values used by the synthetic session
    /// generator and the test suites.
    pub fn synthetic() -> Self {
        load_table(SYNTHETIC_DOCUMENT).expect("bundled table is valid")
    }

    pub fn to_document(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn regression(&self, sex: Sex) -> &RegressionParams {
        self.regression.get(sex)
    }

    pub fn segment(&self, id: SegmentId) -> &SegmentEntry {
        &self.segments[&id]
    }

    pub fn params(&self, id: SegmentId, sex: Sex) -> &SegmentParams {
        self.segment(id).params(sex)
    }

    pub fn segments(&self) -> impl Iterator<Item = &SegmentEntry> {
        self.segments.values()
    }

    pub fn mass_fraction_sum(&self, sex: Sex) -> f64 {
        self.segments().map(|e| e.params(sex).mass_fraction).sum()
    }

    /// Returns a copy with one segment's parameters replaced and no
    /// re-validation of the sums.
    pub fn with_params(mut self, id: SegmentId, sex: Sex, params: SegmentParams) -> Self {
        let e = self.segments.get_mut(&id).expect("complete table");
        match sex {
            Sex::Female => e.female = params,
            Sex::Male => e.male = params,
        }
        self
    }

    pub fn with_regression(mut self, sex: Sex, params: RegressionParams) -> Self {
        match sex {
            Sex::Female => self.regression.female = params,
            Sex::Male => self.regression.male = params,
        }
        self
    }
}

fn geometry_error(e: Error) -> Error {
    match e {
        Error::DegenerateAxis(m) => Error::DegenerateGeometry(m),
        e => e,
    }
}

/// Pelvis frame of the regressions: origin at the ASIS midpoint, z toward
/// RASIS, y upward in the ASIS/symphysis plane, x forward.
pub fn pelvis_frame(lasis: &Point3, rasis: &Point3, sym: &Point3) -> Result<RigidTransform> {
    let origin = crate::geometry::midpoint(lasis, rasis)?;
    let roles = AxisRoles::new(SignedAxis::Z, SignedAxis::NEG_Y)?;
    build_lcs(&origin, rasis, sym, roles).map_err(geometry_error)
}

fn scaled(offset: &[f64; 3], width: f64) -> Point3 {
    Point3::from(Vector3::from(*offset) * width)
}

pub fn lumbar_joint_centre(lasis: &Point3, rasis: &Point3, sym: &Point3, params: &RegressionParams) -> Result<Point3> {
    let frame = pelvis_frame(lasis, rasis, sym)?;
    let width = (rasis - lasis).norm();
    Ok(frame.transform_point(&scaled(&params.lumbar_offset, width)))
}

/// Left and right hip joint centres.
pub fn hip_joint_centres(
    lasis: &Point3,
    rasis: &Point3,
    sym: &Point3,
    params: &RegressionParams,
) -> Result<(Point3, Point3)> {
    let frame = pelvis_frame(lasis, rasis, sym)?;
    let width = (rasis - lasis).norm();
    let [x, y, z] = params.hip_offset;
    let right = frame.transform_point(&scaled(&[x, y, z], width));
    let left = frame.transform_point(&scaled(&[x, y, -z], width));
    Ok((left, right))
}

/// Cervical joint centre from C7 and the suprasternal notch; the lumbar
/// joint centre only orients the sagittal plane.
pub fn cervical_joint_centre(
    c7: &Point3,
    suprasternal: &Point3,
    lumbar_jc: &Point3,
    params: &RegressionParams,
) -> Result<Point3> {
    let roles = AxisRoles::new(SignedAxis::X, SignedAxis::NEG_Y)?;
    let frame = build_lcs(c7, suprasternal, lumbar_jc, roles).map_err(geometry_error)?;
    let depth = (suprasternal - c7).norm();
    let [along, up] = params.cervical_offset;
    Ok(frame.transform_point(&Point3::new(along * depth, up * depth, 0.0)))
}

/// Shoulder joint centres directly below each acromion.
pub fn shoulder_joint_centres(
    left_acromion: &Point3,
    right_acromion: &Point3,
    down: &Vector3<f64>,
    params: &RegressionParams,
) -> Result<(Point3, Point3)> {
    let width = (right_acromion - left_acromion).norm();
    if width <= f64::MIN_POSITIVE {
        return Err(Error::DegenerateGeometry("coincident acromions".into()));
    }
    if !down.iter().all(|v| v.is_finite()) || (down.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::DegenerateGeometry("down direction is not a unit vector".into()));
    }
    let drop = down * (params.shoulder_ratio * width);
    Ok((left_acromion + drop, right_acromion + drop))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Rotation3;

    fn uniform_document(skip: Option<SegmentId>, fraction: f64) -> String {
        let table = AnthropometricTable::synthetic();
        let mut doc: TableDocument = table.into();
        doc.segments.retain(|e| Some(e.segment) != skip);
        for e in &mut doc.segments {
            e.female.mass_fraction = fraction;
            e.male.mass_fraction = fraction;
        }
        serde_json::to_string(&doc).unwrap()
    }

    #[test]
    fn bundled_tables_load() {
        for t in [AnthropometricTable::dumas_2007(), AnthropometricTable::synthetic()] {
            assert!(!t.provenance().is_empty());
            for sex in [Sex::Female, Sex::Male] {
                let s = t.mass_fraction_sum(sex);
                assert!((0.99..=1.01).contains(&s), "{s}");
                assert_relative_eq!(t.regression(sex).shoulder_ratio, 0.17);
            }
            let back = load_table(&t.to_document()).unwrap();
            assert_eq!(back, t);
        }
    }

    #[test]
    fn uniform_table_loads() {
        let t = load_table(&uniform_document(None, 1.0 / 15.0)).unwrap();
        assert_relative_eq!(t.mass_fraction_sum(Sex::Male), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn missing_segment_rejected() {
        let err = load_table(&uniform_document(Some(SegmentId::Pelvis), 1.0 / 14.0)).unwrap_err();
        assert!(matches!(err, Error::MissingSegment(s) if s == "pelvis"));
    }

    #[test]
    fn bad_sum_rejected() {
        // 15 × 0.06 = 0.90
        let err = load_table(&uniform_document(None, 0.06)).unwrap_err();
        assert!(matches!(err, Error::MassFractionOutOfRange(_)));
        let err = load_table(&uniform_document(None, 1.2)).unwrap_err();
        assert!(matches!(err, Error::MassFractionOutOfRange(_)));
    }

    #[test]
    fn malformed_rejected() {
        assert!(matches!(load_table("{"), Err(Error::MalformedDocument(_))));
        let mut doc: TableDocument = AnthropometricTable::synthetic().into();
        doc.provenance = "  ".into();
        let s = serde_json::to_string(&doc).unwrap();
        assert!(matches!(load_table(&s), Err(Error::MalformedDocument(_))));
    }

    fn pelvis() -> (Point3, Point3, Point3) {
        (
            Point3::new(0.2, 0.6, -0.125),
            Point3::new(0.2, 0.6, 0.125),
            Point3::new(0.2, 0.52, 0.0),
        )
    }

    #[test]
    fn zero_offsets_return_origin() {
        let (l, r, s) = pelvis();
        let p = RegressionParams::zero();
        let mid = Point3::new(0.2, 0.6, 0.0);
        assert_relative_eq!(lumbar_joint_centre(&l, &r, &s, &p).unwrap(), mid, epsilon = 1e-15);
        let (hl, hr) = hip_joint_centres(&l, &r, &s, &p).unwrap();
        assert_relative_eq!(hl, mid, epsilon = 1e-15);
        assert_relative_eq!(hr, mid, epsilon = 1e-15);
        let c7 = Point3::new(0.0, 1.1, 0.0);
        let cjc = cervical_joint_centre(&c7, &Point3::new(0.12, 1.05, 0.0), &Point3::new(0.0, 0.6, 0.0), &p).unwrap();
        assert_relative_eq!(cjc, c7, epsilon = 1e-15);
    }

    #[test]
    fn lumbar_vertical_offset() {
        let (l, r, s) = pelvis();
        let p = RegressionParams {
            lumbar_offset: [0.0, 0.2, 0.0],
            ..RegressionParams::zero()
        };
        let ljc = lumbar_joint_centre(&l, &r, &s, &p).unwrap();
        assert_relative_eq!(ljc, Point3::new(0.2, 0.65, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn hip_offsets_scale_with_width() {
        let (l, r, s) = pelvis();
        let p = RegressionParams {
            hip_offset: [-0.1, -0.3, 0.4],
            ..RegressionParams::zero()
        };
        let (hl, hr) = hip_joint_centres(&l, &r, &s, &p).unwrap();
        let mid = Point3::new(0.2, 0.6, 0.0);
        assert_relative_eq!(hr - mid, Vector3::new(-0.025, -0.075, 0.1), epsilon = 1e-12);
        assert_relative_eq!(hl - mid, Vector3::new(-0.025, -0.075, -0.1), epsilon = 1e-12);
    }

    #[test]
    fn hips_mirror_for_symmetric_input() {
        let (l, r, s) = pelvis();
        let p = AnthropometricTable::dumas_2007().regression(Sex::Female).to_owned();
        let (hl, hr) = hip_joint_centres(&l, &r, &s, &p).unwrap();
        // sagittal plane is z = 0 here
        assert_relative_eq!(Point3::new(hl.x, hl.y, -hl.z), hr, epsilon = 1e-12);
    }

    #[test]
    fn cervical_along_notch() {
        let c7 = Point3::new(0.0, 1.1, 0.0);
        let ij = Point3::new(0.12, 1.1, 0.0);
        let ljc = Point3::new(0.0, 0.6, 0.0);
        let p = RegressionParams {
            cervical_offset: [0.5, 0.0],
            ..RegressionParams::zero()
        };
        let cjc = cervical_joint_centre(&c7, &ij, &ljc, &p).unwrap();
        assert_relative_eq!(cjc, Point3::new(0.06, 1.1, 0.0), epsilon = 1e-12);
        // upward coefficient points away from the lumbar centre
        let p = RegressionParams {
            cervical_offset: [0.0, 0.5],
            ..RegressionParams::zero()
        };
        let cjc = cervical_joint_centre(&c7, &ij, &ljc, &p).unwrap();
        assert_relative_eq!(cjc, Point3::new(0.0, 1.16, 0.0), epsilon = 1e-12);
        assert!(cervical_joint_centre(&c7, &ij, &Point3::new(0.24, 1.1, 0.0), &p).is_err());
    }

    #[test]
    fn shoulder_rule() {
        let la = Point3::new(-0.2, 1.4, 0.0);
        let ra = Point3::new(0.2, 1.4, 0.0);
        let down = Vector3::new(0.0, -1.0, 0.0);
        let p = RegressionParams::zero();
        let (l, r) = shoulder_joint_centres(&la, &ra, &down, &p).unwrap();
        assert_relative_eq!(l, Point3::new(-0.2, 1.332, 0.0), epsilon = 1e-12);
        assert_relative_eq!(r, Point3::new(0.2, 1.332, 0.0), epsilon = 1e-12);

        let half = shoulder_joint_centres(&(la * 0.5), &(ra * 0.5), &down, &p).unwrap();
        assert_relative_eq!((half.0 - la * 0.5).norm(), 0.034, epsilon = 1e-12);

        let tiny = RegressionParams {
            shoulder_ratio: 1e-300,
            ..p
        };
        let (l, _) = shoulder_joint_centres(&la, &ra, &down, &tiny).unwrap();
        assert_eq!(l, la);

        assert!(shoulder_joint_centres(&la, &la, &down, &p).is_err());
        assert!(shoulder_joint_centres(&la, &ra, &(down * 2.0), &p).is_err());
    }

    #[test]
    fn regressions_are_rigidly_equivariant() {
        let (l, r, s) = pelvis();
        let p = *AnthropometricTable::dumas_2007().regression(Sex::Male);
        let motion = RigidTransform::new(
            Rotation3::from_euler_angles(0.3, 1.1, -0.7),
            Vector3::new(1.0, -0.5, 2.0),
        );
        let m = |x: &Point3| motion.transform_point(x);
        let ljc = lumbar_joint_centre(&l, &r, &s, &p).unwrap();
        let ljc_m = lumbar_joint_centre(&m(&l), &m(&r), &m(&s), &p).unwrap();
        assert!((m(&ljc) - ljc_m).norm() < 1e-9);
        let (hl, hr) = hip_joint_centres(&l, &r, &s, &p).unwrap();
        let (hlm, hrm) = hip_joint_centres(&m(&l), &m(&r), &m(&s), &p).unwrap();
        assert!((m(&hl) - hlm).norm() < 1e-9 && (m(&hr) - hrm).norm() < 1e-9);
        let c7 = Point3::new(0.05, 1.1, 0.0);
        let ij = Point3::new(0.17, 1.04, 0.0);
        let cjc = cervical_joint_centre(&c7, &ij, &ljc, &p).unwrap();
        let cjc_m = cervical_joint_centre(&m(&c7), &m(&ij), &ljc_m, &p).unwrap();
        assert!((m(&cjc) - cjc_m).norm() < 1e-9);
        let down = Vector3::new(0.0, -1.0, 0.0);
        let (sl, _) = shoulder_joint_centres(&c7, &ij, &down, &p).unwrap();
        let (slm, _) = shoulder_joint_centres(&m(&c7), &m(&ij), &motion.transform_vector(&down), &p).unwrap();
        assert!((m(&sl) - slm).norm() < 1e-9);
    }

    #[test]
    fn tracking_sources() {
        for s in SegmentId::ALL {
            let c = s.tracking_cluster();
            match s {
                SegmentId::Pelvis
                | SegmentId::LeftThigh
                | SegmentId::RightThigh
                | SegmentId::LeftShank
                | SegmentId::RightShank
                | SegmentId::LeftFoot
                | SegmentId::RightFoot => assert_eq!(c, WHEELCHAIR_CLUSTER),
                _ => assert_ne!(c, WHEELCHAIR_CLUSTER),
            }
        }
    }

    #[test]
    fn point_refs() {
        let r: PointRef = serde_json::from_str(r#"["A","B"]"#).unwrap();
        let p = r
            .resolve(|l| match l {
                "A" => Some(Point3::new(0.0, 0.0, 0.0)),
                "B" => Some(Point3::new(2.0, 0.0, 0.0)),
                _ => None,
            })
            .unwrap();
        assert_eq!(p, Point3::new(1.0, 0.0, 0.0));
        let r: PointRef = serde_json::from_str(r#""C""#).unwrap();
        assert!(matches!(r.resolve(|_| None), Err(Error::UnknownLabel(_))));
    }
}
