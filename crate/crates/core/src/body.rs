//! Calibrated 15-segment body model and per-frame whole-body centre of mass
//! in wheelchair coordinates.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{Matrix3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::anthropometry::{
    cervical_joint_centre, hip_joint_centres, lumbar_joint_centre, shoulder_joint_centres, AnthropometricTable,
    LcsRecipe, SegmentId, Sex,
};
use crate::cluster::{
    define_cluster, extend_cluster, register_pelvis_cloud, track_and_reconstruct, Frame, MarkerCluster, PelvisCloud,
};
use crate::error::{Error, Result};
use crate::geometry::{midpoint, Point3, RigidTransform};
use crate::landmarks::*;

/// Relative tolerance of the mass-conservation check.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subject {
    pub sex: Sex,
    pub total_mass_kg: f64,
}

impl Subject {
    pub fn new(sex: Sex, total_mass_kg: f64) -> Result<Self> {
        if !(total_mass_kg.is_finite() && total_mass_kg > 0.0) {
            return Err(Error::NonFiniteInput(format!("total mass {total_mass_kg} kg")));
        }
        Ok(Self { sex, total_mass_kg })
    }
}

/// Probed wheelchair geometry, in wheelchair-cluster local coordinates.
/// Contacts are ordered rear-left, rear-right, front-left, front-right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WheelchairGeometry {
    pub left_wheel_centre: Point3,
    pub right_wheel_centre: Point3,
    pub contacts: [Point3; 4],
}

impl WheelchairGeometry {
    pub fn new(left_wheel_centre: Point3, right_wheel_centre: Point3, contacts: [Point3; 4]) -> Result<Self> {
        let scale = (right_wheel_centre - left_wheel_centre).norm();
        if !(scale > 1e-9) {
            return Err(Error::DegenerateGeometry("rear wheel centres coincide".into()));
        }
        // largest triangle over the four contacts
        let mut area2: f64 = 0.0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                for k in (j + 1)..4 {
                    let a = contacts[j] - contacts[i];
                    let b = contacts[k] - contacts[i];
                    area2 = area2.max(a.cross(&b).norm());
                }
            }
        }
        if !(area2 > 1e-12 * scale * scale) {
            return Err(Error::DegenerateGeometry("wheel contacts are collinear".into()));
        }
        Ok(Self {
            left_wheel_centre,
            right_wheel_centre,
            contacts,
        })
    }
}

/// Wheelchair frame from the two rear-wheel centres: z left to right
/// (horizontal), y along `up`, x = y × z, origin under the wheel midpoint
/// on the plane `{p : p·up = ground}`.
fn wheel_frame(left: &Point3, right: &Point3, up: &Unit<Vector3<f64>>, ground: f64) -> Result<RigidTransform> {
    let lateral = right - left;
    let z = lateral - up.as_ref() * up.dot(&lateral);
    if !(z.norm() > 1e-9 * lateral.norm().max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateGeometry("rear wheel axis is vertical".into()));
    }
    let z = z.normalize();
    let y = up.into_inner();
    let x = y.cross(&z);
    let mid = nalgebra::center(left, right);
    let origin = mid - y * (mid.coords.dot(&y) - ground);
    RigidTransform::from_matrix(Matrix3::from_columns(&[x, y, z]), origin.coords)
}

/// Wheelchair frame in laboratory coordinates for a tracked wheelchair
/// pose: y is global up and the origin sits on the y = 0 ground plane.
pub fn wheelchair_lcs(geometry: &WheelchairGeometry, wheelchair_pose: &RigidTransform) -> Result<RigidTransform> {
    let l = wheelchair_pose.transform_point(&geometry.left_wheel_centre);
    let r = wheelchair_pose.transform_point(&geometry.right_wheel_centre);
    wheel_frame(&l, &r, &Vector3::y_axis(), 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDefinition {
    pub segment: SegmentId,
    pub recipe: LcsRecipe,
    pub tracking_source: String,
    /// Frozen in the neutral static trial.
    pub length_m: f64,
    pub mass_kg: f64,
    /// Centre of mass in the segment frame.
    pub local_com: Point3,
}

/// One centre-of-mass estimate in wheelchair coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComSample {
    pub time: f64,
    pub com: Point3,
    /// (AP, ML) = (x, z).
    pub ground_projection: [f64; 2],
}

impl ComSample {
    pub fn new(time: f64, com: Point3) -> Self {
        Self {
            time,
            com,
            ground_projection: [com.x, com.z],
        }
    }
}

/// A point digitized with the probe while its cluster was visible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbedPoint {
    pub label: String,
    pub cluster: String,
    /// Capture time used to pick the cluster pose.
    pub time: f64,
    pub position: Point3,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProbingCapture {
    pub frames: Vec<Frame>,
    pub points: Vec<ProbedPoint>,
}

/// Everything recorded during calibration except the pelvis cloud.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CalibrationRecordings {
    /// Cluster name to the labels of its physical markers.
    pub cluster_markers: BTreeMap<String, Vec<String>>,
    pub probing: Vec<ProbingCapture>,
    /// Neutral static trial.
    pub static_frames: Vec<Frame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedBody {
    subject: Subject,
    /// In `CLUSTERS` order.
    clusters: Vec<MarkerCluster>,
    /// In `SegmentId::ALL` order.
    segments: Vec<SegmentDefinition>,
    geometry: WheelchairGeometry,
    /// Wheelchair frame in wheelchair-cluster local coordinates.
    wheelchair_frame: RigidTransform,
}

impl CalibratedBody {
    pub fn subject(&self) -> &Subject {
        &self.subject
    }

    pub fn clusters(&self) -> &[MarkerCluster] {
        &self.clusters
    }

    pub fn cluster(&self, name: &str) -> Option<&MarkerCluster> {
        self.clusters.iter().find(|c| c.name() == name)
    }

    pub fn segments(&self) -> &[SegmentDefinition] {
        &self.segments
    }

    pub fn segment(&self, id: SegmentId) -> &SegmentDefinition {
        self.segments
            .iter()
            .find(|s| s.segment == id)
            .expect("all segments present")
    }

    pub fn geometry(&self) -> &WheelchairGeometry {
        &self.geometry
    }

    pub fn wheelchair_frame_local(&self) -> &RigidTransform {
        &self.wheelchair_frame
    }

    pub fn total_segment_mass(&self) -> f64 {
        self.segments.iter().map(|s| s.mass_kg).sum()
    }

    /// Wheel-ground contacts in the wheelchair frame.
    pub fn contacts_in_wheelchair_lcs(&self) -> [Point3; 4] {
        self.geometry
            .contacts
            .map(|c| self.wheelchair_frame.inverse_transform_point(&c))
    }

    /// Redistributes the subject mass proportionally to `weights`; used to
    /// isolate segments in tests and diagnostics.
    pub fn reweighted(&self, weights: impl Fn(SegmentId) -> f64) -> Result<Self> {
        let w: Vec<f64> = self.segments.iter().map(|s| weights(s.segment)).collect();
        let sum: f64 = w.iter().sum();
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || !(sum > 0.0) {
            return Err(Error::MassFractionOutOfRange("segment weights".into()));
        }
        let mut out = self.clone();
        for (s, wi) in out.segments.iter_mut().zip(&w) {
            s.mass_kg = self.subject.total_mass_kg * wi / sum;
        }
        Ok(out)
    }

    /// Global positions of every cluster marker and extended point plus the
    /// loose hand markers visible in `frame`.
    pub fn reconstruct(&self, frame: &Frame) -> Result<HashMap<String, Point3>> {
        reconstruct_all(&self.clusters, frame)
    }

    /// Pose of the wheelchair frame in `frame`.
    pub fn wheelchair_lcs_in(&self, frame: &Frame) -> Result<RigidTransform> {
        let chair = self.cluster(WHEELCHAIR_CLUSTER).expect("wheelchair cluster");
        let (pose, _) = chair.pose(frame).map_err(|e| Error::tracking(WHEELCHAIR_CLUSTER, e))?;
        Ok(pose * self.wheelchair_frame)
    }

    /// Segment centres of mass in global coordinates.
    pub fn segment_coms(&self, frame: &Frame) -> Result<Vec<(SegmentId, Point3)>> {
        let points = self.reconstruct(frame)?;
        self.segments
            .iter()
            .map(|s| {
                let (lcs, _) = s
                    .recipe
                    .evaluate(|l| points.get(l).copied())
                    .map_err(|e| segment_error(s.segment, e))?;
                Ok((s.segment, lcs.transform_point(&s.local_com)))
            })
            .collect()
    }
}

fn segment_error(segment: SegmentId, e: Error) -> Error {
    match e {
        Error::DegenerateAxis(m) => Error::DegenerateAxis(format!("{segment}: {m}")),
        Error::UnknownLabel(l) => Error::tracking(segment.name(), Error::MarkerNeverVisible(l)),
        e => e,
    }
}

fn reconstruct_all(clusters: &[MarkerCluster], frame: &Frame) -> Result<HashMap<String, Point3>> {
    let mut out = HashMap::new();
    for c in clusters {
        let tracked = track_and_reconstruct(c, frame).map_err(|e| Error::tracking(c.name(), e))?;
        out.extend(tracked.points.iter().map(|(l, p)| (l.to_string(), *p)));
    }
    for l in HAND_MARKERS {
        if let Some(p) = frame.markers.get(l) {
            out.insert(l.to_string(), *p);
        }
    }
    Ok(out)
}

/// Mass-weighted mean of point masses.
pub fn whole_body_com(masses: &[(f64, Point3)]) -> Result<Point3> {
    let total: f64 = masses.iter().map(|(m, _)| m).sum();
    if masses.is_empty() || !(total > 0.0) {
        return Err(Error::EmptyInput);
    }
    let weighted = masses.iter().fold(Vector3::zeros(), |acc, (m, c)| acc + c.coords * *m);
    Ok(Point3::from(weighted / total))
}

/// Whole-body centre of mass for one frame, in that frame's wheelchair
/// coordinates.
pub fn com_frame(body: &CalibratedBody, frame: &Frame) -> Result<ComSample> {
    let coms = body.segment_coms(frame)?;
    let masses: Vec<(f64, Point3)> = coms.iter().map(|(id, c)| (body.segment(*id).mass_kg, *c)).collect();
    debug_assert!(mass_conserved(body.total_segment_mass(), body.subject.total_mass_kg));
    let global = whole_body_com(&masses)?;
    let lcs = body.wheelchair_lcs_in(frame)?;
    Ok(ComSample::new(frame.time, lcs.inverse_transform_point(&global)))
}

/// Component-wise mean of the samples with `t0 <= time <= t1`, stamped at
/// the window midpoint.
pub fn average_static(samples: &[ComSample], window: (f64, f64)) -> Result<ComSample> {
    let (t0, t1) = window;
    let inside: Vec<&ComSample> = samples.iter().filter(|s| s.time >= t0 && s.time <= t1).collect();
    if inside.is_empty() {
        return Err(Error::EmptyWindow { t0, t1 });
    }
    let sum = inside.iter().fold(Vector3::zeros(), |acc, s| acc + s.com.coords);
    Ok(ComSample::new(0.5 * (t0 + t1), Point3::from(sum / inside.len() as f64)))
}

fn mass_conserved(sum: f64, total: f64) -> bool {
    (sum - total).abs() <= MASS_TOLERANCE * total
}

/// Cluster poses per static frame; frames where a cluster cannot be
/// tracked are skipped by the averaging helpers.
struct StaticPoses<'a> {
    frames: &'a [Frame],
    poses: Vec<BTreeMap<String, RigidTransform>>,
    first_error: BTreeMap<String, Error>,
}

impl<'a> StaticPoses<'a> {
    fn new(clusters: &BTreeMap<String, MarkerCluster>, frames: &'a [Frame]) -> Self {
        let mut first_error = BTreeMap::new();
        let poses = frames
            .iter()
            .map(|f| {
                let mut m = BTreeMap::new();
                for (name, c) in clusters {
                    match c.pose(f) {
                        Ok((p, _)) => {
                            m.insert(name.clone(), p);
                        }
                        Err(e) => {
                            first_error.entry(name.clone()).or_insert(e);
                        }
                    }
                }
                m
            })
            .collect();
        Self {
            frames,
            poses,
            first_error,
        }
    }

    fn missing(&mut self, cluster: &str) -> Error {
        let inner = self
            .first_error
            .remove(cluster)
            .unwrap_or_else(|| Error::MissingInput("neutral static trial".into()));
        Error::tracking(cluster, inner)
    }

    /// Averages, in `target` cluster coordinates, a point computed from
    /// the global positions available in each static frame.
    fn average_local(
        &mut self,
        clusters: &BTreeMap<String, MarkerCluster>,
        target: &str,
        sources: &[&str],
        compute: impl Fn(&dyn Fn(&str) -> Point3) -> Result<Point3>,
    ) -> Result<Point3> {
        let mut sum = Vector3::zeros();
        let mut n = 0usize;
        for k in 0..self.frames.len() {
            let poses = &self.poses[k];
            if !sources
                .iter()
                .chain(std::iter::once(&target))
                .all(|c| poses.contains_key(*c))
            {
                continue;
            }
            let global = |label: &str| -> Point3 {
                let (name, c) = clusters
                    .iter()
                    .find(|(_, c)| c.has_label(label))
                    .expect("source label checked by caller");
                poses[name].transform_point(c.local(label).expect("label present"))
            };
            let p = compute(&global)?;
            sum += poses[target].inverse_transform_point(&p).coords;
            n += 1;
        }
        if n == 0 {
            let bad = sources
                .iter()
                .chain(std::iter::once(&target))
                .find(|c| self.poses.iter().all(|p| !p.contains_key(**c)))
                .copied()
                .unwrap_or(target);
            return Err(self.missing(bad));
        }
        Ok(Point3::from(sum / n as f64))
    }
}

fn local_of(clusters: &BTreeMap<String, MarkerCluster>, cluster: &str, label: &str) -> Result<Point3> {
    clusters[cluster]
        .local(label)
        .copied()
        .ok_or_else(|| Error::MissingInput(format!("landmark {label} in cluster {cluster}")))
}

fn add_local(clusters: &mut BTreeMap<String, MarkerCluster>, cluster: &str, label: &str, local: Point3) -> Result<()> {
    if let Some(owner) = clusters.values().find(|c| c.has_label(label)) {
        return Err(Error::DuplicateLabel(format!("{label} (already in {})", owner.name())));
    }
    let c = clusters[cluster].with_local_point(label, local)?;
    clusters.insert(cluster.to_string(), c);
    Ok(())
}

fn nearest_frame(frames: &[Frame], time: f64) -> Option<&Frame> {
    frames
        .iter()
        .min_by(|a, b| (a.time - time).abs().total_cmp(&(b.time - time).abs()))
}

/// Runs the calibration steps in order and builds the segment model.
/// Errors are annotated with the step that raised them.
pub fn calibrate_body(
    recordings: &CalibrationRecordings,
    pelvis_cloud: Option<&PelvisCloud>,
    table: &AnthropometricTable,
    subject: Subject,
) -> Result<CalibratedBody> {
    let statics = &recordings.static_frames;
    if statics.is_empty() {
        return Err(Error::at_step(1, Error::MissingInput("neutral static trial".into())));
    }
    let regression = table.regression(subject.sex);

    // step 1: clusters from the static trial, then probed landmarks
    let mut clusters = BTreeMap::new();
    for name in CLUSTERS {
        let labels = recordings
            .cluster_markers
            .get(name)
            .ok_or_else(|| Error::at_step(1, Error::MissingInput(format!("cluster {name}"))))?;
        let c = define_cluster(name, labels, statics).map_err(|e| Error::at_step(1, Error::tracking(name, e)))?;
        clusters.insert(name.to_string(), c);
    }
    for capture in &recordings.probing {
        for p in &capture.points {
            let step1 = |e| Error::at_step(1, e);
            let cluster = clusters
                .get(&p.cluster)
                .ok_or_else(|| step1(Error::UnknownLabel(format!("cluster {}", p.cluster))))?;
            if let Some(owner) = clusters.values().find(|c| c.has_label(&p.label)) {
                return Err(step1(Error::DuplicateLabel(format!(
                    "{} (already in {})",
                    p.label,
                    owner.name()
                ))));
            }
            let frame = nearest_frame(&capture.frames, p.time)
                .ok_or_else(|| step1(Error::MissingInput(format!("capture frames for {}", p.label))))?;
            let extended = extend_cluster(cluster, &p.label, &p.position, frame).map_err(step1)?;
            clusters.insert(p.cluster.clone(), extended);
        }
    }
    for (label, cluster) in PROBED_POINTS {
        local_of(&clusters, cluster, label).map_err(|e| Error::at_step(1, e))?;
    }
    let chair = |l: &str| local_of(&clusters, WHEELCHAIR_CLUSTER, l);
    let geometry = (|| {
        let contacts = [
            chair(CONTACT_REAR_LEFT)?,
            chair(CONTACT_REAR_RIGHT)?,
            chair(CONTACT_FRONT_LEFT)?,
            chair(CONTACT_FRONT_RIGHT)?,
        ];
        WheelchairGeometry::new(chair(LEFT_WHEEL_CENTRE)?, chair(RIGHT_WHEEL_CENTRE)?, contacts)
    })()
    .map_err(|e| Error::at_step(1, e))?;

    // step 2: posterior spines from the pelvis cloud, in wheelchair coordinates
    let (lasis, rasis, sym) = (chair(LASIS).unwrap(), chair(RASIS).unwrap(), chair(SYM).unwrap());
    let step2 = |e| Error::at_step(2, e);
    let cloud = pelvis_cloud.ok_or_else(|| step2(Error::MissingInput("pelvis cloud capture".into())))?;
    let reg = register_pelvis_cloud(cloud, &lasis, &rasis, &sym).map_err(step2)?;
    add_local(&mut clusters, WHEELCHAIR_CLUSTER, LPSIS, reg.lpsis).map_err(step2)?;
    add_local(&mut clusters, WHEELCHAIR_CLUSTER, RPSIS, reg.rpsis).map_err(step2)?;

    // step 3: lumbar and hip centres, also wheelchair-bound
    let step3 = |e| Error::at_step(3, e);
    let ljc = lumbar_joint_centre(&lasis, &rasis, &sym, regression).map_err(step3)?;
    let (lhjc, rhjc) = hip_joint_centres(&lasis, &rasis, &sym, regression).map_err(step3)?;
    for (l, p) in [(LJC, ljc), (LHJC, lhjc), (RHJC, rhjc)] {
        add_local(&mut clusters, WHEELCHAIR_CLUSTER, l, p).map_err(step3)?;
    }

    let mut poses = StaticPoses::new(&clusters, statics);

    // step 4: cervical centre into the thorax cluster
    let cjc = poses
        .average_local(&clusters, THORAX_CLUSTER, &[WHEELCHAIR_CLUSTER], |g| {
            cervical_joint_centre(&g(C7), &g(IJ), &g(LJC), regression)
        })
        .map_err(|e| Error::at_step(4, e))?;
    add_local(&mut clusters, THORAX_CLUSTER, CJC, cjc).map_err(|e| Error::at_step(4, e))?;

    // step 5: shoulder centres below the acromions, into the upper arms
    let down = -Vector3::y();
    for (target, left) in [(LEFT_UPPER_ARM_CLUSTER, true), (RIGHT_UPPER_ARM_CLUSTER, false)] {
        let step5 = |e| Error::at_step(5, e);
        let sjc = poses
            .average_local(&clusters, target, &[THORAX_CLUSTER], |g| {
                let (l, r) = shoulder_joint_centres(&g(LAC), &g(RAC), &down, regression)?;
                Ok(if left { l } else { r })
            })
            .map_err(step5)?;
        add_local(&mut clusters, target, if left { LSJC } else { RSJC }, sjc).map_err(step5)?;
    }

    // step 6: epicondyle, styloid and malleolus midpoints
    let step6 = |e| Error::at_step(6, e);
    for (cluster, label, a, b) in [
        (LEFT_UPPER_ARM_CLUSTER, LEJC, LHLE, LHME),
        (RIGHT_UPPER_ARM_CLUSTER, REJC, RHLE, RHME),
        (LEFT_FOREARM_CLUSTER, LWJC, LUS, LRS),
        (RIGHT_FOREARM_CLUSTER, RWJC, RUS, RRS),
        (WHEELCHAIR_CLUSTER, LKJC, LFLE, LFME),
        (WHEELCHAIR_CLUSTER, RKJC, RFLE, RFME),
        (WHEELCHAIR_CLUSTER, LAJC, LLM, LMM),
        (WHEELCHAIR_CLUSTER, RAJC, RLM, RMM),
    ] {
        let (pa, pb) = (local_of(&clusters, cluster, a), local_of(&clusters, cluster, b));
        let m = midpoint(&pa.map_err(step6)?, &pb.map_err(step6)?).map_err(step6)?;
        add_local(&mut clusters, cluster, label, m).map_err(step6)?;
    }

    let clusters: Vec<MarkerCluster> = CLUSTERS.iter().map(|n| clusters[*n].clone()).collect();
    let wheelchair_frame = static_wheelchair_frame(&clusters[CLUSTERS.len() - 1], &geometry, statics).map_err(step6)?;
    let segments = build_segments(&clusters, table, subject, statics).map_err(step6)?;

    let body = CalibratedBody {
        subject,
        clusters,
        segments,
        geometry,
        wheelchair_frame,
    };
    debug_assert!(mass_conserved(body.total_segment_mass(), subject.total_mass_kg));
    Ok(body)
}

/// Wheelchair frame in cluster coordinates, with vertical and ground
/// height averaged over the static trial.
fn static_wheelchair_frame(
    chair: &MarkerCluster,
    geometry: &WheelchairGeometry,
    statics: &[Frame],
) -> Result<RigidTransform> {
    let mut up = Vector3::zeros();
    let mut ground = 0.0;
    let mut n = 0usize;
    let mut first_err = None;
    for f in statics {
        match chair.pose(f) {
            Ok((pose, _)) => {
                up += pose.rotation().inverse() * Vector3::y();
                ground -= pose.translation().y;
                n += 1;
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if n == 0 {
        let e = first_err.unwrap_or_else(|| Error::MissingInput("neutral static trial".into()));
        return Err(Error::tracking(WHEELCHAIR_CLUSTER, e));
    }
    let up = Unit::new_normalize(up);
    wheel_frame(
        &geometry.left_wheel_centre,
        &geometry.right_wheel_centre,
        &up,
        ground / n as f64,
    )
}

fn build_segments(
    clusters: &[MarkerCluster],
    table: &AnthropometricTable,
    subject: Subject,
    statics: &[Frame],
) -> Result<Vec<SegmentDefinition>> {
    for entry in table.segments() {
        for label in entry.lcs.labels() {
            let owners = clusters.iter().filter(|c| c.has_label(label)).count();
            let loose = HAND_MARKERS.contains(&label);
            if owners + usize::from(loose) != 1 {
                return Err(Error::UnknownLabel(format!(
                    "{label} (used by {}) is held by {owners} clusters",
                    entry.segment
                )));
            }
        }
    }

    let mut lengths: BTreeMap<SegmentId, (f64, usize)> = BTreeMap::new();
    let mut first_err = None;
    for f in statics {
        let points = match reconstruct_all(clusters, f) {
            Ok(p) => p,
            Err(e) => {
                first_err.get_or_insert(e);
                continue;
            }
        };
        for entry in table.segments() {
            match entry.lcs.evaluate(|l| points.get(l).copied()) {
                Ok((_, len)) => {
                    let acc = lengths.entry(entry.segment).or_insert((0.0, 0));
                    acc.0 += len;
                    acc.1 += 1;
                }
                Err(e) => {
                    first_err.get_or_insert(segment_error(entry.segment, e));
                }
            }
        }
    }

    let fraction_sum = table.mass_fraction_sum(subject.sex);
    SegmentId::ALL
        .iter()
        .map(|&id| {
            let entry = table.segment(id);
            let (sum, n) = match lengths.get(&id) {
                Some(&acc) if acc.1 > 0 => acc,
                _ => {
                    return Err(first_err.take().unwrap_or_else(|| {
                        Error::MissingInput(format!("{id} never reconstructed in the static trial"))
                    }))
                }
            };
            let length = sum / n as f64;
            let params = entry.params(subject.sex);
            Ok(SegmentDefinition {
                segment: id,
                recipe: entry.lcs.clone(),
                tracking_source: id.tracking_cluster().to_string(),
                length_m: length,
                mass_kg: subject.total_mass_kg * params.mass_fraction / fraction_sum,
                local_com: Point3::from(Vector3::from(params.com_ratios) * length),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Rotation3;

    fn geometry() -> WheelchairGeometry {
        WheelchairGeometry::new(
            Point3::new(0.0, 0.3, -0.28),
            Point3::new(0.0, 0.3, 0.28),
            [
                Point3::new(0.0, 0.0, -0.28),
                Point3::new(0.0, 0.0, 0.28),
                Point3::new(0.45, 0.0, -0.22),
                Point3::new(0.45, 0.0, 0.22),
            ],
        )
        .unwrap()
    }

    #[test]
    fn lcs_canonical() {
        let lcs = wheelchair_lcs(&geometry(), &RigidTransform::identity()).unwrap();
        assert_relative_eq!(lcs.origin(), Point3::origin(), epsilon = 1e-15);
        assert_relative_eq!(lcs.matrix(), &Matrix3::identity(), epsilon = 1e-15);
    }

    #[test]
    fn lcs_yaw_and_translation() {
        let g = geometry();
        let yaw = Rotation3::from_axis_angle(&Vector3::y_axis(), std::f64::consts::FRAC_PI_2);
        let t = Vector3::new(1.5, 0.0, -2.0);
        let lcs = wheelchair_lcs(&g, &RigidTransform::new(yaw, t)).unwrap();
        assert_relative_eq!(lcs.matrix(), yaw.matrix(), epsilon = 1e-15);
        assert_relative_eq!(lcs.origin(), Point3::from(t), epsilon = 1e-15);

        let shifted = wheelchair_lcs(&g, &RigidTransform::from_translation(t)).unwrap();
        assert_relative_eq!(shifted.matrix(), &Matrix3::identity(), epsilon = 1e-15);
        assert_relative_eq!(shifted.origin(), Point3::from(t), epsilon = 1e-15);
    }

    #[test]
    fn lcs_ignores_lift_and_tilt_of_axle() {
        let g = geometry();
        // raised chair: origin still on the ground
        let lcs = wheelchair_lcs(&g, &RigidTransform::from_translation(Vector3::new(0.0, 0.2, 0.0))).unwrap();
        assert_relative_eq!(lcs.origin(), Point3::origin(), epsilon = 1e-15);
        // roll: z stays horizontal, y stays up
        let roll = Rotation3::from_axis_angle(&Vector3::x_axis(), 0.1);
        let lcs = wheelchair_lcs(&g, &RigidTransform::new(roll, Vector3::zeros())).unwrap();
        assert_relative_eq!(lcs.axis(1), Vector3::y(), epsilon = 1e-15);
        assert!(lcs.axis(2).y.abs() < 1e-15);
    }

    #[test]
    fn geometry_validation() {
        let c = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(0.1, 0.0, 0.0),
            Point3::new(0.2, 0.0, 0.0),
            Point3::new(0.3, 0.0, 0.0),
        ];
        let err = WheelchairGeometry::new(Point3::new(0.0, 0.3, -0.3), Point3::new(0.0, 0.3, 0.3), c);
        assert!(matches!(err, Err(Error::DegenerateGeometry(_))));
        let p = Point3::new(0.0, 0.3, 0.0);
        assert!(WheelchairGeometry::new(p, p, geometry().contacts).is_err());
    }

    #[test]
    fn weighted_com() {
        let two = [(1.0, Point3::new(0.1, 0.5, 0.0)), (1.0, Point3::new(0.3, 0.5, 0.0))];
        assert_relative_eq!(
            whole_body_com(&two).unwrap(),
            Point3::new(0.2, 0.5, 0.0),
            epsilon = 1e-15
        );
        let single = [(0.0, Point3::new(9.0, 9.0, 9.0)), (75.0, Point3::new(0.1, 0.6, -0.02))];
        assert_eq!(whole_body_com(&single).unwrap(), Point3::new(0.1, 0.6, -0.02));
        assert!(matches!(whole_body_com(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn ground_projection_drops_height() {
        let s = ComSample::new(0.0, Point3::new(0.12, 0.55, -0.03));
        assert_eq!(s.ground_projection, [0.12, -0.03]);
    }

    #[test]
    fn static_average() {
        let c = Point3::new(0.2, 0.5, 0.01);
        let constant: Vec<ComSample> = (0..5).map(|i| ComSample::new(i as f64 * 0.1, c)).collect();
        assert_relative_eq!(average_static(&constant, (0.0, 1.0)).unwrap().com, c, epsilon = 1e-15);

        let two = [
            ComSample::new(0.0, Point3::new(0.1, 0.5, 0.0)),
            ComSample::new(1.0, Point3::new(0.3, 0.5, 0.2)),
        ];
        let avg = average_static(&two, (0.0, 1.0)).unwrap();
        assert_relative_eq!(avg.ground_projection[0], 0.2, epsilon = 1e-15);
        assert_relative_eq!(avg.ground_projection[1], 0.1, epsilon = 1e-15);
        assert_eq!(avg.time, 0.5);

        // 240 samples at 120 Hz covering 4 whole periods of a 2 Hz sine
        let offset = 0.173;
        let sine: Vec<ComSample> = (0..240)
            .map(|i| {
                let t = i as f64 / 120.0;
                let v = offset + 0.05 * (2.0 * std::f64::consts::PI * 2.0 * t).sin();
                ComSample::new(t, Point3::new(v, 0.5, 0.0))
            })
            .collect();
        let avg = average_static(&sine, (0.0, 2.0)).unwrap();
        assert!((avg.com.x - offset).abs() < 1e-9);

        assert!(matches!(
            average_static(&two, (2.0, 3.0)),
            Err(Error::EmptyWindow { .. })
        ));
    }
}
