//! Rigid marker clusters: definition from static frames, extension with
//! probed or computed points, per-frame tracking, and the five-point pelvis
//! cloud registration.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{is_finite, rigid_fit, LabelledPointSet, Point3, RigidTransform};
use crate::landmarks::{LASIS, LPSIS, RASIS, RPSIS, SYM};

/// One motion-capture sample: global marker positions at `time` (seconds).
/// Occluded markers are simply absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub time: f64,
    pub markers: LabelledPointSet,
}

impl Frame {
    pub fn new(time: f64, markers: LabelledPointSet) -> Result<Self> {
        if !time.is_finite() || time < 0.0 {
            return Err(Error::NonFiniteInput(format!("frame time {time}")));
        }
        Ok(Self { time, markers })
    }
}

/// A rigid set of markers plus virtual points, all in cluster-local
/// coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerCluster {
    name: String,
    markers: LabelledPointSet,
    extended_points: LabelledPointSet,
}

impl MarkerCluster {
    pub fn from_local(
        name: impl Into<String>,
        markers: LabelledPointSet,
        extended_points: LabelledPointSet,
    ) -> Result<Self> {
        let name = name.into();
        if markers.len() < 3 {
            return Err(Error::DegenerateGeometry(format!(
                "cluster {name} has {} markers, needs 3",
                markers.len()
            )));
        }
        rigid_fit(&markers, &markers)?;
        if let Some(dup) = extended_points.labels().find(|l| markers.contains(l)) {
            return Err(Error::DuplicateLabel(dup.to_string()));
        }
        Ok(Self {
            name,
            markers,
            extended_points,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn markers(&self) -> &LabelledPointSet {
        &self.markers
    }

    pub fn extended_points(&self) -> &LabelledPointSet {
        &self.extended_points
    }

    /// Local coordinates of a marker or extended point.
    pub fn local(&self, label: &str) -> Option<&Point3> {
        self.markers.get(label).or_else(|| self.extended_points.get(label))
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.local(label).is_some()
    }

    /// Adds a point already expressed in cluster-local coordinates.
    pub fn with_local_point(&self, label: impl Into<String>, local: Point3) -> Result<Self> {
        let label = label.into();
        if !is_finite(&local) {
            return Err(Error::NonFiniteInput(format!("extended point {label}")));
        }
        if self.markers.contains(&label) {
            return Err(Error::DuplicateLabel(label));
        }
        let mut out = self.clone();
        out.extended_points.insert(label, local)?;
        Ok(out)
    }

    /// Pose of the cluster in `frame` (local -> global).
    pub fn pose(&self, frame: &Frame) -> Result<(RigidTransform, f64)> {
        let fit = rigid_fit(&self.markers, &frame.markers)?;
        Ok((fit.transform, fit.rms_residual))
    }
}

/// Result of tracking one cluster in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedCluster {
    pub pose: RigidTransform,
    /// Every marker and extended point, in global coordinates.
    pub points: LabelledPointSet,
    pub rms_residual: f64,
}

/// Establishes the local geometry of a cluster from static frames.
///
/// Each frame is registered onto a running template so that moving
/// clusters still average correctly. The resulting local frame has the
/// centroid at the origin and axes along the principal directions of the
/// marker spread.
pub fn define_cluster<S: AsRef<str>>(
    name: &str,
    marker_labels: &[S],
    static_frames: &[Frame],
) -> Result<MarkerCluster> {
    let labels: Vec<&str> = marker_labels.iter().map(|s| s.as_ref()).collect();
    for l in &labels {
        if !static_frames.iter().any(|f| f.markers.contains(l)) {
            return Err(Error::MarkerNeverVisible(l.to_string()));
        }
    }
    let subset = |f: &Frame| f.markers.filtered(|l| labels.contains(&l));

    let reference =
        static_frames.iter().map(subset).fold(
            LabelledPointSet::new(),
            |best, s| {
                if s.len() > best.len() {
                    s
                } else {
                    best
                }
            },
        );
    if reference.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "cluster {name}: no static frame shows 3 of its markers"
        )));
    }

    let mut template = reference;
    for _ in 0..2 {
        let mut sums: Vec<(Vector3<f64>, usize)> = vec![(Vector3::zeros(), 0); labels.len()];
        for frame in static_frames {
            let seen = subset(frame);
            let fit = match rigid_fit(&seen, &template) {
                Ok(fit) => fit,
                Err(Error::FewerThanThreeCommonLabels { .. }) => continue,
                Err(e) => return Err(e),
            };
            for (label, p) in seen.iter() {
                let i = labels.iter().position(|l| *l == label).unwrap();
                sums[i].0 += fit.transform.transform_point(p).coords;
                sums[i].1 += 1;
            }
        }
        template = labels
            .iter()
            .zip(&sums)
            .filter(|(_, (_, n))| *n > 0)
            .map(|(l, (s, n))| (l.to_string(), Point3::from(s / *n as f64)))
            .collect();
    }
    if let Some(missing) = labels.iter().find(|l| !template.contains(l)) {
        return Err(Error::DegenerateGeometry(format!(
            "cluster {name}: marker {missing} never seen together with 3 other markers"
        )));
    }

    let canonical = canonical_frame(&template)?;
    let local = template.map_points(|p| canonical.inverse_transform_point(p));
    MarkerCluster::from_local(name, local, LabelledPointSet::new())
}

/// Centroid origin, principal axes by decreasing spread, sign fixed by the
/// first marker with a clear projection.
fn canonical_frame(points: &LabelledPointSet) -> Result<RigidTransform> {
    let c = points.centroid().ok_or(Error::EmptyInput)?;
    let mut scatter = Matrix3::zeros();
    for (_, p) in points.iter() {
        let d = p - c;
        scatter += d * d.transpose();
    }
    let eig = scatter.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let spread = eig.eigenvalues[order[0]].max(0.0).sqrt();
    if spread <= 0.0 {
        return Err(Error::DegenerateGeometry("coincident cluster markers".into()));
    }
    let mut axes: Vec<Vector3<f64>> = order[..2]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    for axis in axes.iter_mut() {
        let first = points
            .iter()
            .map(|(_, p)| (p - c).dot(axis))
            .find(|v| v.abs() > 1e-9 * spread);
        if matches!(first, Some(v) if v < 0.0) {
            *axis = -*axis;
        }
    }
    let third = axes[0].cross(&axes[1]);
    let m = Matrix3::from_columns(&[axes[0], axes[1], third]);
    RigidTransform::from_matrix(m, c.coords)
}

/// Adds `global_point` to the cluster, expressed in local coordinates via
/// the cluster pose in `reference_frame`.
pub fn extend_cluster(
    cluster: &MarkerCluster,
    label: &str,
    global_point: &Point3,
    reference_frame: &Frame,
) -> Result<MarkerCluster> {
    if cluster.has_label(label) {
        return Err(Error::DuplicateLabel(label.to_string()));
    }
    let (pose, _) = cluster
        .pose(reference_frame)
        .map_err(|e| Error::tracking(cluster.name(), e))?;
    cluster.with_local_point(label, pose.inverse_transform_point(global_point))
}

/// Tracks the cluster in `frame` and maps all its points to global
/// coordinates.
pub fn track_and_reconstruct(cluster: &MarkerCluster, frame: &Frame) -> Result<TrackedCluster> {
    let (pose, rms_residual) = cluster.pose(frame)?;
    let points = cluster
        .markers
        .iter()
        .chain(cluster.extended_points.iter())
        .map(|(l, p)| (l.to_string(), pose.transform_point(p)))
        .collect();
    Ok(TrackedCluster {
        pose,
        points,
        rms_residual,
    })
}

/// The five pelvic landmarks probed while the subject sits on the fore part
/// of the seat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PelvisCloud {
    pub lasis: Point3,
    pub rasis: Point3,
    pub sym: Point3,
    pub lpsis: Point3,
    pub rpsis: Point3,
}

impl PelvisCloud {
    pub fn new(lasis: Point3, rasis: Point3, sym: Point3, lpsis: Point3, rpsis: Point3) -> Result<Self> {
        let cloud = Self {
            lasis,
            rasis,
            sym,
            lpsis,
            rpsis,
        };
        if !cloud.as_set().iter().all(|(_, p)| is_finite(p)) {
            return Err(Error::NonFiniteInput("pelvis cloud".into()));
        }
        rigid_fit(&cloud.anterior(), &cloud.anterior())?;
        Ok(cloud)
    }

    /// Requires exactly the five pelvis labels.
    pub fn from_set(set: &LabelledPointSet) -> Result<Self> {
        let get = |l: &str| {
            set.get(l)
                .copied()
                .ok_or_else(|| Error::MalformedDocument(format!("pelvis cloud lacks {l}")))
        };
        if set.len() != 5 {
            return Err(Error::MalformedDocument(format!(
                "pelvis cloud must hold exactly 5 points, found {}",
                set.len()
            )));
        }
        Self::new(get(LASIS)?, get(RASIS)?, get(SYM)?, get(LPSIS)?, get(RPSIS)?)
    }

    pub fn as_set(&self) -> LabelledPointSet {
        [
            (LASIS, self.lasis),
            (RASIS, self.rasis),
            (SYM, self.sym),
            (LPSIS, self.lpsis),
            (RPSIS, self.rpsis),
        ]
        .into_iter()
        .map(|(l, p)| (l.to_string(), p))
        .collect()
    }

    fn anterior(&self) -> LabelledPointSet {
        anterior_set(&self.lasis, &self.rasis, &self.sym)
    }
}

fn anterior_set(lasis: &Point3, rasis: &Point3, sym: &Point3) -> LabelledPointSet {
    [(LASIS, *lasis), (RASIS, *rasis), (SYM, *sym)]
        .into_iter()
        .map(|(l, p)| (l.to_string(), p))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PelvisRegistration {
    pub lpsis: Point3,
    pub rpsis: Point3,
    /// Residual of the three-point anterior fit; nonzero values flag
    /// inconsistent probing.
    pub rms_residual: f64,
}

/// Carries the cloud's posterior spines onto the observed anterior triplet.
pub fn register_pelvis_cloud(
    cloud: &PelvisCloud,
    observed_lasis: &Point3,
    observed_rasis: &Point3,
    observed_sym: &Point3,
) -> Result<PelvisRegistration> {
    let observed = anterior_set(observed_lasis, observed_rasis, observed_sym);
    let fit = rigid_fit(&cloud.anterior(), &observed)?;
    Ok(PelvisRegistration {
        lpsis: fit.transform.transform_point(&cloud.lpsis),
        rpsis: fit.transform.transform_point(&cloud.rpsis),
        rms_residual: fit.rms_residual,
    })
}
