//! Points, rigid transforms, least-squares rigid registration and
//! local-coordinate-system construction.
//!
//! Axis convention everywhere in the crate: x forward, y up, z right.
//! Lengths are metres.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = nalgebra::Point3<f64>;

/// Relative threshold on the second singular value below which a point set
/// is treated as collinear.
pub const COLLINEARITY_TOLERANCE: f64 = 1e-12;

/// Smallest angle between the primary axis and the plane vector accepted by
/// [`build_lcs`], in radians.
pub const MIN_PLANE_ANGLE: f64 = 1e-6;

pub fn is_finite(p: &Point3) -> bool {
    p.coords.iter().all(|c| c.is_finite())
}

/// Component-wise mean of two points.
pub fn midpoint(a: &Point3, b: &Point3) -> Result<Point3> {
    if !is_finite(a) || !is_finite(b) {
        return Err(Error::NonFiniteInput("midpoint operand".into()));
    }
    Ok(Point3::from((a.coords + b.coords) * 0.5))
}

/// Proper rigid motion `p -> R p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "TransformRepr", try_from = "TransformRepr")]
pub struct RigidTransform {
    rotation: Rotation3<f64>,
    translation: Vector3<f64>,
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Rotation3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Rotation3<f64>, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self::new(Rotation3::identity(), translation)
    }

    /// Builds a transform from a raw matrix, checking orthonormality and
    /// determinant +1 within 1e-9.
    pub fn from_matrix(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !rotation.iter().chain(translation.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFiniteInput("rigid transform".into()));
        }
        let orth = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        let det = rotation.determinant();
        if orth > 1e-9 || (det - 1.0).abs() > 1e-9 {
            return Err(Error::DegenerateGeometry(format!(
                "rotation is not proper orthonormal (orthogonality error {orth:e}, det {det})"
            )));
        }
        Ok(Self::new(Rotation3::from_matrix_unchecked(rotation), translation))
    }

    pub fn rotation(&self) -> &Rotation3<f64> {
        &self.rotation
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        self.rotation.matrix()
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn origin(&self) -> Point3 {
        Point3::from(self.translation)
    }

    /// Unit vector of local axis `index` (0 = x, 1 = y, 2 = z) in the parent frame.
    pub fn axis(&self, index: usize) -> Vector3<f64> {
        self.rotation.matrix().column(index).into_owned()
    }

    pub fn transform_point(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn transform_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// Maps a parent-frame point back into this transform's local frame.
    pub fn inverse_transform_point(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation.inverse() * (p.coords - self.translation))
    }

    pub fn inverse(&self) -> Self {
        let rinv = self.rotation.inverse();
        Self::new(rinv, -(rinv * self.translation))
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> Self {
        Self::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl std::ops::Mul for RigidTransform {
    type Output = RigidTransform;

    fn mul(self, rhs: RigidTransform) -> RigidTransform {
        self.compose(&rhs)
    }
}

#[derive(Serialize, Deserialize)]
struct TransformRepr {
    /// Row-major.
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

impl From<RigidTransform> for TransformRepr {
    fn from(t: RigidTransform) -> Self {
        let m = t.matrix();
        let mut rotation = [[0.0; 3]; 3];
        for (r, row) in rotation.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = m[(r, c)];
            }
        }
        Self {
            rotation,
            translation: [t.translation.x, t.translation.y, t.translation.z],
        }
    }
}

impl TryFrom<TransformRepr> for RigidTransform {
    type Error = Error;

    fn try_from(r: TransformRepr) -> Result<Self> {
        let m = Matrix3::from_fn(|i, j| r.rotation[i][j]);
        RigidTransform::from_matrix(m, Vector3::from(r.translation))
    }
}

/// Geodesic angle between two rotations, in radians.
pub fn rotation_angle_between(a: &Rotation3<f64>, b: &Rotation3<f64>) -> f64 {
    let rel = a.inverse() * b;
    let cos = ((rel.matrix().trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    // acos loses precision near zero; use the skew part there
    let skew = rel.matrix() - rel.matrix().transpose();
    let sin = 0.5 * Vector3::new(skew[(2, 1)], skew[(0, 2)], skew[(1, 0)]).norm();
    sin.atan2(cos)
}

/// Ordered labelled points with unique labels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelledPointSet {
    points: Vec<(String, Point3)>,
}

impl LabelledPointSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points<I, S>(points: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Point3)>,
        S: Into<String>,
    {
        let mut set = Self::new();
        for (label, p) in points {
            set.insert(label, p)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, label: impl Into<String>, point: Point3) -> Result<()> {
        let label = label.into();
        if self.contains(&label) {
            return Err(Error::DuplicateLabel(label));
        }
        self.points.push((label, point));
        Ok(())
    }

    pub fn get(&self, label: &str) -> Option<&Point3> {
        self.points.iter().find(|(l, _)| l == label).map(|(_, p)| p)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.points.iter().any(|(l, _)| l == label)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Point3)> {
        self.points.iter().map(|(l, p)| (l.as_str(), p))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.points.iter().map(|(l, _)| l.as_str())
    }

    pub fn map_points(&self, f: impl Fn(&Point3) -> Point3) -> Self {
        Self {
            points: self.points.iter().map(|(l, p)| (l.clone(), f(p))).collect(),
        }
    }

    /// Keeps only the labels accepted by `keep`.
    pub fn filtered(&self, keep: impl Fn(&str) -> bool) -> Self {
        Self {
            points: self.points.iter().filter(|(l, _)| keep(l)).cloned().collect(),
        }
    }

    pub fn centroid(&self) -> Option<Point3> {
        if self.points.is_empty() {
            return None;
        }
        let sum = self.points.iter().fold(Vector3::zeros(), |acc, (_, p)| acc + p.coords);
        Some(Point3::from(sum / self.points.len() as f64))
    }
}

impl FromIterator<(String, Point3)> for LabelledPointSet {
    /// Later duplicates are dropped.
    fn from_iter<T: IntoIterator<Item = (String, Point3)>>(iter: T) -> Self {
        let mut set = Self::new();
        for (l, p) in iter {
            let _ = set.insert(l, p);
        }
        set
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidFit {
    pub transform: RigidTransform,
    /// Root-mean-square distance between transformed source and target points.
    pub rms_residual: f64,
    pub n_points: usize,
}

/// Least-squares proper rigid transform mapping `source` onto `target`,
/// matched by label.
pub fn rigid_fit(source: &LabelledPointSet, target: &LabelledPointSet) -> Result<RigidFit> {
    let pairs: Vec<(Point3, Point3)> = source
        .iter()
        .filter_map(|(label, s)| target.get(label).map(|t| (*s, *t)))
        .collect();
    rigid_fit_pairs(&pairs)
}

/// [`rigid_fit`] on already-matched `(source, target)` pairs.
pub fn rigid_fit_pairs(pairs: &[(Point3, Point3)]) -> Result<RigidFit> {
    let n = pairs.len();
    if n < 3 {
        return Err(Error::FewerThanThreeCommonLabels { found: n });
    }
    if pairs.iter().any(|(s, t)| !is_finite(s) || !is_finite(t)) {
        return Err(Error::NonFiniteInput("rigid fit point".into()));
    }

    let inv_n = 1.0 / n as f64;
    let cs = pairs.iter().fold(Vector3::zeros(), |a, (s, _)| a + s.coords) * inv_n;
    let ct = pairs.iter().fold(Vector3::zeros(), |a, (_, t)| a + t.coords) * inv_n;

    let mut scatter = Matrix3::zeros();
    let mut cross = Matrix3::zeros();
    for (s, t) in pairs {
        let ds = s.coords - cs;
        let dt = t.coords - ct;
        scatter += ds * ds.transpose();
        cross += ds * dt.transpose();
    }

    check_spread(&scatter, "source points")?;

    let svd = cross.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::DegenerateGeometry("SVD did not converge".into())),
    };
    let sv = svd.singular_values;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    if !(sv[order[0]] > 0.0) || sv[order[1]] < COLLINEARITY_TOLERANCE * sv[order[0]] {
        return Err(Error::DegenerateGeometry(
            "cross-covariance has rank below 2 (collinear or coincident points)".into(),
        ));
    }

    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let mut diag = Vector3::repeat(1.0);
    diag[order[2]] = d;
    let r = v * Matrix3::from_diagonal(&diag) * u.transpose();
    let rotation = Rotation3::from_matrix_unchecked(r);
    let translation = ct - rotation * cs;
    let transform = RigidTransform::new(rotation, translation);

    let ssr: f64 = pairs
        .iter()
        .map(|(s, t)| (transform.transform_point(s) - t).norm_squared())
        .sum();
    Ok(RigidFit {
        transform,
        rms_residual: (ssr * inv_n).sqrt(),
        n_points: n,
    })
}

/// Fails when the centred scatter matrix is (numerically) rank < 2.
fn check_spread(scatter: &Matrix3<f64>, what: &str) -> Result<()> {
    let mut eig: Vec<f64> = scatter
        .symmetric_eigenvalues()
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    if eig[0] <= f64::MIN_POSITIVE || eig[1] < COLLINEARITY_TOLERANCE * eig[0] {
        return Err(Error::DegenerateGeometry(format!("{what} are collinear or coincident")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// A body axis with a direction sign, written `+x`, `-y`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignedAxis {
    pub axis: Axis,
    pub negative: bool,
}

impl SignedAxis {
    pub const X: SignedAxis = SignedAxis::pos(Axis::X);
    pub const Y: SignedAxis = SignedAxis::pos(Axis::Y);
    pub const Z: SignedAxis = SignedAxis::pos(Axis::Z);
    pub const NEG_X: SignedAxis = SignedAxis::neg(Axis::X);
    pub const NEG_Y: SignedAxis = SignedAxis::neg(Axis::Y);
    pub const NEG_Z: SignedAxis = SignedAxis::neg(Axis::Z);

    pub const fn pos(axis: Axis) -> Self {
        Self { axis, negative: false }
    }

    pub const fn neg(axis: Axis) -> Self {
        Self { axis, negative: true }
    }

    fn sign(self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }
}

impl fmt::Display for SignedAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.negative { '-' } else { '+' };
        let a = match self.axis {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        };
        write!(f, "{s}{a}")
    }
}

impl FromStr for SignedAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (negative, rest) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let axis = match rest {
            "x" | "X" => Axis::X,
            "y" | "Y" => Axis::Y,
            "z" | "Z" => Axis::Z,
            _ => return Err(Error::MalformedDocument(format!("bad axis `{s}`"))),
        };
        Ok(Self { axis, negative })
    }
}

impl Serialize for SignedAxis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignedAxis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which anatomical axes the constructed primary and plane axes become.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AxisRolesRepr", into = "AxisRolesRepr")]
pub struct AxisRoles {
    primary: SignedAxis,
    plane: SignedAxis,
}

#[derive(Serialize, Deserialize)]
struct AxisRolesRepr {
    primary: SignedAxis,
    plane: SignedAxis,
}

impl TryFrom<AxisRolesRepr> for AxisRoles {
    type Error = Error;
    fn try_from(r: AxisRolesRepr) -> Result<Self> {
        AxisRoles::new(r.primary, r.plane)
    }
}

impl From<AxisRoles> for AxisRolesRepr {
    fn from(r: AxisRoles) -> Self {
        Self {
            primary: r.primary,
            plane: r.plane,
        }
    }
}

impl AxisRoles {
    pub fn new(primary: SignedAxis, plane: SignedAxis) -> Result<Self> {
        if primary.axis == plane.axis {
            return Err(Error::MalformedDocument(format!(
                "axis roles {primary} and {plane} name the same axis"
            )));
        }
        Ok(Self { primary, plane })
    }

    pub fn primary(&self) -> SignedAxis {
        self.primary
    }

    pub fn plane(&self) -> SignedAxis {
        self.plane
    }
}

/// Builds a right-handed orthonormal frame located at `origin`.
///
/// The primary direction runs from `origin` to `primary_end`; the plane
/// direction is `plane_point - origin` made orthogonal to it. `roles` says
/// which (signed) anatomical axes those two directions are; the third axis
/// completes a right-handed triad. The returned transform maps frame
/// coordinates into the input coordinates.
pub fn build_lcs(
    origin: &Point3,
    primary_end: &Point3,
    plane_point: &Point3,
    roles: AxisRoles,
) -> Result<RigidTransform> {
    if !is_finite(origin) || !is_finite(primary_end) || !is_finite(plane_point) {
        return Err(Error::NonFiniteInput("frame construction point".into()));
    }
    let primary = primary_end - origin;
    let pn = primary.norm();
    if pn <= f64::MIN_POSITIVE {
        return Err(Error::DegenerateAxis("coincident origin and primary end".into()));
    }
    let u1 = primary / pn;
    let v = plane_point - origin;
    let vn = v.norm();
    let w = v - u1 * u1.dot(&v);
    let wn = w.norm();
    if vn <= f64::MIN_POSITIVE || wn <= vn * MIN_PLANE_ANGLE.sin() {
        return Err(Error::DegenerateAxis("plane point lies on the primary axis".into()));
    }
    let u2 = w / wn;

    let p = roles.primary.axis.index();
    let q = roles.plane.axis.index();
    let r = 3 - p - q;
    let ep = u1 * roles.primary.sign();
    let eq = u2 * roles.plane.sign();
    // (p, q, r) cyclic => e_r = e_p × e_q
    let er = if (p + 1) % 3 == q { ep.cross(&eq) } else { eq.cross(&ep) };

    let mut m = Matrix3::zeros();
    m.set_column(p, &ep);
    m.set_column(q, &eq);
    m.set_column(r, &er);
    Ok(RigidTransform::new(Rotation3::from_matrix_unchecked(m), origin.coords))
}
