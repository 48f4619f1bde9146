//! Session manifest and the JSON side documents it references.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{json_error, parse_force_csv, parse_marker_csv, schema, DirSource, SessionSource, FORMAT_VERSION};
use crate::anthropometry::{load_table, AnthropometricTable, Sex};
use crate::body::{CalibrationRecordings, ProbedPoint, ProbingCapture, Subject};
use crate::cluster::{Frame, PelvisCloud};
use crate::error::{Error, Result};
use crate::forceplate::{compute_zero_offset, mass_from_plates, ForceRecord, ForceSample};
use crate::geometry::{LabelledPointSet, Point3};
use crate::validation::Posture;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Subject mass: a number of kilograms, or `"from-plates"` to weigh the
/// subject with the plates during the neutral static trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassSpec {
    Kilograms(f64),
    FromPlates,
}

const FROM_PLATES: &str = "from-plates";

impl Serialize for MassSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MassSpec::Kilograms(kg) => s.serialize_f64(*kg),
            MassSpec::FromPlates => s.serialize_str(FROM_PLATES),
        }
    }
}

impl<'de> Deserialize<'de> for MassSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Number(kg) if kg.is_finite() && kg > 0.0 => Ok(MassSpec::Kilograms(kg)),
            Repr::Number(kg) => Err(serde::de::Error::custom(format!("total mass {kg} must be positive"))),
            Repr::Text(t) if t == FROM_PLATES => Ok(MassSpec::FromPlates),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "total_mass_kg must be a number or \"{FROM_PLATES}\", found \"{t}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubjectSpec {
    pub sex: Sex,
    pub total_mass_kg: MassSpec,
}

/// Wheel standing on a plate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wheel {
    RearLeft,
    RearRight,
    FrontLeft,
    FrontRight,
}

impl Wheel {
    /// Position in contact order.
    pub fn contact_index(self) -> usize {
        match self {
            Wheel::RearLeft => 0,
            Wheel::RearRight => 1,
            Wheel::FrontLeft => 2,
            Wheel::FrontRight => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbingEntry {
    pub markers: PathBuf,
    pub points: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recording {
    pub markers: PathBuf,
    pub forces: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialEntry {
    pub posture: Posture,
    pub trial: u32,
    pub markers: PathBuf,
    pub forces: PathBuf,
}

/// Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub subject: SubjectSpec,
    pub anthropometric_table: PathBuf,
    /// Cluster name to physical marker labels.
    pub clusters: BTreeMap<String, Vec<String>>,
    pub probing: Vec<ProbingEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pelvis_cloud: Option<PathBuf>,
    pub empty_wheelchair_forces: PathBuf,
    pub static_trial: Recording,
    /// Wheel standing on plate 1..4.
    pub plate_to_wheel: [Wheel; 4],
    pub trials: Vec<TrialEntry>,
    /// Averaging window applied to every trial; the full trial if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    fn validate(&self, file: &Path) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(schema(
                file,
                0,
                0,
                format!("unsupported format_version {}", self.format_version),
            ));
        }
        let mut seen = [false; 4];
        for w in self.plate_to_wheel {
            if std::mem::replace(&mut seen[w.contact_index()], true) {
                return Err(schema(file, 0, 0, format!("plate_to_wheel lists {w:?} twice")));
            }
        }
        if let Some([t0, t1]) = self.window {
            if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
                return Err(schema(file, 0, 0, format!("window [{t0}, {t1}] has no duration")));
            }
        }
        for (i, t) in self.trials.iter().enumerate() {
            if t.trial == 0 {
                return Err(schema(file, 0, 0, format!("trials[{i}]: trial indices start at 1")));
            }
            if self.trials[..i]
                .iter()
                .any(|o| o.posture == t.posture && o.trial == t.trial)
            {
                return Err(schema(
                    file,
                    0,
                    0,
                    format!("trial {} #{} listed twice", t.posture, t.trial),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbedPointRepr {
    label: String,
    cluster: String,
    time_s: f64,
    position_m: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbedPointsDoc {
    format_version: u32,
    units: String,
    points: Vec<ProbedPointRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PelvisCloudDoc {
    format_version: u32,
    units: String,
    points: BTreeMap<String, [f64; 3]>,
}

fn check_doc_header(version: u32, units: &str, file: &Path) -> Result<()> {
    if version != FORMAT_VERSION {
        return Err(schema(file, 0, 0, format!("unsupported format_version {version}")));
    }
    if units != "m" {
        return Err(Error::UnitMismatch {
            file: file.to_path_buf(),
            expected: "m".into(),
            found: units.to_string(),
        });
    }
    Ok(())
}

pub fn write_probed_points(points: &[ProbedPoint]) -> String {
    let doc = ProbedPointsDoc {
        format_version: FORMAT_VERSION,
        units: "m".into(),
        points: points
            .iter()
            .map(|p| ProbedPointRepr {
                label: p.label.clone(),
                cluster: p.cluster.clone(),
                time_s: p.time,
                position_m: [p.position.x, p.position.y, p.position.z],
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializes") + "\n"
}

pub fn parse_probed_points(text: &str, file: &Path) -> Result<Vec<ProbedPoint>> {
    let doc: ProbedPointsDoc = serde_json::from_str(text).map_err(|e| json_error(file, e))?;
    check_doc_header(doc.format_version, &doc.units, file)?;
    doc.points
        .into_iter()
        .map(|p| {
            if !p.time_s.is_finite() || p.position_m.iter().any(|v| !v.is_finite()) {
                return Err(schema(file, 0, 0, format!("probed point {} is not finite", p.label)));
            }
            Ok(ProbedPoint {
                label: p.label,
                cluster: p.cluster,
                time: p.time_s,
                position: Point3::from(p.position_m),
            })
        })
        .collect()
}

pub fn write_pelvis_cloud(cloud: &PelvisCloud) -> String {
    let doc = PelvisCloudDoc {
        format_version: FORMAT_VERSION,
        units: "m".into(),
        points: cloud
            .as_set()
            .iter()
            .map(|(l, p)| (l.to_string(), [p.x, p.y, p.z]))
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializes") + "\n"
}

pub fn parse_pelvis_cloud(text: &str, file: &Path) -> Result<PelvisCloud> {
    let doc: PelvisCloudDoc = serde_json::from_str(text).map_err(|e| json_error(file, e))?;
    check_doc_header(doc.format_version, &doc.units, file)?;
    let set: LabelledPointSet = doc.points.into_iter().map(|(l, p)| (l, Point3::from(p))).collect();
    PelvisCloud::from_set(&set).map_err(|e| match e {
        Error::MalformedDocument(m) => schema(file, 0, 0, m),
        e => e,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub posture: Posture,
    pub trial: u32,
    pub frames: Vec<Frame>,
    /// Forces in contact order (rear-left, rear-right, front-left,
    /// front-right).
    pub forces: ForceRecord,
}

/// A parsed and validated session.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub manifest: Manifest,
    pub table: AnthropometricTable,
    pub recordings: CalibrationRecordings,
    /// Absent when the manifest has no pelvis-cloud capture; calibration
    /// then fails at step 2.
    pub pelvis_cloud: Option<PelvisCloud>,
    pub empty_forces: ForceRecord,
    pub static_forces: ForceRecord,
    pub trials: Vec<Trial>,
}

impl Session {
    /// Reads a session directory from its manifest path.
    pub fn load(manifest_path: &Path) -> Result<Self> {
        let root = manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let name = manifest_path
            .file_name()
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(MANIFEST_FILE));
        Self::load_from(&DirSource { root }, &name)
    }

    /// Reads a session through any source, e.g. an in-memory file set.
    pub fn load_from(source: &dyn SessionSource, manifest: &Path) -> Result<Self> {
        let manifest_file = source.display_path(manifest);
        let manifest: Manifest =
            serde_json::from_str(&source.read(manifest)?).map_err(|e| json_error(&manifest_file, e))?;
        manifest.validate(&manifest_file)?;

        let table_path = &manifest.anthropometric_table;
        let table = load_table(&source.read(table_path)?).map_err(|e| match e {
            Error::MalformedDocument(m) => schema(&source.display_path(table_path), 0, 0, m),
            e => e,
        })?;

        let markers = |p: &Path| parse_marker_csv(&source.read(p)?, &source.display_path(p));
        let forces = |p: &Path| -> Result<ForceRecord> {
            let plate = parse_force_csv(&source.read(p)?, &source.display_path(p))?;
            Ok(to_contact_order(&plate, &manifest.plate_to_wheel))
        };

        let mut probing = Vec::new();
        for entry in &manifest.probing {
            probing.push(ProbingCapture {
                frames: markers(&entry.markers)?,
                points: parse_probed_points(&source.read(&entry.points)?, &source.display_path(&entry.points))?,
            });
        }
        let pelvis_cloud = match &manifest.pelvis_cloud {
            Some(p) => Some(parse_pelvis_cloud(&source.read(p)?, &source.display_path(p))?),
            None => None,
        };
        let recordings = CalibrationRecordings {
            cluster_markers: manifest.clusters.clone(),
            probing,
            static_frames: markers(&manifest.static_trial.markers)?,
        };
        let empty_forces = forces(&manifest.empty_wheelchair_forces)?;
        let static_forces = forces(&manifest.static_trial.forces)?;
        let mut trials = Vec::new();
        for t in &manifest.trials {
            trials.push(Trial {
                posture: t.posture,
                trial: t.trial,
                frames: markers(&t.markers)?,
                forces: forces(&t.forces)?,
            });
        }
        Ok(Self {
            manifest,
            table,
            recordings,
            pelvis_cloud,
            empty_forces,
            static_forces,
            trials,
        })
    }

    /// Subject with the mass resolved; plate weighing uses the static
    /// trial over `window` (the whole trial if `None`).
    pub fn subject(&self, window: Option<(f64, f64)>) -> Result<Subject> {
        let spec = &self.manifest.subject;
        let mass = match spec.total_mass_kg {
            MassSpec::Kilograms(kg) => kg,
            MassSpec::FromPlates => {
                let offsets = compute_zero_offset(&self.empty_forces)?;
                let w = window.unwrap_or_else(|| full_span(self.static_forces.samples().iter().map(|s| s.time)));
                mass_from_plates(&self.static_forces, &offsets, w)?
            }
        };
        Subject::new(spec.sex, mass)
    }
}

/// Manifest-driven session loading from disk.
pub fn load_session(manifest_path: &Path) -> Result<Session> {
    Session::load(manifest_path)
}

/// First to last time of a stream; (0, 0) when empty.
pub(crate) fn full_span(times: impl Iterator<Item = f64>) -> (f64, f64) {
    times
        .fold(None, |acc: Option<(f64, f64)>, t| match acc {
            None => Some((t, t)),
            Some((a, b)) => Some((a.min(t), b.max(t))),
        })
        .unwrap_or((0.0, 0.0))
}

fn to_contact_order(plate: &ForceRecord, plate_to_wheel: &[Wheel; 4]) -> ForceRecord {
    let samples = plate
        .samples()
        .iter()
        .map(|s| {
            let mut forces = [0.0; 4];
            for (i, w) in plate_to_wheel.iter().enumerate() {
                forces[w.contact_index()] = s.forces[i];
            }
            ForceSample { time: s.time, forces }
        })
        .collect();
    ForceRecord::new(samples).expect("reordering keeps validity")
}

/// Inverse of the contact reordering, for writers.
pub(crate) fn to_plate_order(samples: &[ForceSample], plate_to_wheel: &[Wheel; 4]) -> Vec<ForceSample> {
    samples
        .iter()
        .map(|s| {
            let mut forces = [0.0; 4];
            for (i, w) in plate_to_wheel.iter().enumerate() {
                forces[i] = s.forces[w.contact_index()];
            }
            ForceSample { time: s.time, forces }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_spec_forms() {
        let s: SubjectSpec = serde_json::from_str(r#"{"sex":"male","total_mass_kg":72.5}"#).unwrap();
        assert_eq!(s.total_mass_kg, MassSpec::Kilograms(72.5));
        let s: SubjectSpec = serde_json::from_str(r#"{"sex":"female","total_mass_kg":"from-plates"}"#).unwrap();
        assert_eq!(s.total_mass_kg, MassSpec::FromPlates);
        assert!(serde_json::from_str::<SubjectSpec>(r#"{"sex":"female","total_mass_kg":"heavy"}"#).is_err());
        assert!(serde_json::from_str::<SubjectSpec>(r#"{"sex":"female","total_mass_kg":-3}"#).is_err());
        assert!(serde_json::from_str::<SubjectSpec>(r#"{"total_mass_kg":70}"#).is_err());
    }

    #[test]
    fn plate_reordering_inverts() {
        let map = [Wheel::FrontRight, Wheel::RearLeft, Wheel::FrontLeft, Wheel::RearRight];
        let s = vec![ForceSample {
            time: 0.0,
            forces: [1.0, 2.0, 3.0, 4.0],
        }];
        let contact = to_contact_order(&ForceRecord::new(s.clone()).unwrap(), &map);
        assert_eq!(contact.samples()[0].forces, [2.0, 4.0, 3.0, 1.0]);
        assert_eq!(to_plate_order(contact.samples(), &map), s);
    }

    #[test]
    fn probed_points_round_trip() {
        let pts = vec![ProbedPoint {
            label: "C7".into(),
            cluster: "thorax".into(),
            time: 0.25,
            position: Point3::new(0.1, 1.2, -0.003),
        }];
        let text = write_probed_points(&pts);
        assert_eq!(parse_probed_points(&text, Path::new("p.json")).unwrap(), pts);
        let bad = text.replace("\"m\"", "\"mm\"");
        assert!(matches!(
            parse_probed_points(&bad, Path::new("p.json")),
            Err(Error::UnitMismatch { .. })
        ));
    }
}
