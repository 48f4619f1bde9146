//! Session file formats: marker and force CSV, JSON documents, the session
//! manifest, and the report artefacts.
//!
//! Every text format starts with a `format_version` declaration. Floats are
//! written in shortest round-trip form, so a write/read cycle is lossless.

mod forces;
mod manifest;
mod markers;
mod outputs;
mod svg;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub use forces::{parse_force_csv, write_force_csv};
pub(crate) use manifest::{full_span, to_plate_order};
pub use manifest::{
    load_session, parse_pelvis_cloud, parse_probed_points, write_pelvis_cloud, write_probed_points, Manifest, MassSpec,
    ProbingEntry, Recording, Session, SubjectSpec, Trial, TrialEntry, Wheel, MANIFEST_FILE,
};
pub use markers::{parse_marker_csv, write_marker_csv};
pub use outputs::{
    parse_results_csv, render_outputs, render_report_files, write_bland_altman_csv, write_outputs, write_results_csv,
    write_summary_csv, write_trajectory_csv, OutputFiles, TrajectoryOutput, RESULTS_FILE, SUMMARY_FILE, TABLE1_FILE,
};
pub use svg::{bland_altman_svg, SvgScale};

pub const FORMAT_VERSION: u32 = 1;

/// Shortest round-trip decimal form, with negative zero printed as `0`.
pub fn fmt_f64(v: f64) -> String {
    format!("{}", v + 0.0)
}

/// Read access to the files of a session, by path relative to its root.
pub trait SessionSource {
    fn read(&self, relative: &Path) -> Result<String>;

    /// Display path used in error messages.
    fn display_path(&self, relative: &Path) -> PathBuf;
}

/// A session directory on disk.
#[derive(Debug, Clone)]
pub struct DirSource {
    pub root: PathBuf,
}

impl SessionSource for DirSource {
    fn read(&self, relative: &Path) -> Result<String> {
        let path = self.root.join(relative);
        std::fs::read_to_string(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::FileNotFound(path),
            _ => Error::io(path, e),
        })
    }

    fn display_path(&self, relative: &Path) -> PathBuf {
        self.root.join(relative)
    }
}

/// An in-memory file set keyed by relative path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SessionFiles {
    files: BTreeMap<PathBuf, String>,
}

impl SessionFiles {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, relative: impl Into<PathBuf>, contents: String) {
        self.files.insert(relative.into(), contents);
    }

    pub fn get(&self, relative: impl AsRef<Path>) -> Option<&str> {
        self.files.get(relative.as_ref()).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Path, &str)> {
        self.files.iter().map(|(p, c)| (p.as_path(), c.as_str()))
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Writes every file under `root`, creating directories as needed.
    pub fn write_to(&self, root: &Path) -> Result<()> {
        for (rel, contents) in &self.files {
            let path = root.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

impl SessionSource for SessionFiles {
    fn read(&self, relative: &Path) -> Result<String> {
        self.get(relative)
            .map(str::to_string)
            .ok_or_else(|| Error::FileNotFound(relative.to_path_buf()))
    }

    fn display_path(&self, relative: &Path) -> PathBuf {
        relative.to_path_buf()
    }
}

/// Header declarations (`# key=value`) at the top of a CSV document.
#[derive(Debug, Default)]
struct Preamble {
    entries: BTreeMap<String, (String, u64)>,
    /// Number of preamble lines consumed.
    lines: u64,
}

fn schema(file: &Path, line: u64, column: u64, message: impl Into<String>) -> Error {
    Error::SchemaViolation {
        file: file.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

fn read_preamble(text: &str, file: &Path) -> Result<Preamble> {
    let mut p = Preamble::default();
    for (i, line) in text.lines().enumerate() {
        let Some(body) = line.strip_prefix('#') else { break };
        let line_no = i as u64 + 1;
        p.lines = line_no;
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| schema(file, line_no, 1, format!("expected `# key=value`, found `{line}`")))?;
        p.entries.insert(k.trim().to_string(), (v.trim().to_string(), line_no));
    }
    match p.entries.get("format_version") {
        Some((v, _)) if v == "1" => {}
        Some((v, l)) => return Err(schema(file, *l, 1, format!("unsupported format_version {v}"))),
        None => return Err(schema(file, 1, 1, "missing `# format_version=1` declaration")),
    }
    Ok(p)
}

fn check_units(p: &Preamble, file: &Path, expected: &str) -> Result<()> {
    match p.entries.get("units") {
        Some((v, _)) if v == expected => Ok(()),
        Some((v, _)) => Err(Error::UnitMismatch {
            file: file.to_path_buf(),
            expected: expected.to_string(),
            found: v.clone(),
        }),
        None => Err(schema(file, 1, 1, format!("missing `# units={expected}` declaration"))),
    }
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes())
}

fn csv_error(file: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    schema(file, line, 1, e.to_string())
}

fn parse_number(field: &str, file: &Path, line: u64, column: u64) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| schema(file, line, column, format!("`{field}` is not a number")))?;
    if !v.is_finite() {
        return Err(schema(file, line, column, format!("`{field}` is not finite")));
    }
    Ok(v)
}

fn json_error(file: &Path, e: serde_json::Error) -> Error {
    schema(file, e.line() as u64, e.column() as u64, e.to_string())
}
