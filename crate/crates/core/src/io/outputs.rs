//! Report artefacts: per-trial results, the accuracy/precision table,
//! Bland-Altman data and plots, and per-frame trajectories.

use std::path::{Path, PathBuf};

use super::{csv_error, csv_reader, fmt_f64, parse_number, read_preamble, schema, SessionFiles};
use crate::body::ComSample;
use crate::error::Result;
use crate::pipeline::{TrialSummary, ValidationReport};
use crate::validation::{
    bland_altman, posture_stats, render_table1, BlandAltmanStats, GroundAxis, Posture, TrialResult,
};

pub const RESULTS_FILE: &str = "results.csv";
pub const TABLE1_FILE: &str = "table1.csv";
pub const SUMMARY_FILE: &str = "trial_summary.csv";

const RESULTS_HEADER: [&str; 8] = [
    "posture",
    "trial",
    "est_ap_m",
    "est_ml_m",
    "ref_ap_m",
    "ref_ml_m",
    "diff_ap_mm",
    "diff_ml_mm",
];

/// Per-frame trajectory of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOutput {
    pub posture: Posture,
    pub trial: u32,
    pub samples: Vec<ComSample>,
}

impl TrajectoryOutput {
    pub fn file_name(&self) -> PathBuf {
        PathBuf::from(format!("trajectories/{}_{}.csv", self.posture.key(), self.trial))
    }
}

/// Paths written, relative to the output directory, in write order.
pub type OutputFiles = Vec<PathBuf>;

fn finish(w: csv::Writer<Vec<u8>>, preamble: &str) -> String {
    let body = String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8");
    format!("{preamble}{body}")
}

pub fn write_results_csv(results: &[TrialResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RESULTS_HEADER).expect("in-memory write");
    for r in results {
        let mut row = vec![r.posture.key().to_string(), r.trial.to_string()];
        row.extend(r.estimated.iter().chain(&r.reference).map(|v| fmt_f64(*v)));
        row.extend(GroundAxis::BOTH.iter().map(|a| fmt_f64(r.diff(*a) * 1000.0)));
        w.write_record(&row).expect("in-memory write");
    }
    finish(w, "# format_version=1\n# units=m\n")
}

pub fn parse_results_csv(text: &str, file: &Path) -> Result<Vec<TrialResult>> {
    read_preamble(text, file)?;
    let mut reader = csv_reader(text);
    let header = reader.headers().map_err(|e| csv_error(file, e))?.clone();
    let header_line = header.position().map(|p| p.line()).unwrap_or(1);
    for (i, expected) in RESULTS_HEADER.iter().enumerate() {
        if header.get(i) != Some(expected) {
            return Err(schema(
                file,
                header_line,
                i as u64 + 1,
                format!("expected column `{expected}`"),
            ));
        }
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(file, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let posture: Posture = record[0]
            .parse()
            .map_err(|_| schema(file, line, 1, format!("unknown posture `{}`", &record[0])))?;
        let trial: u32 = record[1]
            .parse()
            .map_err(|_| schema(file, line, 2, format!("`{}` is not a trial index", &record[1])))?;
        let mut v = [0.0; 4];
        for (j, x) in v.iter_mut().enumerate() {
            *x = parse_number(&record[j + 2], file, line, j as u64 + 3)?;
        }
        out.push(
            TrialResult::new(posture, trial, [v[0], v[1]], [v[2], v[3]])
                .map_err(|e| schema(file, line, 1, e.to_string()))?,
        );
    }
    Ok(out)
}

/// `mean_mm,diff_mm` rows followed by a commented statistics footer.
pub fn write_bland_altman_csv(results: &[TrialResult], stats: &BlandAltmanStats) -> String {
    let axis = stats.axis;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["mean_mm", "diff_mm"]).expect("in-memory write");
    for r in results {
        w.write_record([fmt_f64(r.mean(axis) * 1000.0), fmt_f64(r.diff(axis) * 1000.0)])
            .expect("in-memory write");
    }
    let mut text = finish(w, &format!("# format_version=1\n# axis={}\n# units=mm\n", axis.name()));
    for (k, v) in [
        ("mean_diff_mm", stats.mean_diff * 1000.0),
        ("sd_diff_mm", stats.sd_diff * 1000.0),
        ("loa_low_mm", stats.loa_low * 1000.0),
        ("loa_high_mm", stats.loa_high * 1000.0),
        ("pearson_rho", stats.pearson_rho),
    ] {
        text.push_str(&format!("# {k}={}\n", fmt_f64(v)));
    }
    text.push_str(&format!("# n={}\n# rho_degenerate={}\n", stats.n, stats.rho_degenerate));
    text
}

pub fn write_trajectory_csv(samples: &[ComSample]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["time_s", "com_x", "com_y", "com_z", "ap", "ml"])
        .expect("in-memory write");
    for s in samples {
        let row = [
            s.time,
            s.com.x,
            s.com.y,
            s.com.z,
            s.ground_projection[0],
            s.ground_projection[1],
        ];
        w.write_record(row.map(fmt_f64)).expect("in-memory write");
    }
    finish(w, "# format_version=1\n# frame=wheelchair\n# units=m\n")
}

pub fn write_summary_csv(trials: &[TrialSummary]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "posture",
        "trial",
        "com_x_m",
        "com_y_m",
        "com_z_m",
        "cop_ap_m",
        "cop_ml_m",
        "load_N",
        "cop_samples",
        "cop_samples_excluded",
        "negative_force",
        "gap_frames",
    ])
    .expect("in-memory write");
    for t in trials {
        let c = &t.com.com;
        let mut row = vec![t.posture.key().to_string(), t.trial.to_string()];
        row.extend([c.x, c.y, c.z, t.cop.cop.ap, t.cop.cop.ml, t.cop.cop.total_force].map(fmt_f64));
        row.push(t.cop.used.to_string());
        row.push(t.cop.excluded.to_string());
        row.push(t.cop.cop.negative_force.to_string());
        row.push(t.gap_frames.to_string());
        w.write_record(&row).expect("in-memory write");
    }
    finish(w, "# format_version=1\n# frame=wheelchair\n")
}

/// Table and Bland-Altman files derived from a result list.
pub fn render_report_files(results: &[TrialResult]) -> Result<SessionFiles> {
    let mut files = SessionFiles::new();
    files.insert(TABLE1_FILE, render_table1(&posture_stats(results)?));
    for axis in GroundAxis::BOTH {
        let stats = bland_altman(results, axis)?;
        files.insert(
            format!("bland_altman_{}.csv", axis.name()),
            write_bland_altman_csv(results, &stats),
        );
        files.insert(
            format!("bland_altman_{}.svg", axis.name()),
            super::bland_altman_svg(results, &stats),
        );
    }
    Ok(files)
}

/// Every artefact of a validation run.
pub fn render_outputs(report: &ValidationReport, trajectories: &[TrajectoryOutput]) -> Result<SessionFiles> {
    let mut files = render_report_files(&report.results)?;
    files.insert(RESULTS_FILE, write_results_csv(&report.results));
    files.insert(SUMMARY_FILE, write_summary_csv(&report.trials));
    for t in trajectories {
        files.insert(t.file_name(), write_trajectory_csv(&t.samples));
    }
    Ok(files)
}

pub fn write_outputs(report: &ValidationReport, trajectories: &[TrajectoryOutput], dir: &Path) -> Result<OutputFiles> {
    let files = render_outputs(report, trajectories)?;
    files.write_to(dir)?;
    Ok(files.iter().map(|(p, _)| p.to_path_buf()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_round_trip() {
        let r = vec![
            TrialResult::new(Posture::FrontReach, 2, [0.31, -0.004], [0.3, 0.001]).unwrap(),
            TrialResult::new(Posture::Neutral, 1, [0.2, 0.0], [0.2, 0.0]).unwrap(),
        ];
        let text = write_results_csv(&r);
        assert_eq!(parse_results_csv(&text, Path::new("r.csv")).unwrap(), r);
    }

    #[test]
    fn bland_altman_footer() {
        let r: Vec<TrialResult> = (1..=3)
            .map(|i| {
                let d = i as f64 * 1e-3;
                let m = i as f64 * 1e-2;
                TrialResult::new(Posture::Neutral, i, [m + d / 2.0, 0.0], [m - d / 2.0, 0.0]).unwrap()
            })
            .collect();
        let st = bland_altman(&r, GroundAxis::Ap).unwrap();
        let text = write_bland_altman_csv(&r, &st);
        assert!(text.contains("mean_mm,diff_mm\n"));
        assert!(text.contains("# n=3\n"));
        let loa: f64 = text
            .lines()
            .find_map(|l| l.strip_prefix("# loa_low_mm="))
            .unwrap()
            .parse()
            .unwrap();
        assert!((loa - 0.04).abs() < 1e-9);
    }
}
