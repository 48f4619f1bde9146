//! End-to-end processing of a session: calibration, per-trial centre of
//! mass and reference pressure centre, statistics, and report files.

use std::path::Path;

use serde::Serialize;

use crate::body::{average_static, calibrate_body, com_frame, CalibratedBody, ComSample, Subject};
use crate::error::{Error, Result};
use crate::forceplate::{compute_zero_offset, cop_average, CopAverage, ZeroOffset};
use crate::io::{full_span, write_outputs, Session, TrajectoryOutput, Trial};
use crate::validation::{
    bland_altman, posture_stats, BlandAltmanStats, GroundAxis, Posture, PostureStats, TrialResult,
};

pub const CALIBRATION_FILE: &str = "calibration.json";

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PipelineOptions {
    /// Overrides the manifest window; both fall back to the full trial.
    pub window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialSummary {
    pub posture: Posture,
    pub trial: u32,
    /// Window-averaged centre of mass, wheelchair frame.
    pub com: ComSample,
    pub cop: CopAverage,
    /// Frames without a centre of mass because a cluster or hand marker
    /// lost tracking.
    pub gap_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub subject: Subject,
    pub trials: Vec<TrialSummary>,
    pub results: Vec<TrialResult>,
    pub posture_stats: Vec<PostureStats>,
    /// AP then ML.
    pub bland_altman: Vec<BlandAltmanStats>,
}

fn session_window(session: &Session, options: &PipelineOptions) -> Option<(f64, f64)> {
    options.window.or(session.manifest.window.map(|[a, b]| (a, b)))
}

/// Window of a recording: the requested one, else the union of both
/// streams' spans.
fn trial_window(requested: Option<(f64, f64)>, trial: &Trial) -> (f64, f64) {
    requested.unwrap_or_else(|| {
        full_span(
            trial
                .frames
                .iter()
                .map(|f| f.time)
                .chain(trial.forces.samples().iter().map(|s| s.time)),
        )
    })
}

pub fn calibrate_session(session: &Session, options: &PipelineOptions) -> Result<CalibratedBody> {
    let subject = session.subject(session_window(session, options))?;
    calibrate_body(
        &session.recordings,
        session.pelvis_cloud.as_ref(),
        &session.table,
        subject,
    )
}

/// Too few visible markers is a gap in the trajectory, not a failure.
fn is_gap(e: &Error) -> bool {
    matches!(e, Error::TrackingFailed { source, .. }
        if matches!(**source, Error::FewerThanThreeCommonLabels { .. } | Error::MarkerNeverVisible(_)))
}

/// Per-frame centre of mass and the window averages of one trial. Frames
/// where tracking is lost are left out of the trajectory.
pub fn process_trial(
    body: &CalibratedBody,
    trial: &Trial,
    offsets: &ZeroOffset,
    window: Option<(f64, f64)>,
) -> Result<(TrialSummary, TrajectoryOutput)> {
    let context = |e: Error| Error::Trial {
        posture: trial.posture.key().to_string(),
        trial: trial.trial,
        source: Box::new(e),
    };
    let mut samples = Vec::with_capacity(trial.frames.len());
    let mut gap_frames = 0;
    for f in &trial.frames {
        match com_frame(body, f) {
            Ok(s) => samples.push(s),
            Err(e) if is_gap(&e) => gap_frames += 1,
            Err(e) => return Err(context(e)),
        }
    }
    let w = trial_window(window, trial);
    let com = average_static(&samples, w).map_err(context)?;
    let contacts = body.contacts_in_wheelchair_lcs();
    let cop = cop_average(&trial.forces, offsets, &contacts, w).map_err(context)?;
    Ok((
        TrialSummary {
            posture: trial.posture,
            trial: trial.trial,
            com,
            cop,
            gap_frames,
        },
        TrajectoryOutput {
            posture: trial.posture,
            trial: trial.trial,
            samples,
        },
    ))
}

/// Per-trial centre of mass and pressure centre, in manifest order.
pub fn process_trials(
    session: &Session,
    body: &CalibratedBody,
    options: &PipelineOptions,
) -> Result<(Vec<TrialSummary>, Vec<TrajectoryOutput>)> {
    let offsets = compute_zero_offset(&session.empty_forces)?;
    let window = session_window(session, options);
    let mut summaries = Vec::new();
    let mut trajectories = Vec::new();
    for t in &session.trials {
        let (s, tr) = process_trial(body, t, &offsets, window)?;
        summaries.push(s);
        trajectories.push(tr);
    }
    Ok((summaries, trajectories))
}

pub fn build_report(subject: Subject, trials: Vec<TrialSummary>) -> Result<ValidationReport> {
    let results = trials
        .iter()
        .map(|t| {
            TrialResult::new(
                t.posture,
                t.trial,
                t.com.ground_projection,
                [t.cop.cop.ap, t.cop.cop.ml],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = posture_stats(&results)?;
    let ba = GroundAxis::BOTH
        .iter()
        .map(|a| bland_altman(&results, *a))
        .collect::<Result<Vec<_>>>()?;
    Ok(ValidationReport {
        subject,
        trials,
        results,
        posture_stats: stats,
        bland_altman: ba,
    })
}

/// Calibration, trial processing and statistics without touching disk.
pub fn analyze_session(
    session: &Session,
    options: &PipelineOptions,
) -> Result<(CalibratedBody, ValidationReport, Vec<TrajectoryOutput>)> {
    let body = calibrate_session(session, options)?;
    let (trials, trajectories) = process_trials(session, &body, options)?;
    let report = build_report(*body.subject(), trials)?;
    Ok((body, report, trajectories))
}

/// Loads the session, runs the analysis and writes every artefact,
/// including the calibrated body, into `out_dir`.
pub fn run_pipeline(manifest: &Path, out_dir: &Path, options: &PipelineOptions) -> Result<ValidationReport> {
    let session = Session::load(manifest)?;
    let (body, report, trajectories) = analyze_session(&session, options)?;
    write_outputs(&report, &trajectories, out_dir)?;
    write_calibration(&body, out_dir)?;
    Ok(report)
}

pub fn write_calibration(body: &CalibratedBody, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(CALIBRATION_FILE);
    let json = serde_json::to_string_pretty(body).expect("body serializes") + "\n";
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))
}
