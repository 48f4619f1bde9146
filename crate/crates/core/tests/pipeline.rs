use std::path::Path;

use wheelcom::anthropometry::AnthropometricTable;
use wheelcom::error::ExitClass;
use wheelcom::io::{parse_marker_csv, write_marker_csv, Manifest, Session, SessionFiles, MANIFEST_FILE};
use wheelcom::pipeline::{analyze_session, calibrate_session, PipelineOptions};
use wheelcom::synth::{generate, GroundTruth, SyntheticScenario};
use wheelcom::validation::Posture;
use wheelcom::Error;

fn small(seed: u64) -> SyntheticScenario {
    let mut s = SyntheticScenario::noise_free(seed);
    s.postures
        .retain(|p| matches!(p.posture, Posture::Neutral | Posture::FrontReach | Posture::RightReach));
    s
}

fn session(files: &SessionFiles) -> wheelcom::Result<Session> {
    Session::load_from(files, Path::new(MANIFEST_FILE))
}

fn generated(s: &SyntheticScenario) -> (SessionFiles, GroundTruth) {
    generate(s).unwrap()
}

fn edit_manifest(files: &mut SessionFiles, f: impl FnOnce(&mut Manifest)) {
    let mut m: Manifest = serde_json::from_str(files.get(MANIFEST_FILE).unwrap()).unwrap();
    f(&mut m);
    files.insert(MANIFEST_FILE, m.to_json());
}

#[test]
fn calibrated_points_match_truth() {
    let (files, truth) = generated(&small(21));
    let s = session(&files).unwrap();
    let body = calibrate_session(&s, &PipelineOptions::default()).unwrap();
    let frame = &s.recordings.static_frames[0];
    let points = body.reconstruct(frame).unwrap();
    let mut compared = 0;
    for (label, p) in &points {
        let t = truth.static_trial.landmarks[label];
        assert!((p - t).norm() < 1e-9, "{label}: {:e}", (p - t).norm());
        compared += 1;
    }
    for jc in [
        "LJC", "LHJC", "RHJC", "CJC", "LSJC", "RSJC", "LEJC", "RWJC", "LKJC", "RAJC", "LPSIS",
    ] {
        assert!(points.contains_key(jc), "{jc} not reconstructed");
    }
    assert!(compared > 60);
}

#[test]
fn trial_estimates_match_oracle() {
    for table in [AnthropometricTable::synthetic(), AnthropometricTable::dumas_2007()] {
        let mut s = small(22);
        s.table = table;
        let (files, truth) = generated(&s);
        let (_, report, trajectories) =
            analyze_session(&session(&files).unwrap(), &PipelineOptions::default()).unwrap();
        assert_eq!(report.results.len(), truth.trials.len());
        for ((r, t), tr) in report.results.iter().zip(&truth.trials).zip(&trajectories) {
            assert!((r.estimated[0] - t.com.x).abs() < 1e-9);
            assert!((r.estimated[1] - t.com.z).abs() < 1e-9);
            assert!((r.reference[0] - t.com.x).abs() < 1e-9);
            assert!((r.reference[1] - t.com.z).abs() < 1e-9);
            assert_eq!(tr.samples.len(), 240);
        }
    }
}

#[test]
fn window_restricts_averaging() {
    let (mut files, truth) = generated(&small(23));
    let opts = PipelineOptions {
        window: Some((0.5, 1.5)),
    };
    let (_, report, _) = analyze_session(&session(&files).unwrap(), &opts).unwrap();
    for (r, t) in report.results.iter().zip(&truth.trials) {
        assert!((r.estimated[0] - t.com.x).abs() < 1e-9);
    }
    edit_manifest(&mut files, |m| m.window = Some([5.0, 6.0]));
    let err = analyze_session(&session(&files).unwrap(), &PipelineOptions::default()).unwrap_err();
    assert!(
        matches!(&err, Error::Trial { source, .. } if matches!(**source, Error::EmptyWindow { .. })),
        "{err}"
    );
}

#[test]
fn missing_pelvis_cloud_fails_step_two() {
    let (mut files, _) = generated(&small(24));
    edit_manifest(&mut files, |m| m.pelvis_cloud = None);
    let s = session(&files).unwrap();
    let err = calibrate_session(&s, &PipelineOptions::default()).unwrap_err();
    assert!(
        matches!(&err, Error::Calibration { step: 2, source } if matches!(**source, Error::MissingInput(_))),
        "{err}"
    );
    assert_eq!(err.exit_class(), ExitClass::Calibration);
}

#[test]
fn mass_from_plates() {
    let mut s = small(25);
    s.total_mass_kg = 68.3;
    s.mass_from_plates = true;
    let (files, _) = generated(&s);
    assert!(files.get(MANIFEST_FILE).unwrap().contains("\"from-plates\""));
    let body = calibrate_session(&session(&files).unwrap(), &PipelineOptions::default()).unwrap();
    assert!((body.subject().total_mass_kg - 68.3).abs() < 1e-6);
    assert!((body.total_segment_mass() - body.subject().total_mass_kg).abs() < 1e-12);
}

fn occlude(files: &mut SessionFiles, file: &str, frames: std::ops::Range<usize>, labels: &[&str]) {
    let path = Path::new(file);
    let mut parsed = parse_marker_csv(files.get(path).unwrap(), path).unwrap();
    let all: Vec<String> = parsed[0].markers.labels().map(str::to_string).collect();
    for f in &mut parsed[frames] {
        f.markers = f.markers.filtered(|l| !labels.contains(&l));
    }
    files.insert(file, write_marker_csv(&parsed, &all));
}

#[test]
fn lost_tracking_leaves_gaps() {
    let (mut files, truth) = generated(&small(26));
    // two of four upper-arm markers gone, one hand marker gone
    occlude(
        &mut files,
        "trials/front_reach_1_markers.csv",
        10..21,
        &["LUA1", "LUA3"],
    );
    occlude(&mut files, "trials/front_reach_1_markers.csv", 30..35, &["RMC5"]);
    // three markers left is still enough
    occlude(&mut files, "trials/neutral_2_markers.csv", 0..240, &["HD2"]);
    let (_, report, trajectories) = analyze_session(&session(&files).unwrap(), &PipelineOptions::default()).unwrap();
    let idx = |p: Posture, n: u32| {
        report
            .trials
            .iter()
            .position(|t| t.posture == p && t.trial == n)
            .unwrap()
    };
    let fr = idx(Posture::FrontReach, 1);
    assert_eq!(report.trials[fr].gap_frames, 16);
    assert_eq!(trajectories[fr].samples.len(), 240 - 16);
    assert!((report.results[fr].estimated[0] - truth.trials[fr].com.x).abs() < 1e-9);
    let ne = idx(Posture::Neutral, 2);
    assert_eq!(report.trials[ne].gap_frames, 0);
    assert!((report.results[ne].estimated[0] - truth.trials[ne].com.x).abs() < 1e-9);
}

#[test]
fn fully_occluded_trial_fails_with_context() {
    let (mut files, _) = generated(&small(27));
    occlude(&mut files, "trials/right_reach_3_markers.csv", 0..240, &["WC1", "WC2"]);
    let err = analyze_session(&session(&files).unwrap(), &PipelineOptions::default()).unwrap_err();
    match &err {
        Error::Trial { posture, trial, source } => {
            assert_eq!((posture.as_str(), *trial), ("right_reach", 3));
            assert!(matches!(**source, Error::EmptyWindow { .. }));
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn infeasible_centre_of_mass_is_reported() {
    let mut s = small(28);
    s.wheelchair.front_x = 0.12;
    for p in &mut s.postures {
        p.angles.trunk_flexion = 60.0;
    }
    let err = generate(&s).unwrap_err();
    assert!(matches!(err, Error::InfeasibleCoM { .. }), "{err}");
}
