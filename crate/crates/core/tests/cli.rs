use std::path::Path;
use std::process::{Command, Output};

use wheelcom::io::{parse_results_csv, write_trajectory_csv, SvgScale, RESULTS_FILE, TABLE1_FILE};

fn wheelcom(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wheelcom"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path, extra: &[&str]) {
    let mut args = vec!["--out", "session", "synth", "--seed", "8"];
    args.extend_from_slice(extra);
    let o = wheelcom(dir, &args);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn synth_validate_report() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    synth(dir, &[]);
    assert!(dir.join("session/ground_truth.json").exists());
    let o = wheelcom(
        dir,
        &["--manifest", "session/manifest.json", "--out", "out", "validate"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "results.csv",
        "table1.csv",
        "trial_summary.csv",
        "calibration.json",
        "bland_altman_ap.csv",
        "bland_altman_ml.svg",
        "trajectories/front_reach_2.csv",
    ] {
        assert!(dir.join("out").join(f).exists(), "{f} missing");
    }
    let results = std::fs::read_to_string(dir.join("out").join(RESULTS_FILE)).unwrap();
    assert_eq!(parse_results_csv(&results, Path::new(RESULTS_FILE)).unwrap().len(), 27);

    // the report verb reproduces the table from results.csv alone
    let table = std::fs::read(dir.join("out").join(TABLE1_FILE)).unwrap();
    let o = wheelcom(dir, &["--out", "again", "report", "--results", "out/results.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(dir.join("again").join(TABLE1_FILE)).unwrap(), table);
    assert_eq!(
        std::fs::read(dir.join("again/bland_altman_ap.svg")).unwrap(),
        std::fs::read(dir.join("out/bland_altman_ap.svg")).unwrap()
    );
}

#[test]
fn calibrate_and_com_with_window() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    synth(
        dir,
        &["--marker-noise-mm", "0", "--force-noise-n", "0", "--sex", "female"],
    );
    let o = wheelcom(
        dir,
        &["--manifest", "session/manifest.json", "--out", "cal", "calibrate"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let cal: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("cal/calibration.json")).unwrap()).unwrap();
    assert_eq!(cal["subject"]["sex"], "female");
    let o = wheelcom(
        dir,
        &[
            "com",
            "--manifest",
            "session/manifest.json",
            "--out",
            "com",
            "--window",
            "0.25",
            "1.75",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = std::fs::read_to_string(dir.join("com/trial_summary.csv")).unwrap();
    assert_eq!(summary.lines().filter(|l| !l.starts_with('#')).count(), 28);
    assert!(!dir.join("com/results.csv").exists());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let o = wheelcom(dir, &["--manifest", "absent.json", "validate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.json"));

    synth(dir, &["--marker-noise-mm", "0", "--force-noise-n", "0"]);
    let manifest = dir.join("session/manifest.json");
    let text = std::fs::read_to_string(&manifest).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc.as_object_mut().unwrap().remove("pelvis_cloud");
    std::fs::write(&manifest, doc.to_string()).unwrap();
    let o = wheelcom(dir, &["--manifest", "session/manifest.json", "calibrate"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("step 2"));

    std::fs::write(&manifest, &text).unwrap();
    let o = wheelcom(
        dir,
        &["--manifest", "session/manifest.json", "--window", "7", "8", "validate"],
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));

    std::fs::write(dir.join("bad.csv"), "# format_version=1\n# units=m\nposture,trial\n").unwrap();
    let o = wheelcom(dir, &["report", "--results", "bad.csv"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn malformed_inputs_name_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    synth(dir, &["--marker-noise-mm", "0", "--force-noise-n", "0"]);

    // force samples out of order
    let forces = dir.join("session/trials/neutral_1_forces.csv");
    let mut lines: Vec<String> = std::fs::read_to_string(&forces)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    let n = lines.len();
    lines.swap(n - 1, n - 2);
    std::fs::write(&forces, lines.join("\n") + "\n").unwrap();
    let o = wheelcom(dir, &["--manifest", "session/manifest.json", "validate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("neutral_1_forces.csv"), "{}", stderr(&o));

    // millimetres where metres are expected
    let markers = dir.join("session/static/markers.csv");
    let text = std::fs::read_to_string(&markers)
        .unwrap()
        .replacen("# units=m", "# units=mm", 1);
    std::fs::write(&markers, text).unwrap();
    let o = wheelcom(dir, &["--manifest", "session/manifest.json", "validate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("markers.csv"), "{}", stderr(&o));
}

#[test]
fn unknown_manifest_field_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    synth(dir, &["--marker-noise-mm", "0", "--force-noise-n", "0"]);
    let manifest = dir.join("session/manifest.json");
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    doc["sample_rate"] = 120.into();
    std::fs::write(&manifest, doc.to_string()).unwrap();
    let o = wheelcom(dir, &["--manifest", "session/manifest.json", "calibrate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sample_rate"), "{}", stderr(&o));
}

#[test]
fn svg_lines_read_back_from_scale() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    synth(dir, &[]);
    let o = wheelcom(
        dir,
        &["--manifest", "session/manifest.json", "--out", "out", "validate"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for axis in ["ap", "ml"] {
        let svg = std::fs::read_to_string(dir.join(format!("out/bland_altman_{axis}.svg"))).unwrap();
        let csv = std::fs::read_to_string(dir.join(format!("out/bland_altman_{axis}.csv"))).unwrap();
        let footer = |key: &str| -> f64 {
            let prefix = format!("# {key}=");
            csv.lines()
                .find_map(|l| l.strip_prefix(&prefix))
                .unwrap()
                .parse()
                .unwrap()
        };
        let scale = SvgScale::parse(&svg).unwrap();
        for (class, key) in [
            ("mean", "mean_diff_mm"),
            ("loa-low", "loa_low_mm"),
            ("loa-high", "loa_high_mm"),
        ] {
            let tag_start = svg.find(&format!("class=\"{class}\"")).unwrap();
            let tag = &svg[svg[..tag_start].rfind('<').unwrap()..];
            let tag = &tag[..tag.find('>').unwrap()];
            let y1: f64 = attr(tag, "y1");
            assert!((scale.y_mm(y1) - footer(key)).abs() < 1e-6, "{axis} {class}");
        }
        assert!(svg.contains("Mean (mm)") && svg.contains("Difference (mm)"));
    }
}

fn attr(tag: &str, name: &str) -> f64 {
    let key = format!(" {name}=\"");
    let start = tag.find(&key).unwrap() + key.len();
    tag[start..start + tag[start..].find('"').unwrap()].parse().unwrap()
}

#[test]
fn empty_trajectory_has_header_only() {
    let text = write_trajectory_csv(&[]);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, ["time_s,com_x,com_y,com_z,ap,ml"]);
}
