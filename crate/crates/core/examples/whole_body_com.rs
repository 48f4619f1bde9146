// Calibrates a subject on a noise-free synthetic session and prints the
// segment model and the centre of mass of every trial.

use std::path::Path;

use wheelcom::io::{Session, MANIFEST_FILE};
use wheelcom::pipeline::{analyze_session, PipelineOptions};
use wheelcom::synth::{generate, SyntheticScenario};

fn main() -> wheelcom::Result<()> {
    let (files, truth) = generate(&SyntheticScenario::noise_free(7))?;
    let session = Session::load_from(&files, Path::new(MANIFEST_FILE))?;
    let (body, report, _) = analyze_session(&session, &PipelineOptions::default())?;

    println!("{:<16} {:>8} {:>9}", "segment", "mass kg", "length m");
    for s in body.segments() {
        println!("{:<16} {:>8.3} {:>9.3}", s.segment.name(), s.mass_kg, s.length_m);
    }
    println!(
        "total {:.3} kg of {:.3} kg\n",
        body.total_segment_mass(),
        body.subject().total_mass_kg
    );

    println!("{:<18} {:>9} {:>9} {:>11}", "trial", "AP m", "ML m", "oracle err");
    for (t, o) in report.trials.iter().zip(&truth.trials) {
        let c = t.com.com;
        let err = ((c.x - o.com.x).powi(2) + (c.z - o.com.z).powi(2)).sqrt();
        println!(
            "{:<18} {:>9.4} {:>9.4} {:>11.1e}",
            format!("{} {}", t.posture, t.trial),
            c.x,
            c.z,
            err
        );
    }
    Ok(())
}
