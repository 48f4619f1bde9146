// Writes a noisy synthetic session to disk, runs the full validation on
// it and compares the estimate with the generator's truth.
//
// cargo run --example synthetic_session -- [output dir]

use wheelcom::io::MANIFEST_FILE;
use wheelcom::pipeline::{run_pipeline, PipelineOptions};
use wheelcom::synth::{generate, SyntheticScenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let root = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| tmp.path().to_path_buf());

    let (files, truth) = generate(&SyntheticScenario::standard(42))?;
    files.write_to(&root.join("session"))?;
    println!("{} session files in {}", files.len(), root.join("session").display());

    let report = run_pipeline(
        &root.join("session").join(MANIFEST_FILE),
        &root.join("out"),
        &PipelineOptions::default(),
    )?;
    print!("{}", std::fs::read_to_string(root.join("out/table1.csv"))?);

    let worst = report
        .results
        .iter()
        .zip(&truth.trials)
        .map(|(r, t)| (r.estimated[0] - t.com.x).abs().max((r.estimated[1] - t.com.z).abs()))
        .fold(0.0, f64::max);
    println!("largest estimate error against truth: {:.2} mm", worst * 1000.0);
    Ok(())
}
