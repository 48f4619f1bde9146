// Agreement statistics for a handful of paired measurements, rendered as
// the accuracy/precision table and a Bland-Altman plot.

use wheelcom::io::bland_altman_svg;
use wheelcom::validation::{bland_altman, posture_stats, render_table1, GroundAxis, Posture, TrialResult};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pairs = [
        (Posture::Neutral, [0.182, 0.004], [0.205, -0.001]),
        (Posture::Neutral, [0.179, 0.006], [0.201, 0.000]),
        (Posture::Neutral, [0.185, 0.003], [0.213, -0.002]),
        (Posture::FrontReach, [0.301, 0.002], [0.297, -0.003]),
        (Posture::FrontReach, [0.288, 0.005], [0.310, 0.001]),
        (Posture::FrontReach, [0.296, 0.001], [0.281, -0.001]),
    ];
    let results: Vec<TrialResult> = pairs
        .iter()
        .enumerate()
        .map(|(i, (p, est, reference))| TrialResult::new(*p, (i % 3 + 1) as u32, *est, *reference))
        .collect::<Result<_, _>>()?;

    print!("{}", render_table1(&posture_stats(&results)?));
    for axis in GroundAxis::BOTH {
        let s = bland_altman(&results, axis)?;
        println!(
            "{}: mean {:.1} mm, limits {:.1} to {:.1} mm, rho {:.2}",
            axis.name(),
            s.mean_diff * 1e3,
            s.loa_low * 1e3,
            s.loa_high * 1e3,
            s.pearson_rho
        );
    }
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("bland_altman_ap.svg");
    std::fs::write(
        &path,
        bland_altman_svg(&results, &bland_altman(&results, GroundAxis::Ap)?),
    )?;
    println!("plot: {} bytes", std::fs::metadata(&path)?.len());
    Ok(())
}
