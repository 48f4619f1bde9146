use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wheelcom::anthropometry::Sex;
use wheelcom::io::{
    parse_results_csv, render_report_files, write_outputs, write_summary_csv, write_trajectory_csv, Session,
    SessionFiles, RESULTS_FILE, SUMMARY_FILE,
};
use wheelcom::pipeline::{analyze_session, calibrate_session, process_trials, write_calibration, PipelineOptions};
use wheelcom::synth::{generate, NoiseModel, SyntheticScenario};
use wheelcom::Error;

#[derive(Parser)]
#[command(
    name = "wheelcom",
    version,
    about = "Seated whole-body centre of mass from marker clusters"
)]
struct Cli {
    /// Session manifest.
    #[arg(long, global = true, default_value = "manifest.json")]
    manifest: PathBuf,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Averaging window in seconds; the full trial when omitted.
    #[arg(long, global = true, num_args = 2, value_names = ["T0", "T1"], allow_negative_numbers = true)]
    window: Option<Vec<f64>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SexArg {
    Female,
    Male,
}

#[derive(Subcommand)]
enum Command {
    /// Build the subject model and write calibration.json.
    Calibrate,
    /// Per-frame centre of mass trajectories and per-trial summaries.
    Com,
    /// Full validation against the plates: results, table and agreement plots.
    Validate,
    /// Write a synthetic session with ground truth into the output directory.
    Synth {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Marker and probe noise, millimetres.
        #[arg(long, default_value_t = 1.0)]
        marker_noise_mm: f64,
        /// Plate noise, newtons.
        #[arg(long, default_value_t = 2.0)]
        force_noise_n: f64,
        #[arg(long, value_enum, default_value_t = SexArg::Male)]
        sex: SexArg,
        #[arg(long, default_value_t = 72.0)]
        mass_kg: f64,
        /// Let the pipeline weigh the subject on the plates.
        #[arg(long)]
        mass_from_plates: bool,
    },
    /// Re-render the table and agreement files from an existing results.csv.
    Report {
        /// Defaults to results.csv in the output directory.
        #[arg(long)]
        results: Option<PathBuf>,
    },
}

fn options(cli: &Cli) -> PipelineOptions {
    PipelineOptions {
        window: cli.window.as_ref().map(|w| (w[0], w[1])),
    }
}

/// Prints a written path; a closed stdout is not an error.
fn emit(path: &Path) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{}", path.display());
}

fn write(files: &SessionFiles, out: &Path) -> Result<(), Error> {
    files.write_to(out)?;
    for (p, _) in files.iter() {
        emit(&out.join(p));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Error> {
    let opts = options(cli);
    match &cli.command {
        Command::Calibrate => {
            let session = Session::load(&cli.manifest)?;
            let body = calibrate_session(&session, &opts)?;
            write_calibration(&body, &cli.out)?;
            emit(&cli.out.join(wheelcom::pipeline::CALIBRATION_FILE));
        }
        Command::Com => {
            let session = Session::load(&cli.manifest)?;
            let body = calibrate_session(&session, &opts)?;
            let (trials, trajectories) = process_trials(&session, &body, &opts)?;
            let mut files = SessionFiles::new();
            files.insert(SUMMARY_FILE, write_summary_csv(&trials));
            for t in &trajectories {
                files.insert(t.file_name(), write_trajectory_csv(&t.samples));
            }
            write(&files, &cli.out)?;
        }
        Command::Validate => {
            let session = Session::load(&cli.manifest)?;
            let (body, report, trajectories) = analyze_session(&session, &opts)?;
            for p in write_outputs(&report, &trajectories, &cli.out)? {
                emit(&cli.out.join(p));
            }
            write_calibration(&body, &cli.out)?;
            for b in &report.bland_altman {
                eprintln!(
                    "{}: mean {:.1} mm, limits {:.1} to {:.1} mm, rho {:.2}",
                    b.axis.name(),
                    b.mean_diff * 1e3,
                    b.loa_low * 1e3,
                    b.loa_high * 1e3,
                    b.pearson_rho
                );
            }
        }
        Command::Synth {
            seed,
            marker_noise_mm,
            force_noise_n,
            sex,
            mass_kg,
            mass_from_plates,
        } => {
            let scenario = SyntheticScenario {
                sex: match sex {
                    SexArg::Female => Sex::Female,
                    SexArg::Male => Sex::Male,
                },
                total_mass_kg: *mass_kg,
                mass_from_plates: *mass_from_plates,
                noise: NoiseModel {
                    marker_sigma_m: marker_noise_mm / 1000.0,
                    force_sigma_n: *force_noise_n,
                },
                ..SyntheticScenario::standard(*seed)
            };
            let (mut files, truth) = generate(&scenario)?;
            let truth = serde_json::to_string_pretty(&truth).expect("truth serializes") + "\n";
            files.insert("ground_truth.json", truth);
            write(&files, &cli.out)?;
        }
        Command::Report { results } => {
            let path = results.clone().unwrap_or_else(|| cli.out.join(RESULTS_FILE));
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let rows = parse_results_csv(&text, &path)?;
            write(&render_report_files(&rows)?, &cli.out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_class() as u8)
        }
    }
}
