//! Force CSV: `time_s,f1_N,f2_N,f3_N,f4_N`, one vertical force per plate.

use std::path::Path;

use super::{check_units, csv_error, csv_reader, fmt_f64, parse_number, read_preamble, schema};
use crate::error::{Error, Result};
use crate::forceplate::{ForceRecord, ForceSample};

pub const FORCE_HEADER: [&str; 5] = ["time_s", "f1_N", "f2_N", "f3_N", "f4_N"];

/// Writes plate-ordered samples.
pub fn write_force_csv(samples: &[ForceSample]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FORCE_HEADER).expect("in-memory write");
    for s in samples {
        let row: Vec<String> = std::iter::once(s.time).chain(s.forces).map(fmt_f64).collect();
        w.write_record(&row).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8");
    format!("# format_version=1\n# units=N\n{body}")
}

/// Parses plate-ordered samples.
pub fn parse_force_csv(text: &str, file: &Path) -> Result<ForceRecord> {
    let preamble = read_preamble(text, file)?;
    check_units(&preamble, file, "N")?;
    let mut reader = csv_reader(text);
    let header = reader.headers().map_err(|e| csv_error(file, e))?.clone();
    let header_line = header.position().map(|p| p.line()).unwrap_or(preamble.lines + 1);
    for (i, expected) in FORCE_HEADER.iter().enumerate() {
        if header.get(i) != Some(expected) {
            return Err(schema(
                file,
                header_line,
                i as u64 + 1,
                format!("expected column `{expected}`"),
            ));
        }
    }
    if header.len() != FORCE_HEADER.len() {
        return Err(schema(file, header_line, 6, "unexpected extra column"));
    }
    let mut samples: Vec<ForceSample> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(file, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let time = parse_number(&record[0], file, line, 1)?;
        if let Some(prev) = samples.last() {
            if time <= prev.time {
                return Err(schema(file, line, 1, format!("time {time} does not increase")));
            }
        }
        let mut forces = [0.0; 4];
        for (j, f) in forces.iter_mut().enumerate() {
            *f = parse_number(&record[j + 1], file, line, j as u64 + 2)?;
        }
        samples.push(ForceSample { time, forces });
    }
    ForceRecord::new(samples).map_err(|e| match e {
        Error::MalformedDocument(m) => schema(file, 0, 1, m),
        e => e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = vec![
            ForceSample {
                time: 0.0,
                forces: [1.5, -0.25, 300.0, 1e-3],
            },
            ForceSample {
                time: 0.001,
                forces: [2.0, 0.0, 299.75, 0.1],
            },
        ];
        let text = write_force_csv(&s);
        assert!(text.starts_with("# format_version=1\n# units=N\ntime_s,f1_N,f2_N,f3_N,f4_N\n"));
        let back = parse_force_csv(&text, Path::new("f.csv")).unwrap();
        assert_eq!(back.samples(), &s[..]);
    }

    #[test]
    fn rejects_wrong_units_and_order() {
        let kn = "# format_version=1\n# units=kN\ntime_s,f1_N,f2_N,f3_N,f4_N\n";
        assert!(matches!(
            parse_force_csv(kn, Path::new("f.csv")),
            Err(Error::UnitMismatch { .. })
        ));
        let order = "# format_version=1\n# units=N\ntime_s,f1_N,f2_N,f3_N,f4_N\n0.1,1,1,1,1\n0.1,1,1,1,1\n";
        match parse_force_csv(order, Path::new("f.csv")) {
            Err(Error::SchemaViolation { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }
}
