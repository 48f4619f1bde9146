//! Wide marker CSV: `time_s` then `<marker>.x,<marker>.y,<marker>.z` in
//! metres. An empty triple marks an occluded marker.

use std::path::Path;

use super::{check_units, csv_error, csv_reader, fmt_f64, parse_number, read_preamble, schema};
use crate::cluster::Frame;
use crate::error::Result;
use crate::geometry::{LabelledPointSet, Point3};

/// Column order follows `labels`; markers absent from a frame are written
/// as empty cells.
pub fn write_marker_csv(frames: &[Frame], labels: &[String]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["time_s".to_string()];
    for l in labels {
        for c in ["x", "y", "z"] {
            header.push(format!("{l}.{c}"));
        }
    }
    w.write_record(&header).expect("in-memory write");
    for f in frames {
        let mut row = vec![fmt_f64(f.time)];
        for l in labels {
            match f.markers.get(l) {
                Some(p) => row.extend(p.iter().map(|v| fmt_f64(*v))),
                None => row.extend(std::iter::repeat_n(String::new(), 3)),
            }
        }
        w.write_record(&row).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8");
    format!("# format_version=1\n# units=m\n{body}")
}

pub fn parse_marker_csv(text: &str, file: &Path) -> Result<Vec<Frame>> {
    let preamble = read_preamble(text, file)?;
    check_units(&preamble, file, "m")?;

    let mut reader = csv_reader(text);
    let header = reader.headers().map_err(|e| csv_error(file, e))?.clone();
    let header_line = header.position().map(|p| p.line()).unwrap_or(preamble.lines + 1);
    if header.get(0) != Some("time_s") {
        return Err(schema(file, header_line, 1, "first column must be `time_s`"));
    }
    if (header.len() - 1) % 3 != 0 {
        return Err(schema(
            file,
            header_line,
            header.len() as u64,
            "marker columns must come in x,y,z triples",
        ));
    }
    let mut labels = Vec::new();
    for k in 0..(header.len() - 1) / 3 {
        let col = 1 + 3 * k;
        let name = header[col].strip_suffix(".x").ok_or_else(|| {
            schema(
                file,
                header_line,
                col as u64 + 1,
                format!("expected `<marker>.x`, found `{}`", &header[col]),
            )
        })?;
        for (off, axis) in [(1, "y"), (2, "z")] {
            if header[col + off] != format!("{name}.{axis}") {
                return Err(schema(
                    file,
                    header_line,
                    (col + off) as u64 + 1,
                    format!("expected `{name}.{axis}`, found `{}`", &header[col + off]),
                ));
            }
        }
        if labels.contains(&name) {
            return Err(schema(
                file,
                header_line,
                col as u64 + 1,
                format!("marker {name} listed twice"),
            ));
        }
        labels.push(name);
    }

    let mut frames: Vec<Frame> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(file, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let time = parse_number(&record[0], file, line, 1)?;
        if time < 0.0 {
            return Err(schema(file, line, 1, "negative time"));
        }
        if let Some(prev) = frames.last() {
            if time <= prev.time {
                return Err(schema(file, line, 1, format!("time {time} does not increase")));
            }
        }
        let mut markers = LabelledPointSet::new();
        for (k, label) in labels.iter().enumerate() {
            let col = 1 + 3 * k;
            let cells = [&record[col], &record[col + 1], &record[col + 2]];
            let empty = cells.iter().filter(|c| c.is_empty()).count();
            match empty {
                3 => continue,
                0 => {}
                _ => {
                    return Err(schema(
                        file,
                        line,
                        col as u64 + 1,
                        format!("marker {label} is partially empty"),
                    ))
                }
            }
            let mut xyz = [0.0; 3];
            for (j, c) in cells.iter().enumerate() {
                xyz[j] = parse_number(c, file, line, (col + j) as u64 + 1)?;
            }
            markers.insert(*label, Point3::from(xyz)).expect("labels are unique");
        }
        frames.push(Frame { time, markers });
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn frames() -> Vec<Frame> {
        let mut a = LabelledPointSet::new();
        a.insert("M1", Point3::new(0.1, 0.2, 0.3)).unwrap();
        a.insert("M2", Point3::new(-1.0 / 3.0, 1e-9, 2.5)).unwrap();
        let mut b = LabelledPointSet::new();
        b.insert("M2", Point3::new(0.0, 0.0, -0.0)).unwrap();
        vec![
            Frame { time: 0.0, markers: a },
            Frame {
                time: 1.0 / 120.0,
                markers: b,
            },
        ]
    }

    #[test]
    fn round_trip() {
        let labels = vec!["M1".to_string(), "M2".to_string()];
        let text = write_marker_csv(&frames(), &labels);
        assert!(text.starts_with("# format_version=1\n# units=m\ntime_s,M1.x,M1.y,M1.z,M2.x,M2.y,M2.z\n"));
        assert!(text.contains(",,,"));
        let back = parse_marker_csv(&text, Path::new("m.csv")).unwrap();
        assert_eq!(back, frames());
        assert!(!back[1].markers.contains("M1"));
    }

    #[test]
    fn non_monotone_time_names_line() {
        let text = "# format_version=1\n# units=m\ntime_s,A.x,A.y,A.z\n0.1,0,0,0\n0.05,0,0,0\n";
        match parse_marker_csv(text, Path::new("m.csv")) {
            Err(Error::SchemaViolation { line, column, .. }) => assert_eq!((line, column), (5, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_documents() {
        let mm = "# format_version=1\n# units=mm\ntime_s,A.x,A.y,A.z\n0,0,0,0\n";
        assert!(matches!(
            parse_marker_csv(mm, Path::new("m.csv")),
            Err(Error::UnitMismatch { .. })
        ));
        let v2 = "# format_version=2\n# units=m\ntime_s\n";
        assert!(matches!(
            parse_marker_csv(v2, Path::new("m.csv")),
            Err(Error::SchemaViolation { .. })
        ));
        let partial = "# format_version=1\n# units=m\ntime_s,A.x,A.y,A.z\n0,1,,0\n";
        match parse_marker_csv(partial, Path::new("m.csv")) {
            Err(Error::SchemaViolation { line, column, .. }) => assert_eq!((line, column), (4, 2)),
            other => panic!("{other:?}"),
        }
        let word = "# format_version=1\n# units=m\ntime_s,A.x,A.y,A.z\n0,1,x,0\n";
        match parse_marker_csv(word, Path::new("m.csv")) {
            Err(Error::SchemaViolation { line, column, .. }) => assert_eq!((line, column), (4, 3)),
            other => panic!("{other:?}"),
        }
        let header = "# format_version=1\n# units=m\ntime_s,A.x,B.y,A.z\n";
        assert!(matches!(
            parse_marker_csv(header, Path::new("m.csv")),
            Err(Error::SchemaViolation { .. })
        ));
    }
}
