//! Bland-Altman scatter as a self-contained SVG document.
//!
//! The plot group carries its data-to-pixel mapping as attributes
//! (`px = offset + scale * mm` per axis), so values can be read back from
//! the drawn coordinates.

use std::fmt::Write;

use super::fmt_f64;
use crate::validation::{BlandAltmanStats, GroundAxis, TrialResult};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

/// Affine data-to-pixel mapping of both plot axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgScale {
    pub x_offset_px: f64,
    pub x_px_per_mm: f64,
    pub y_offset_px: f64,
    pub y_px_per_mm: f64,
}

impl SvgScale {
    fn fit(range_x: (f64, f64), range_y: (f64, f64)) -> Self {
        let (x0, x1) = padded(range_x);
        let (y0, y1) = padded(range_y);
        let sx = (WIDTH - LEFT - RIGHT) / (x1 - x0);
        let sy = -(HEIGHT - TOP - BOTTOM) / (y1 - y0);
        Self {
            x_offset_px: LEFT - sx * x0,
            x_px_per_mm: sx,
            y_offset_px: TOP - sy * y1,
            y_px_per_mm: sy,
        }
    }

    pub fn x_px(&self, mm: f64) -> f64 {
        self.x_offset_px + self.x_px_per_mm * mm
    }

    pub fn y_px(&self, mm: f64) -> f64 {
        self.y_offset_px + self.y_px_per_mm * mm
    }

    pub fn y_mm(&self, px: f64) -> f64 {
        (px - self.y_offset_px) / self.y_px_per_mm
    }

    /// Reads the mapping back from a document written by
    /// [`bland_altman_svg`].
    pub fn parse(svg: &str) -> Option<Self> {
        let attr = |name: &str| -> Option<f64> {
            let key = format!("{name}=\"");
            let start = svg.find(&key)? + key.len();
            let end = start + svg[start..].find('"')?;
            svg[start..end].parse().ok()
        };
        Some(Self {
            x_offset_px: attr("data-x-offset-px")?,
            x_px_per_mm: attr("data-x-px-per-mm")?,
            y_offset_px: attr("data-y-offset-px")?,
            y_px_per_mm: attr("data-y-px-per-mm")?,
        })
    }
}

fn padded((lo, hi): (f64, f64)) -> (f64, f64) {
    let span = hi - lo;
    if span <= 1e-9 {
        return (lo - 1.0, hi + 1.0);
    }
    (lo - 0.08 * span, hi + 0.08 * span)
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

fn tick_label(v: f64) -> String {
    format!("{:.1}", v + 0.0).replace("-0.0", "0.0")
}

/// Difference against mean of the paired values, in millimetres, with the
/// mean difference and both limits of agreement drawn across the plot.
pub fn bland_altman_svg(results: &[TrialResult], stats: &BlandAltmanStats) -> String {
    let axis = stats.axis;
    let mm = |v: f64| v * 1000.0;
    let means: Vec<f64> = results.iter().map(|r| mm(r.mean(axis))).collect();
    let diffs: Vec<f64> = results.iter().map(|r| mm(r.diff(axis))).collect();
    let lines = [
        ("loa-high", mm(stats.loa_high), "+1.96 SD"),
        ("mean", mm(stats.mean_diff), "mean"),
        ("loa-low", mm(stats.loa_low), "-1.96 SD"),
    ];
    let rx = range(means.iter().copied());
    let ry = range(diffs.iter().copied().chain(lines.iter().map(|l| l.1)));
    let s = SvgScale::fit(rx, ry);
    let (px0, px1) = (LEFT, WIDTH - RIGHT);
    let (py0, py1) = (TOP, HEIGHT - BOTTOM);
    let title = match axis {
        GroundAxis::Ap => "Bland-Altman, AP axis",
        GroundAxis::Ml => "Bland-Altman, ML axis",
    };

    let mut o = String::new();
    let _ = writeln!(o, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(o, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        o,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{title}</text>"#,
        (px0 + px1) / 2.0
    );
    let _ = writeln!(
        o,
        r#"<g id="plot" data-axis="{}" data-x-offset-px="{}" data-x-px-per-mm="{}" data-y-offset-px="{}" data-y-px-per-mm="{}">"#,
        axis.name(),
        fmt_f64(s.x_offset_px),
        fmt_f64(s.x_px_per_mm),
        fmt_f64(s.y_offset_px),
        fmt_f64(s.y_px_per_mm)
    );
    let _ = writeln!(
        o,
        r#"<rect x="{px0}" y="{py0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        px1 - px0,
        py1 - py0
    );
    for i in 0..TICKS {
        let f = i as f64 / (TICKS - 1) as f64;
        let xv = (px0 + f * (px1 - px0) - s.x_offset_px) / s.x_px_per_mm;
        let yv = s.y_mm(py1 - f * (py1 - py0));
        let xp = s.x_px(xv);
        let yp = s.y_px(yv);
        let _ = writeln!(
            o,
            r#"<line x1="{xp}" y1="{py1}" x2="{xp}" y2="{}" stroke="black"/>"#,
            py1 + 5.0
        );
        let _ = writeln!(
            o,
            r#"<text x="{xp}" y="{}" text-anchor="middle">{}</text>"#,
            py1 + 20.0,
            tick_label(xv)
        );
        let _ = writeln!(
            o,
            r#"<line x1="{}" y1="{yp}" x2="{px0}" y2="{yp}" stroke="black"/>"#,
            px0 - 5.0
        );
        let _ = writeln!(
            o,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            px0 - 8.0,
            yp + 4.0,
            tick_label(yv)
        );
    }
    for (class, v, label) in lines {
        let y = fmt_f64(s.y_px(v));
        let dash = if class == "mean" {
            ""
        } else {
            r#" stroke-dasharray="6 4""#
        };
        let _ = writeln!(
            o,
            r#"<line class="{class}" data-value-mm="{}" x1="{px0}" y1="{y}" x2="{px1}" y2="{y}" stroke="gray"{dash}/>"#,
            fmt_f64(v)
        );
        let _ = writeln!(
            o,
            r#"<text x="{}" y="{}">{label} {:.1}</text>"#,
            px1 + 6.0,
            s.y_px(v) + 4.0,
            v + 0.0
        );
    }
    for (m, d) in means.iter().zip(&diffs) {
        let _ = writeln!(
            o,
            r#"<circle cx="{}" cy="{}" r="3" fill="black"/>"#,
            fmt_f64(s.x_px(*m)),
            fmt_f64(s.y_px(*d))
        );
    }
    let _ = writeln!(o, "</g>");
    let _ = writeln!(
        o,
        r#"<text x="{}" y="{}" text-anchor="middle">Mean (mm)</text>"#,
        (px0 + px1) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        o,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">Difference (mm)</text>"#,
        (py0 + py1) / 2.0
    );
    let _ = writeln!(o, "</svg>");
    o
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validation::{bland_altman, Posture};

    fn results() -> Vec<TrialResult> {
        [(0.21, 0.19), (0.25, 0.26), (0.30, 0.27), (0.18, 0.185)]
            .iter()
            .enumerate()
            .map(|(i, (e, r))| TrialResult::new(Posture::Neutral, i as u32 + 1, [*e, 0.0], [*r, 0.0]).unwrap())
            .collect()
    }

    fn line_y(svg: &str, class: &str) -> f64 {
        let key = format!(r#"class="{class}""#);
        let start = svg.find(&key).unwrap();
        let rest = &svg[start..];
        let y = rest.find("y1=\"").unwrap() + 4;
        let end = y + rest[y..].find('"').unwrap();
        rest[y..end].parse().unwrap()
    }

    #[test]
    fn lines_read_back() {
        let r = results();
        let st = bland_altman(&r, GroundAxis::Ap).unwrap();
        let svg = bland_altman_svg(&r, &st);
        let s = SvgScale::parse(&svg).unwrap();
        for (class, v) in [
            ("mean", st.mean_diff),
            ("loa-low", st.loa_low),
            ("loa-high", st.loa_high),
        ] {
            assert!((s.y_mm(line_y(&svg, class)) - v * 1000.0).abs() < 1e-9);
        }
        assert!(svg.contains(">Mean (mm)<") && svg.contains(">Difference (mm)<"));
        assert_eq!(svg.matches("<circle").count(), 4);
    }

    #[test]
    fn degenerate_ranges_draw() {
        let r: Vec<TrialResult> = (1..=2)
            .map(|i| TrialResult::new(Posture::Neutral, i, [0.2, 0.0], [0.2, 0.0]).unwrap())
            .collect();
        let st = bland_altman(&r, GroundAxis::Ml).unwrap();
        let svg = bland_altman_svg(&r, &st);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
