//! Agreement between the estimated centre-of-mass ground projection and
//! the reference centre of pressure.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiplier of the standard deviation for the limits of agreement.
pub const LOA_Z: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Posture {
    FullExtension,
    ArmsBackward,
    Neutral,
    ArmsForward,
    FrontReach,
    LeftReach,
    LeftArmRaised,
    RightArmRaised,
    RightReach,
}

impl Posture {
    /// Report order.
    pub const ALL: [Posture; 9] = [
        Posture::FullExtension,
        Posture::ArmsBackward,
        Posture::Neutral,
        Posture::ArmsForward,
        Posture::FrontReach,
        Posture::LeftReach,
        Posture::LeftArmRaised,
        Posture::RightArmRaised,
        Posture::RightReach,
    ];

    /// Human-readable label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Posture::FullExtension => "Full extension",
            Posture::ArmsBackward => "Arms backward",
            Posture::Neutral => "Neutral",
            Posture::ArmsForward => "Arms forward",
            Posture::FrontReach => "Front reach",
            Posture::LeftReach => "Left reach",
            Posture::LeftArmRaised => "Left arm raised",
            Posture::RightArmRaised => "Right arm raised",
            Posture::RightReach => "Right reach",
        }
    }

    /// Identifier used in manifests and file names.
    pub fn key(self) -> &'static str {
        match self {
            Posture::FullExtension => "full_extension",
            Posture::ArmsBackward => "arms_backward",
            Posture::Neutral => "neutral",
            Posture::ArmsForward => "arms_forward",
            Posture::FrontReach => "front_reach",
            Posture::LeftReach => "left_reach",
            Posture::LeftArmRaised => "left_arm_raised",
            Posture::RightArmRaised => "right_arm_raised",
            Posture::RightReach => "right_reach",
        }
    }
}

impl fmt::Display for Posture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Posture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Posture::ALL
            .into_iter()
            .find(|p| p.key() == s || p.label() == s)
            .ok_or_else(|| Error::UnknownLabel(format!("posture {s}")))
    }
}

/// Horizontal axis of the wheelchair frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundAxis {
    /// Anterior-posterior, wheelchair x.
    Ap,
    /// Medial-lateral, wheelchair z.
    Ml,
}

impl GroundAxis {
    pub const BOTH: [GroundAxis; 2] = [GroundAxis::Ap, GroundAxis::Ml];

    pub fn index(self) -> usize {
        match self {
            GroundAxis::Ap => 0,
            GroundAxis::Ml => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GroundAxis::Ap => "ap",
            GroundAxis::Ml => "ml",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub posture: Posture,
    pub trial: u32,
    /// Estimated (AP, ML) in metres.
    pub estimated: [f64; 2],
    /// Reference (AP, ML) in metres.
    pub reference: [f64; 2],
}

impl TrialResult {
    pub fn new(posture: Posture, trial: u32, estimated: [f64; 2], reference: [f64; 2]) -> Result<Self> {
        if trial == 0 {
            return Err(Error::MalformedDocument("trial indices start at 1".into()));
        }
        if estimated.iter().chain(&reference).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(format!("{posture} trial {trial}")));
        }
        Ok(Self {
            posture,
            trial,
            estimated,
            reference,
        })
    }

    pub fn diff(&self, axis: GroundAxis) -> f64 {
        self.estimated[axis.index()] - self.reference[axis.index()]
    }

    pub fn mean(&self, axis: GroundAxis) -> f64 {
        0.5 * (self.estimated[axis.index()] + self.reference[axis.index()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostureStats {
    pub posture: Posture,
    /// Mean difference (AP, ML), metres.
    pub accuracy: [f64; 2],
    /// Sample standard deviation of the difference (AP, ML), metres.
    pub precision: [f64; 2],
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlandAltmanStats {
    pub axis: GroundAxis,
    pub n: usize,
    pub mean_diff: f64,
    pub sd_diff: f64,
    pub loa_low: f64,
    pub loa_high: f64,
    pub pearson_rho: f64,
    /// One of the series has zero variance; `pearson_rho` is then 0.
    pub rho_degenerate: bool,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1); zero for a single value.
fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Pearson correlation, or `None` when either series is constant.
fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Accuracy and precision per posture, in report order; postures without
/// results are omitted.
pub fn posture_stats(results: &[TrialResult]) -> Result<Vec<PostureStats>> {
    if results.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(Posture::ALL
        .iter()
        .filter_map(|&posture| {
            let group: Vec<&TrialResult> = results.iter().filter(|r| r.posture == posture).collect();
            if group.is_empty() {
                return None;
            }
            let mut accuracy = [0.0; 2];
            let mut precision = [0.0; 2];
            for axis in GroundAxis::BOTH {
                let diffs: Vec<f64> = group.iter().map(|r| r.diff(axis)).collect();
                accuracy[axis.index()] = mean(&diffs);
                precision[axis.index()] = sample_sd(&diffs);
            }
            Some(PostureStats {
                posture,
                accuracy,
                precision,
                n: group.len(),
            })
        })
        .collect())
}

pub fn bland_altman(results: &[TrialResult], axis: GroundAxis) -> Result<BlandAltmanStats> {
    if results.len() < 2 {
        return Err(Error::TooFewResults(results.len()));
    }
    let diffs: Vec<f64> = results.iter().map(|r| r.diff(axis)).collect();
    let means: Vec<f64> = results.iter().map(|r| r.mean(axis)).collect();
    let mean_diff = mean(&diffs);
    let sd_diff = sample_sd(&diffs);
    let half = LOA_Z * sd_diff;
    let rho = pearson(&diffs, &means);
    Ok(BlandAltmanStats {
        axis,
        n: results.len(),
        mean_diff,
        sd_diff,
        loa_low: mean_diff - half,
        loa_high: mean_diff + half,
        pearson_rho: rho.unwrap_or(0.0),
        rho_degenerate: rho.is_none(),
    })
}

/// Metres to whole millimetres, never printing a negative zero.
pub fn format_mm(metres: f64) -> String {
    let mm = (metres * 1000.0).round();
    if mm == 0.0 {
        "0".to_string()
    } else {
        format!("{mm:.0}")
    }
}

pub const TABLE1_HEADER: &str = "Posture, AP Accuracy (mm), AP Precision (mm), ML Accuracy (mm), ML Precision (mm)";

/// One report row: label then accuracy and precision per axis, in mm.
pub fn table1_row(stats: &PostureStats) -> String {
    format!(
        "{}, {}, {}, {}, {}",
        stats.posture.label(),
        format_mm(stats.accuracy[0]),
        format_mm(stats.precision[0]),
        format_mm(stats.accuracy[1]),
        format_mm(stats.precision[1]),
    )
}

/// Report document: version line, header, then one row per posture in
/// report order.
pub fn render_table1(stats: &[PostureStats]) -> String {
    let mut sorted: Vec<&PostureStats> = stats.iter().collect();
    sorted.sort_by_key(|s| s.posture);
    let mut out = String::from("# format_version=1\n");
    out.push_str(TABLE1_HEADER);
    out.push('\n');
    for s in sorted {
        out.push_str(&table1_row(s));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn result(p: Posture, trial: u32, diff: [f64; 2], mean: [f64; 2]) -> TrialResult {
        let est = [mean[0] + diff[0] / 2.0, mean[1] + diff[1] / 2.0];
        let reference = [mean[0] - diff[0] / 2.0, mean[1] - diff[1] / 2.0];
        TrialResult::new(p, trial, est, reference).unwrap()
    }

    #[test]
    fn posture_labels_round_trip() {
        for p in Posture::ALL {
            assert_eq!(p.key().parse::<Posture>().unwrap(), p);
            assert_eq!(p.label().parse::<Posture>().unwrap(), p);
        }
        assert!("sideways".parse::<Posture>().is_err());
    }

    #[test]
    fn perfect_agreement() {
        let r: Vec<_> = (1..=3)
            .map(|t| TrialResult::new(Posture::Neutral, t, [0.2, 0.01], [0.2, 0.01]).unwrap())
            .collect();
        let s = posture_stats(&r).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].accuracy, [0.0, 0.0]);
        assert_eq!(s[0].precision, [0.0, 0.0]);
    }

    #[test]
    fn ap_triple() {
        let r: Vec<_> = [-0.010, -0.020, -0.030]
            .iter()
            .enumerate()
            .map(|(i, d)| result(Posture::FrontReach, i as u32 + 1, [*d, 0.0], [0.2, 0.0]))
            .collect();
        let s = posture_stats(&r).unwrap();
        assert_relative_eq!(s[0].accuracy[0], -0.020, epsilon = 1e-15);
        assert_relative_eq!(s[0].precision[0], 0.010, epsilon = 1e-15);
    }

    #[test]
    fn single_trial_precision_zero() {
        let r = [result(Posture::LeftReach, 1, [0.004, -0.002], [0.2, 0.0])];
        let s = posture_stats(&r).unwrap();
        assert_eq!(s[0].precision, [0.0, 0.0]);
        assert_relative_eq!(s[0].accuracy[0], 0.004, epsilon = 1e-15);
        assert!(matches!(posture_stats(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn bland_altman_examples() {
        let r: Vec<_> = (1..=3)
            .map(|i| result(Posture::Neutral, i, [i as f64, 0.0], [10.0 * i as f64, 5.0]))
            .collect();
        let ba = bland_altman(&r, GroundAxis::Ap).unwrap();
        assert_relative_eq!(ba.mean_diff, 2.0, epsilon = 1e-12);
        assert_relative_eq!(ba.sd_diff, 1.0, epsilon = 1e-12);
        assert_relative_eq!(ba.loa_low, 0.04, epsilon = 1e-12);
        assert_relative_eq!(ba.loa_high, 3.96, epsilon = 1e-12);
        assert_relative_eq!(ba.pearson_rho, 1.0, epsilon = 1e-12);
        assert!(!ba.rho_degenerate);

        let ml = bland_altman(&r, GroundAxis::Ml).unwrap();
        assert_eq!((ml.mean_diff, ml.loa_low, ml.loa_high), (0.0, 0.0, 0.0));
        assert!(ml.rho_degenerate);
        assert_eq!(ml.pearson_rho, 0.0);

        assert!(matches!(
            bland_altman(&r[..1], GroundAxis::Ap),
            Err(Error::TooFewResults(1))
        ));
    }

    #[test]
    fn table_rows() {
        let s = PostureStats {
            posture: Posture::FullExtension,
            accuracy: [-0.033, 0.005],
            precision: [0.010, 0.005],
            n: 3,
        };
        assert_eq!(table1_row(&s), "Full extension, -33, 10, 5, 5");
        let s = PostureStats {
            posture: Posture::RightArmRaised,
            accuracy: [-0.0004, -0.001],
            precision: [0.0, 0.0],
            n: 3,
        };
        assert_eq!(table1_row(&s), "Right arm raised, 0, 0, -1, 0");
        assert_eq!(format_mm(-1e-9), "0");
    }

    proptest! {
        #[test]
        fn limits_symmetric(d in prop::collection::vec(-0.1f64..0.1, 2..30)) {
            let r: Vec<_> = d.iter().enumerate()
                .map(|(i, v)| result(Posture::Neutral, i as u32 + 1, [*v, 0.0], [0.2 + v, 0.0]))
                .collect();
            let ba = bland_altman(&r, GroundAxis::Ap).unwrap();
            let hi = ba.loa_high - ba.mean_diff;
            let lo = ba.mean_diff - ba.loa_low;
            prop_assert!((hi - lo).abs() <= 1e-15 * hi.abs().max(1e-3));
            prop_assert!(ba.loa_low <= ba.mean_diff && ba.mean_diff <= ba.loa_high);
            prop_assert!(ba.pearson_rho.abs() <= 1.0);
        }

        #[test]
        fn rho_affine_invariant(
            d in prop::collection::vec(-0.1f64..0.1, 3..30),
            m in prop::collection::vec(0.0f64..0.5, 30),
            scale in 0.1f64..10.0,
            shift in -1.0f64..1.0,
        ) {
            let make = |k: f64, c: f64| -> Vec<TrialResult> {
                d.iter().zip(&m).enumerate()
                    .map(|(i, (dv, mv))| result(Posture::Neutral, i as u32 + 1, [k * dv, 0.0], [k * mv + c, 0.0]))
                    .collect()
            };
            let a = bland_altman(&make(1.0, 0.0), GroundAxis::Ap).unwrap();
            let b = bland_altman(&make(scale, shift), GroundAxis::Ap).unwrap();
            prop_assume!(!a.rho_degenerate);
            prop_assert!((a.pearson_rho - b.pearson_rho).abs() < 1e-9);
        }
    }
}
