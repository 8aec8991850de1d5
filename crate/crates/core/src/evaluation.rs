//! Accuracy, precision-recall, AUC, PCU and encoding-time measurement.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::dataset::GroundTruth;
use crate::encoding::encode_raster;
use crate::error::{Error, Result};
use crate::imaging::Raster;

/// One matched query: its sequence start, predicted reference start and score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub query_start: usize,
    pub predicted_ref: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub precision: f64,
    pub recall: f64,
}

pub fn judge(records: &[MatchRecord], gt: &GroundTruth) -> Result<Vec<bool>> {
    records
        .iter()
        .map(|r| gt.is_correct(r.query_start, r.predicted_ref))
        .collect()
}

/// Correct matches over all matched queries.
pub fn accuracy(judged: &[bool]) -> Result<f64> {
    if judged.is_empty() {
        return Err(Error::Evaluation("no match records".into()));
    }
    let correct = judged.iter().filter(|&&c| c).count();
    Ok(correct as f64 / judged.len() as f64)
}

/// Precision and recall at every distinct score threshold, highest first.
///
/// A record is accepted when its score is at least the threshold. False
/// negatives are correct records that were rejected. Recall is reported as 0
/// when no record is correct.
pub fn pr_curve(records: &[MatchRecord], judged: &[bool]) -> Result<Vec<PrPoint>> {
    if records.is_empty() {
        return Err(Error::Evaluation("no match records".into()));
    }
    if records.len() != judged.len() {
        return Err(Error::Evaluation(format!(
            "{} records but {} judgments",
            records.len(),
            judged.len()
        )));
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[b].score.total_cmp(&records[a].score));
    let total_correct = judged.iter().filter(|&&c| c).count();

    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = records[order[i]].score;
        while i < order.len() && records[order[i]].score == threshold {
            if judged[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(pr_point(tp, fp, total_correct - tp));
    }
    Ok(points)
}

fn pr_point(tp: usize, fp: usize, fn_: usize) -> PrPoint {
    let precision = if tp + fp == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    PrPoint { precision, recall }
}

/// Trapezoidal area under precision-over-recall, starting from
/// `(recall 0, precision of the first point)`.
pub fn auc_pr(points: &[PrPoint]) -> Result<f64> {
    let first = points
        .first()
        .ok_or_else(|| Error::Evaluation("empty precision-recall curve".into()))?;
    let mut area = 0.0;
    let (mut r0, mut p0) = (0.0, first.precision);
    for p in points {
        area += (p.recall - r0) * (p.precision + p0) / 2.0;
        r0 = p.recall;
        p0 = p.precision;
    }
    Ok(area.clamp(0.0, 1.0))
}

/// Precision with every record accepted.
pub fn precision_at_full_recall(points: &[PrPoint]) -> Result<f64> {
    points
        .last()
        .map(|p| p.precision)
        .ok_or_else(|| Error::Evaluation("empty precision-recall curve".into()))
}

/// Performance-per-compute-unit: `P_R100 * log10(t_e_max / t_e + 9)`.
pub fn pcu(p_r100: f64, t_e: f64, t_e_max: f64) -> Result<f64> {
    if t_e.is_nan() || t_e <= 0.0 || t_e_max.is_nan() || t_e_max <= 0.0 {
        return Err(Error::Evaluation(format!(
            "encoding times must be positive (t_e = {t_e}, t_e_max = {t_e_max})"
        )));
    }
    Ok(p_r100 * (t_e_max / t_e + 9.0).log10())
}

/// Mean wall-clock seconds to encode one frame (standardize, gradients,
/// entropy map, HOG, normalization, ROI). Runs serially; the first frame is
/// encoded once untimed as warm-up.
pub fn time_encoding(frames: &[Raster], cfg: &PipelineConfig) -> Result<f64> {
    let first = frames
        .first()
        .ok_or_else(|| Error::Evaluation("cannot time an empty traverse".into()))?;
    cfg.validate()?;
    std::hint::black_box(encode_raster(first, cfg)?);
    let timed: &[Raster] = if frames.len() > 1 { &frames[1..] } else { frames };
    let started = Instant::now();
    for f in timed {
        std::hint::black_box(encode_raster(f, cfg)?);
    }
    let secs = started.elapsed().as_secs_f64() / timed.len() as f64;
    Ok(secs.max(1e-9))
}

/// Timing figures; kept apart because they vary run to run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    /// Mean per-frame encoding time, seconds.
    pub t_e_frame: f64,
    /// Per-frame time scaled by the mean sequence length.
    pub t_e: f64,
    pub t_e_max: f64,
    pub pcu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub n_queries: usize,
    pub n_references: usize,
    pub n_matched: usize,
    pub n_correct: usize,
    pub tolerance: usize,
    pub accuracy: f64,
    pub auc_pr: f64,
    pub p_r100: f64,
    pub mean_sequence_length: f64,
    pub pr_points: Vec<PrPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingReport>,
}

/// Accuracy and PR summary of a judged record set; timing is attached separately.
pub fn summarize(
    records: &[MatchRecord],
    gt: &GroundTruth,
    n_queries: usize,
    n_references: usize,
    mean_sequence_length: f64,
) -> Result<(BenchmarkReport, Vec<bool>)> {
    let judged = judge(records, gt)?;
    let pr_points = pr_curve(records, &judged)?;
    let report = BenchmarkReport {
        n_queries,
        n_references,
        n_matched: records.len(),
        n_correct: judged.iter().filter(|&&c| c).count(),
        tolerance: gt.tolerance(),
        accuracy: accuracy(&judged)?,
        auc_pr: auc_pr(&pr_points)?,
        p_r100: precision_at_full_recall(&pr_points)?,
        mean_sequence_length,
        pr_points,
        timing: None,
    };
    Ok((report, judged))
}

impl BenchmarkReport {
    /// Fills in `timing` from a per-frame encoding time.
    pub fn attach_timing(&mut self, t_e_frame: f64, t_e_max: f64) -> Result<()> {
        let t_e = t_e_frame * self.mean_sequence_length.max(1.0);
        self.timing = Some(TimingReport {
            t_e_frame,
            t_e,
            t_e_max,
            pcu: pcu(self.p_r100, t_e, t_e_max)?,
        });
        Ok(())
    }
}

/// Plain SVG line plot of a PR curve on unit axes.
pub fn render_pr_svg(points: &[PrPoint], title: &str) -> String {
    const SIZE: f64 = 400.0;
    const PAD: f64 = 50.0;
    let sx = |r: f64| PAD + r * SIZE;
    let sy = |p: f64| PAD + (1.0 - p) * SIZE;
    let mut s = String::new();
    let total = SIZE + 2.0 * PAD;
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
    );
    for i in 0..=10 {
        let v = i as f64 / 10.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{v:.1}</text>"#,
            sx(v),
            PAD + SIZE + 15.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{v:.1}</text>"#,
            PAD - 5.0,
            sy(v) + 3.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">Recall</text>"#,
        PAD + SIZE / 2.0,
        PAD + SIZE + 35.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 15 {:.1})">Precision</text>"#,
        PAD + SIZE / 2.0,
        PAD + SIZE / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="30" font-size="14" text-anchor="middle">{}</text>"#,
        PAD + SIZE / 2.0,
        xml_escape(title)
    );
    if let Some(first) = points.first() {
        let mut path = format!("{:.2},{:.2}", sx(0.0), sy(first.precision));
        for p in points {
            let _ = write!(path, " {:.2},{:.2}", sx(p.recall), sy(p.precision));
        }
        let _ = writeln!(
            s,
            r#"<polyline points="{path}" fill="none" stroke="steelblue" stroke-width="2"/>"#
        );
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::DEFAULT_T_E_MAX;

    fn rec(q: usize, p: usize, s: f64) -> MatchRecord {
        MatchRecord {
            query_start: q,
            predicted_ref: p,
            score: s,
        }
    }

    fn worked_example() -> (Vec<MatchRecord>, Vec<bool>) {
        let records = vec![rec(0, 0, 0.9), rec(1, 1, 0.8), rec(2, 9, 0.7), rec(3, 3, 0.6)];
        (records, vec![true, true, false, true])
    }

    #[test]
    fn judge_with_tolerances() {
        let gt = GroundTruth::new([(0, 5)].into_iter().collect(), 2);
        let j = judge(&[rec(0, 5, 1.0), rec(0, 7, 1.0), rec(0, 8, 1.0), rec(0, 3, 1.0)], &gt).unwrap();
        assert_eq!(j, vec![true, true, false, true]);
        let tight = gt.clone().with_tolerance(1);
        assert_eq!(judge(&[rec(0, 7, 1.0)], &tight).unwrap(), vec![false]);
        assert!(matches!(judge(&[rec(9, 0, 1.0)], &gt), Err(Error::Evaluation(_))));
    }

    #[test]
    fn accuracy_ratios() {
        assert_eq!(accuracy(&[true; 4]).unwrap(), 1.0);
        assert_eq!(accuracy(&[false; 3]).unwrap(), 0.0);
        let seven: Vec<bool> = (0..10).map(|i| i < 7).collect();
        assert_eq!(accuracy(&seven).unwrap(), 0.7);
        assert!(accuracy(&[]).is_err());
    }

    #[test]
    fn worked_pr_curve() {
        let (records, judged) = worked_example();
        let pts = pr_curve(&records, &judged).unwrap();
        let expected = [(1.0, 1.0 / 3.0), (1.0, 2.0 / 3.0), (2.0 / 3.0, 2.0 / 3.0), (0.75, 1.0)];
        assert_eq!(pts.len(), 4);
        for (p, (ep, er)) in pts.iter().zip(expected) {
            assert!((p.precision - ep).abs() < 1e-12 && (p.recall - er).abs() < 1e-12);
        }
        // hand integration: 1/3 + 1/3 + 0 + (1/3)(2/3 + 3/4)/2 = 65/72
        assert!((auc_pr(&pts).unwrap() - 65.0 / 72.0).abs() < 1e-12);
        assert_eq!(precision_at_full_recall(&pts).unwrap(), 0.75);
    }

    #[test]
    fn top_scored_error_gives_zero_first_precision() {
        let records = vec![rec(0, 9, 0.95), rec(1, 1, 0.5), rec(2, 2, 0.4)];
        let judged = vec![false, true, true];
        let pts = pr_curve(&records, &judged).unwrap();
        assert_eq!(pts[0], PrPoint { precision: 0.0, recall: 0.0 });
        assert_eq!(pts[1], PrPoint { precision: 0.5, recall: 0.5 });
        assert!((pts[2].precision - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(pts[2].recall, 1.0);
    }

    #[test]
    fn ties_share_a_threshold() {
        let records = vec![rec(0, 0, 0.5), rec(1, 1, 0.5), rec(2, 2, 0.5)];
        let pts = pr_curve(&records, &[true, false, true]).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].precision - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(pts[0].recall, 1.0);
    }

    #[test]
    fn all_correct_curve_has_unit_area() {
        let records: Vec<_> = (0..6).map(|i| rec(i, i, 1.0 - i as f64 * 0.1)).collect();
        let pts = pr_curve(&records, &[true; 6]).unwrap();
        assert!(pts.iter().all(|p| p.precision == 1.0));
        assert_eq!(auc_pr(&pts).unwrap(), 1.0);
        assert_eq!(auc_pr(&[PrPoint { precision: 1.0, recall: 1.0 }]).unwrap(), 1.0);
        assert!(auc_pr(&[]).is_err());
    }

    #[test]
    fn pcu_values() {
        assert_eq!(DEFAULT_T_E_MAX, 0.77);
        assert_eq!(pcu(0.6, 0.77, 0.77).unwrap(), 0.6);
        let v = pcu(0.5, 0.77 / 91.0, 0.77).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(pcu(0.5, 0.0, 0.77).is_err());
        assert!(pcu(0.5, 0.1, -1.0).is_err());
        assert!(pcu(0.5, 0.1, 0.77).unwrap() > pcu(0.5, 0.2, 0.77).unwrap());
    }

    #[test]
    fn timing_is_positive() {
        let cfg = PipelineConfig {
            w1: 32,
            h1: 32,
            w2: 8,
            h2: 8,
            ..PipelineConfig::default()
        };
        let frames: Vec<Raster> = (0..3)
            .map(|i| Raster::gray(40, 30, (0..1200).map(|p| ((p * (i + 3)) % 256) as u8).collect()).unwrap())
            .collect();
        assert!(time_encoding(&frames, &cfg).unwrap() > 0.0);
        assert!(time_encoding(&frames[..1], &cfg).unwrap() > 0.0);
        assert!(time_encoding(&[], &cfg).is_err());
    }

    #[test]
    fn svg_has_axes_and_curve() {
        let (records, judged) = worked_example();
        let svg = render_pr_svg(&pr_curve(&records, &judged).unwrap(), "a<b");
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("Recall") && svg.contains("Precision"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("a&lt;b"));
    }
}
