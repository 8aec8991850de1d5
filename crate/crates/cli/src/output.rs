//! Files written into the output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use convseq::{BenchmarkReport, BenchmarkRun, GroundTruth, SequenceDecision};
use serde::Serialize;

use crate::error::{IoContext, Result};

pub const REPORT: &str = "report.json";
pub const PR_CURVE: &str = "pr_curve.csv";
pub const MATCHES: &str = "matches.csv";
pub const SEQ_LENGTHS: &str = "seq_lengths.csv";
pub const SEQ_HISTOGRAM: &str = "seq_length_hist.csv";
pub const ABLATION: &str = "ablation.csv";
pub const MANIFEST: &str = "manifest.json";
pub const PR_SVG: &str = "pr_curve.svg";

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self> {
        fs::create_dir_all(path).context(|| format!("cannot create {}", path.display()))?;
        Ok(Self(path.to_path_buf()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, text).context(|| format!("cannot write {}", p.display()))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_csv<T: Serialize>(&self, name: &str, rows: impl IntoIterator<Item = T>) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush().context(|| format!("cannot write {name}"))?;
        Ok(())
    }
}

#[derive(Serialize)]
struct MatchRow {
    query_start: usize,
    k: usize,
    predicted_ref: usize,
    truth: usize,
    score: f64,
    correct: bool,
}

#[derive(Serialize)]
struct SeqRow {
    start: usize,
    info_gain_length: usize,
    final_length: usize,
    seq_entropy: f64,
    truncated: bool,
}

#[derive(Serialize)]
struct HistRow {
    length: usize,
    count: usize,
}

pub fn write_report(out: &OutDir, report: &BenchmarkReport) -> Result<()> {
    out.write_json(REPORT, report)?;
    out.write_csv(PR_CURVE, report.pr_points.iter())
}

pub fn write_matches(out: &OutDir, run: &BenchmarkRun, gt: &GroundTruth) -> Result<()> {
    let rows = run.matches.iter().zip(&run.judged).map(|(m, &correct)| MatchRow {
        query_start: m.query_start,
        k: m.k,
        predicted_ref: m.best_ref_start,
        truth: gt.truth(m.query_start).unwrap_or(usize::MAX),
        score: m.best_score,
        correct,
    });
    out.write_csv(MATCHES, rows)
}

pub fn write_seq_lengths(out: &OutDir, decisions: &[SequenceDecision]) -> Result<()> {
    out.write_csv(
        SEQ_LENGTHS,
        decisions.iter().map(|d| SeqRow {
            start: d.start,
            info_gain_length: d.info_gain_length,
            final_length: d.final_length,
            seq_entropy: d.seq_entropy,
            truncated: d.truncated,
        }),
    )
}

/// `final_length -> count` over decided starts.
pub fn length_histogram(decisions: &[SequenceDecision]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for d in decisions {
        *h.entry(d.final_length).or_insert(0) += 1;
    }
    h
}

pub fn write_histogram(out: &OutDir, hist: &BTreeMap<usize, usize>) -> Result<()> {
    out.write_csv(
        SEQ_HISTOGRAM,
        hist.iter().map(|(&length, &count)| HistRow { length, count }),
    )
}
