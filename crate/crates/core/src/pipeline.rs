//! End-to-end benchmark: encode once, decide sequence lengths, match, evaluate.

use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::dataset::GroundTruth;
use crate::descriptor::ImageDescriptor;
use crate::encoding::{encode_rasters, encode_traverse, EncodedFrame};
use crate::error::{Error, Result};
use crate::evaluation::{summarize, BenchmarkReport, MatchRecord};
use crate::imaging::{GrayImage, Raster};
use crate::seqmatch::{argmax_first, PairScoreTable, SequenceMatchResult};
use crate::sequencer::{decide_all, SequenceDecision};

/// Encoded query and reference traverses with every pair score precomputed.
#[derive(Debug, Clone)]
pub struct Benchmark {
    cfg: PipelineConfig,
    queries: Vec<EncodedFrame>,
    references: Vec<ImageDescriptor>,
    table: PairScoreTable,
}

/// Everything produced by one benchmark pass.
#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub decisions: Vec<SequenceDecision>,
    pub matches: Vec<SequenceMatchResult>,
    pub records: Vec<MatchRecord>,
    pub judged: Vec<bool>,
    pub report: BenchmarkReport,
}

fn same_encoding(a: &PipelineConfig, b: &PipelineConfig) -> bool {
    (a.w1, a.h1, a.w2, a.h2, a.bins, a.entropy_radius) == (b.w1, b.h1, b.w2, b.h2, b.bins, b.entropy_radius)
        && a.et == b.et
}

impl Benchmark {
    pub fn from_images(query: &[GrayImage], reference: &[GrayImage], cfg: &PipelineConfig) -> Result<Self> {
        let queries = encode_traverse(query, cfg)?;
        let references = encode_traverse(reference, cfg)?
            .into_iter()
            .map(|f| f.descriptor)
            .collect();
        Self::from_encoded(queries, references, cfg)
    }

    pub fn from_rasters(query: &[Raster], reference: &[Raster], cfg: &PipelineConfig) -> Result<Self> {
        let queries = encode_rasters(query, cfg)?;
        let references = encode_rasters(reference, cfg)?
            .into_iter()
            .map(|f| f.descriptor)
            .collect();
        Self::from_encoded(queries, references, cfg)
    }

    pub fn from_encoded(
        queries: Vec<EncodedFrame>,
        references: Vec<ImageDescriptor>,
        cfg: &PipelineConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if queries.is_empty() || references.is_empty() {
            return Err(Error::Dataset("query and reference traverses must be non-empty".into()));
        }
        let table = PairScoreTable::compute(&queries, &references)?;
        Ok(Self {
            cfg: *cfg,
            queries,
            references,
            table,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn queries(&self) -> &[EncodedFrame] {
        &self.queries
    }

    pub fn references(&self) -> &[ImageDescriptor] {
        &self.references
    }

    pub fn pair_scores(&self) -> &PairScoreTable {
        &self.table
    }

    /// Sequencer decisions under `cfg`, which may change only the
    /// sequence-length parameters relative to the encoding configuration.
    pub fn decisions(&self, cfg: &PipelineConfig) -> Result<Vec<SequenceDecision>> {
        cfg.validate()?;
        if !same_encoding(cfg, &self.cfg) {
            return Err(Error::config(
                "sequencing configuration differs from the encoding configuration",
            ));
        }
        decide_all(&self.queries, cfg)
    }

    /// Runs the sequencer and the window search, then evaluates against `gt`.
    pub fn run(&self, cfg: &PipelineConfig, gt: &GroundTruth) -> Result<BenchmarkRun> {
        let decisions = self.decisions(cfg)?;
        self.run_with_decisions(decisions, gt)
    }

    pub fn run_with_decisions(&self, decisions: Vec<SequenceDecision>, gt: &GroundTruth) -> Result<BenchmarkRun> {
        let matches: Vec<SequenceMatchResult> = decisions
            .par_iter()
            .map(|d| self.table.match_sequence(d.start, d.final_length))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        self.finish(decisions, matches, gt)
    }

    fn finish(
        &self,
        decisions: Vec<SequenceDecision>,
        matches: Vec<SequenceMatchResult>,
        gt: &GroundTruth,
    ) -> Result<BenchmarkRun> {
        let records: Vec<MatchRecord> = matches
            .iter()
            .map(|m| MatchRecord {
                query_start: m.query_start,
                predicted_ref: m.best_ref_start,
                score: m.best_score,
            })
            .collect();
        if records.is_empty() {
            return Err(Error::Evaluation(
                "no query sequence could be matched (traverse shorter than the sequence length?)".into(),
            ));
        }
        let mean_len = matches.iter().map(|m| m.k as f64).sum::<f64>() / matches.len() as f64;
        let (report, judged) = summarize(
            &records,
            gt,
            self.queries.len(),
            self.references.len(),
            mean_len,
        )?;
        Ok(BenchmarkRun {
            decisions,
            matches,
            records,
            judged,
            report,
        })
    }

    /// Single-frame mode: every query frame matched on its own against every
    /// reference frame, evaluated like a sequence run with `k = 1`.
    pub fn single_frame_run(&self, gt: &GroundTruth) -> Result<BenchmarkRun> {
        let decisions = decide_all(&self.queries, &self.cfg.with_fixed_k(1))?;
        let matches: Vec<SequenceMatchResult> = self
            .single_frame_matches()
            .into_iter()
            .enumerate()
            .map(|(q, (best, score))| SequenceMatchResult {
                query_start: q,
                k: 1,
                best_ref_start: best,
                best_score: score,
                all_window_scores: self.table.query_row(q).to_vec(),
                pair_scores: vec![score],
            })
            .collect();
        self.finish(decisions, matches, gt)
    }

    /// Best reference per query frame using the single-image matcher alone.
    pub fn single_frame_matches(&self) -> Vec<(usize, f64)> {
        (0..self.queries.len())
            .map(|q| argmax_first(self.table.query_row(q)))
            .collect()
    }
}
