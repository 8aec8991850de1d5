//! Sliding-window sequence matching against the reference traverse.

use rayon::prelude::*;
use serde::Serialize;

use crate::descriptor::ImageDescriptor;
use crate::encoding::EncodedFrame;
use crate::error::{Error, Result};
use crate::matcher::match_images;
use crate::sequencer::QuerySequence;

/// Best reference window for one query sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceMatchResult {
    pub query_start: usize,
    pub k: usize,
    pub best_ref_start: usize,
    pub best_score: f64,
    #[serde(skip)]
    pub all_window_scores: Vec<f64>,
    #[serde(skip)]
    pub pair_scores: Vec<f64>,
}

/// Mean of the `k` one-to-one pair scores between a query sequence and a
/// reference window of the same length.
pub fn sequence_matching_func(members: &[EncodedFrame], window: &[ImageDescriptor]) -> Result<f64> {
    if members.len() != window.len() || members.is_empty() {
        return Err(Error::invariant(format!(
            "query sequence of {} frames against a window of {}",
            members.len(),
            window.len()
        )));
    }
    let mut sum = 0.0;
    for (q, r) in members.iter().zip(window) {
        sum += match_images(&q.query, r)?.value();
    }
    Ok(sum / members.len() as f64)
}

/// Evaluates every window start `itr` in `[0, n_refs - k]` and keeps the
/// highest score, breaking ties toward the lowest index. Returns `None` when
/// the reference traverse is shorter than `k`.
pub fn search_windows(
    n_refs: usize,
    k: usize,
    window_score: impl Fn(usize) -> Result<f64> + Sync,
) -> Result<Option<(usize, f64, Vec<f64>)>> {
    if k == 0 {
        return Err(Error::invariant("sequence length must be positive"));
    }
    if n_refs < k {
        return Ok(None);
    }
    let scores: Vec<f64> = (0..=n_refs - k)
        .into_par_iter()
        .map(&window_score)
        .collect::<Result<_>>()?;
    let (best, best_score) = argmax_first(&scores);
    Ok(Some((best, best_score, scores)))
}

/// Index of the maximum, lowest index among ties.
pub fn argmax_first(scores: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    (best, scores[best])
}

/// Algorithm 1 computed directly from descriptors.
pub fn match_sequence(
    qseq: &QuerySequence<'_>,
    refs: &[ImageDescriptor],
) -> Result<Option<SequenceMatchResult>> {
    let k = qseq.len();
    let found = search_windows(refs.len(), k, |itr| {
        sequence_matching_func(qseq.members, &refs[itr..itr + k])
    })?;
    let Some((best, best_score, all)) = found else {
        return Ok(None);
    };
    let pair_scores = qseq
        .members
        .iter()
        .zip(&refs[best..best + k])
        .map(|(q, r)| match_images(&q.query, r).map(|s| s.value()))
        .collect::<Result<_>>()?;
    Ok(Some(SequenceMatchResult {
        query_start: qseq.start(),
        k,
        best_ref_start: best,
        best_score,
        all_window_scores: all,
        pair_scores,
    }))
}

/// Every query-frame/reference-frame match score, computed once.
///
/// Overlapping windows reuse each pair up to `k` times, so the benchmark
/// fills this table instead of rescoring per window.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScoreTable {
    n_queries: usize,
    n_refs: usize,
    scores: Vec<f64>,
}

impl PairScoreTable {
    pub fn compute(queries: &[EncodedFrame], refs: &[ImageDescriptor]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = queries
            .par_iter()
            .map(|q| {
                refs.iter()
                    .map(|r| match_images(&q.query, r).map(|s| s.value()))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            n_queries: queries.len(),
            n_refs: refs.len(),
            scores: rows.concat(),
        })
    }

    pub fn n_queries(&self) -> usize {
        self.n_queries
    }

    pub fn n_refs(&self) -> usize {
        self.n_refs
    }

    #[inline]
    pub fn get(&self, query: usize, reference: usize) -> f64 {
        self.scores[query * self.n_refs + reference]
    }

    pub fn query_row(&self, query: usize) -> &[f64] {
        &self.scores[query * self.n_refs..(query + 1) * self.n_refs]
    }

    /// Same arithmetic as [`sequence_matching_func`], read from the table.
    pub fn window_score(&self, query_start: usize, ref_start: usize, k: usize) -> f64 {
        let mut sum = 0.0;
        for i in 0..k {
            sum += self.get(query_start + i, ref_start + i);
        }
        sum / k as f64
    }

    /// Algorithm 1 over the table for the sequence `[query_start, query_start + k)`.
    pub fn match_sequence(&self, query_start: usize, k: usize) -> Result<Option<SequenceMatchResult>> {
        if query_start + k > self.n_queries {
            return Err(Error::Range {
                index: query_start + k - 1,
                len: self.n_queries,
            });
        }
        let found = search_windows(self.n_refs, k, |itr| Ok(self.window_score(query_start, itr, k)))?;
        Ok(found.map(|(best, best_score, all)| SequenceMatchResult {
            query_start,
            k,
            best_ref_start: best,
            best_score,
            all_window_scores: all,
            pair_scores: (0..k).map(|i| self.get(query_start + i, best + i)).collect(),
        }))
    }
}
