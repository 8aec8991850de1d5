//! Regional convolutional matching: cosine score matrix, row max-pooling, mean.

use rayon::prelude::*;

use crate::descriptor::ImageDescriptor;
use crate::error::{Error, Result};
use crate::saliency::QueryDescriptor;

/// Dot products this close to 1 are reported as exactly 1. Rows are unit
/// length only up to rounding, and a region matched against itself must
/// score exactly 1.
const UNIT_SNAP: f64 = 1e-12;

/// Similarity of two images, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MatchScore(f64);

impl MatchScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<MatchScore> for f64 {
    fn from(s: MatchScore) -> f64 {
        s.0
    }
}

/// `G x N` cosine similarities between query ROI rows and reference regions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: usize,
    cols: usize,
    scores: Vec<f64>,
}

impl ScoreMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.scores[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.scores[i * self.cols..(i + 1) * self.cols]
    }

    /// Max over each row, then the arithmetic mean of those maxima.
    pub fn pooled_score(&self) -> MatchScore {
        let sum: f64 = (0..self.rows)
            .map(|i| self.row(i).iter().copied().fold(0.0, f64::max))
            .sum();
        MatchScore(sum / self.rows as f64)
    }
}

#[inline]
fn finish(dot: f64) -> f64 {
    if dot >= 1.0 - UNIT_SNAP {
        1.0
    } else if dot > 0.0 {
        dot
    } else {
        0.0
    }
}

/// Dot product summed strictly left to right.
///
/// The tiled kernel accumulates each pair in the same order, so both paths
/// agree bit for bit.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

fn check_depth(q: &QueryDescriptor, r: &ImageDescriptor) -> Result<()> {
    if q.depth() != r.depth() {
        return Err(Error::config(format!(
            "query depth {} does not match reference depth {}",
            q.depth(),
            r.depth()
        )));
    }
    Ok(())
}

/// The full `G x N` product `Q * R^T`.
pub fn score_matrix(q: &QueryDescriptor, r: &ImageDescriptor) -> Result<ScoreMatrix> {
    check_depth(q, r)?;
    let (rows, cols) = (q.n_rows(), r.n_regions());
    let mut scores = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let qi = q.row(i);
        scores.extend(r.rows().map(|rj| finish(dot(qi, rj))));
    }
    Ok(ScoreMatrix { rows, cols, scores })
}

/// Side of the square register tile of the fused kernel.
const TILE: usize = 4;

/// Reference rows interleaved in groups of [`TILE`], depth-major inside each
/// group, so one load yields the same component of four rows. The last group
/// is zero-padded; a zero row scores 0 and never raises a maximum.
fn pack_panels(r: &ImageDescriptor) -> Vec<f64> {
    let (n, depth) = (r.n_regions(), r.depth());
    let groups = n.div_ceil(TILE);
    let mut panels = vec![0.0; groups * depth * TILE];
    for (j, row) in r.rows().enumerate() {
        let base = (j / TILE) * depth * TILE + j % TILE;
        for (d, &v) in row.iter().enumerate() {
            panels[base + d * TILE] = v;
        }
    }
    panels
}

#[inline(always)]
fn tile_4x4(q: [&[f64]; TILE], panel: &[f64], m: &mut [f64; TILE]) {
    let mut acc = [[0.0f64; TILE]; TILE];
    for (d, rv) in panel.chunks_exact(TILE).enumerate() {
        for i in 0..TILE {
            let qv = q[i][d];
            for j in 0..TILE {
                acc[i][j] += qv * rv[j];
            }
        }
    }
    for (mi, row) in m.iter_mut().zip(&acc) {
        for &v in row {
            *mi = mi.max(v);
        }
    }
}

/// Row maxima of `Q * R^T` without materializing the matrix.
///
/// Works on 4x4 tiles of (query row, reference row) pairs held in registers.
pub fn row_maxima(q: &QueryDescriptor, r: &ImageDescriptor) -> Result<Vec<f64>> {
    check_depth(q, r)?;
    let (g, depth) = (q.n_rows(), q.depth());
    let panels = pack_panels(r);
    let mut maxima = vec![0.0f64; g];
    let mut i = 0;
    while i + TILE <= g {
        let rows = [q.row(i), q.row(i + 1), q.row(i + 2), q.row(i + 3)];
        let mut m = [0.0f64; TILE];
        for panel in panels.chunks_exact(depth * TILE) {
            tile_4x4(rows, panel, &mut m);
        }
        for (k, v) in m.into_iter().enumerate() {
            maxima[i + k] = finish(v);
        }
        i += TILE;
    }
    for (k, slot) in maxima.iter_mut().enumerate().skip(i) {
        let qk = q.row(k);
        *slot = finish(r.rows().map(|rj| dot(qk, rj)).fold(0.0, f64::max));
    }
    Ok(maxima)
}

/// Max-pool each query ROI over all reference regions, then average.
pub fn match_images(q: &QueryDescriptor, r: &ImageDescriptor) -> Result<MatchScore> {
    if q.n_rows() == 0 {
        return Err(Error::invariant("query has no regions"));
    }
    let maxima = row_maxima(q, r)?;
    let sum: f64 = maxima.iter().sum();
    Ok(MatchScore(sum / maxima.len() as f64))
}

/// Scores one query against every reference, in parallel.
pub fn match_against_all(q: &QueryDescriptor, refs: &[ImageDescriptor]) -> Result<Vec<f64>> {
    refs.par_iter()
        .map(|r| match_images(q, r).map(MatchScore::value))
        .collect()
}
