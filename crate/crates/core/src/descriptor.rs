//! Regional HOG: per-cell orientation histograms and 2x2-block L2 normalization.

use std::io::{Read, Write};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::imaging::{
    compute_entropy_map, compute_gradients, image_entropy_scalar, EntropyMap, GradientMap,
    GrayImage,
};

/// Magnitude-weighted orientation histograms, one per `w2 x h2` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellHistogramGrid {
    rows: usize,
    cols: usize,
    bins: usize,
    hist: Vec<f64>,
}

impl CellHistogramGrid {
    /// Builds a grid from row-major cell histograms of `bins` entries each.
    pub fn from_cells(rows: usize, cols: usize, bins: usize, hist: Vec<f64>) -> Result<Self> {
        if hist.len() != rows * cols * bins {
            return Err(Error::config(format!(
                "{} histogram values for a {rows}x{cols}x{bins} grid",
                hist.len()
            )));
        }
        if hist.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::config("histogram bins must be non-negative"));
        }
        Ok(Self {
            rows,
            cols,
            bins,
            hist,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn cell(&self, row: usize, col: usize) -> &[f64] {
        let start = (row * self.cols + col) * self.bins;
        &self.hist[start..start + self.bins]
    }

    pub fn values(&self) -> &[f64] {
        &self.hist
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            hist: self.hist.iter().map(|v| v * alpha).collect(),
            ..self.clone()
        }
    }
}

/// `N` region descriptors of depth `4L`, stored row-major.
///
/// Every row is non-negative and has unit Euclidean norm, or is all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageDescriptor {
    n_regions: usize,
    depth: usize,
    data: Vec<f64>,
}

const NORM_TOLERANCE: f64 = 1e-6;

impl ImageDescriptor {
    /// Wraps precomputed rows, checking the unit-or-zero norm invariant.
    pub fn from_rows(n_regions: usize, depth: usize, data: Vec<f64>) -> Result<Self> {
        if depth == 0 || data.len() != n_regions * depth {
            return Err(Error::config(format!(
                "{} values for {n_regions} regions of depth {depth}",
                data.len()
            )));
        }
        for (i, row) in data.chunks_exact(depth).enumerate() {
            if row.iter().any(|v| v.is_nan() || *v < 0.0) {
                return Err(Error::config(format!("region {i} has a negative component")));
            }
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm != 0.0 && (norm - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::config(format!("region {i} has norm {norm}")));
            }
        }
        Ok(Self {
            n_regions,
            depth,
            data,
        })
    }

    /// Normalizes arbitrary non-negative rows to unit length (zero rows stay zero).
    pub fn normalized(n_regions: usize, depth: usize, mut data: Vec<f64>) -> Result<Self> {
        if depth == 0 || data.len() != n_regions * depth {
            return Err(Error::config("descriptor buffer does not match its shape"));
        }
        for row in data.chunks_exact_mut(depth) {
            l2_normalize(row);
        }
        Self::from_rows(n_regions, depth, data)
    }

    pub fn n_regions(&self) -> usize {
        self.n_regions
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn row(&self, region: usize) -> &[f64] {
        &self.data[region * self.depth..(region + 1) * self.depth]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.depth)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

fn l2_normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Hard-binned, magnitude-weighted orientation histogram per cell.
pub fn compute_cell_histograms(gm: &GradientMap, cfg: &PipelineConfig) -> Result<CellHistogramGrid> {
    if gm.width() != cfg.w1 || gm.height() != cfg.h1 {
        return Err(Error::config(format!(
            "gradient map is {}x{}, configuration expects {}x{}",
            gm.width(),
            gm.height(),
            cfg.w1,
            cfg.h1
        )));
    }
    if cfg.w2 == 0 || cfg.h2 == 0 || !cfg.w1.is_multiple_of(cfg.w2) || !cfg.h1.is_multiple_of(cfg.h2) {
        return Err(Error::config("image is not divisible into whole cells"));
    }
    if cfg.bins == 0 {
        return Err(Error::config("need at least one orientation bin"));
    }
    let (rows, cols, bins) = (cfg.grid_rows(), cfg.grid_cols(), cfg.bins);
    let bin_width = 180.0 / bins as f64;
    let mut hist = vec![0.0; rows * cols * bins];
    let (mag, ori) = (gm.magnitude(), gm.orientation());
    for y in 0..cfg.h1 {
        let row_base = (y / cfg.h2) * cols;
        for x in 0..cfg.w1 {
            let i = y * cfg.w1 + x;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            let bin = ((ori[i] / bin_width) as usize).min(bins - 1);
            hist[(row_base + x / cfg.w2) * bins + bin] += m;
        }
    }
    Ok(CellHistogramGrid {
        rows,
        cols,
        bins,
        hist,
    })
}

/// Top-left cell of the 2x2 block describing region `(row, col)`.
#[inline]
pub fn block_anchor(row: usize, col: usize, rows: usize, cols: usize) -> (usize, usize) {
    (row.min(rows - 2), col.min(cols - 2))
}

/// One `4L` descriptor per region from its 2x2 block, anchors clamped inward
/// on the last row and column.
pub fn block_normalize(chg: &CellHistogramGrid) -> Result<ImageDescriptor> {
    let (rows, cols, bins) = (chg.rows, chg.cols, chg.bins);
    if rows < 2 || cols < 2 {
        return Err(Error::config(format!(
            "block normalization needs at least 2x2 cells, got {rows}x{cols}"
        )));
    }
    let depth = 4 * bins;
    let mut data = Vec::with_capacity(rows * cols * depth);
    for r in 0..rows {
        for c in 0..cols {
            let (ar, ac) = block_anchor(r, c, rows, cols);
            let start = data.len();
            for (dr, dc) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                data.extend_from_slice(chg.cell(ar + dr, ac + dc));
            }
            l2_normalize(&mut data[start..]);
        }
    }
    Ok(ImageDescriptor {
        n_regions: rows * cols,
        depth,
        data,
    })
}

/// Full per-image artifacts: descriptor, entropy map and entropy scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBundle {
    pub descriptor: ImageDescriptor,
    pub entropy_map: EntropyMap,
    pub image_entropy: f64,
}

pub fn describe_image(img: &GrayImage, cfg: &PipelineConfig) -> Result<ImageBundle> {
    let gm = compute_gradients(img);
    let descriptor = block_normalize(&compute_cell_histograms(&gm, cfg)?)?;
    let entropy_map = compute_entropy_map(img, cfg);
    let image_entropy = image_entropy_scalar(&entropy_map);
    Ok(ImageBundle {
        descriptor,
        entropy_map,
        image_entropy,
    })
}

/// Binary cache of reference descriptors.
///
/// Layout: magic `CSQD`, then `version, W1, H1, W2, H2, L` as little-endian
/// `u32`, then for each image `N * 4L` little-endian `f32` values.
pub mod cache {
    use super::*;

    pub const MAGIC: [u8; 4] = *b"CSQD";
    pub const VERSION: u32 = 1;
    pub const HEADER_LEN: usize = 4 + 6 * 4;

    fn header(cfg: &PipelineConfig) -> Result<[u8; HEADER_LEN]> {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(&MAGIC);
        let fields = [VERSION as usize, cfg.w1, cfg.h1, cfg.w2, cfg.h2, cfg.bins];
        for (i, v) in fields.into_iter().enumerate() {
            let v = u32::try_from(v).map_err(|_| Error::Cache(format!("field {v} exceeds u32")))?;
            out[4 + 4 * i..8 + 4 * i].copy_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn write<W: Write>(mut w: W, cfg: &PipelineConfig, descs: &[ImageDescriptor]) -> Result<()> {
        w.write_all(&header(cfg)?)?;
        let (n, depth) = (cfg.n_regions(), cfg.depth());
        let mut buf = Vec::with_capacity(n * depth * 4);
        for d in descs {
            if d.n_regions() != n || d.depth() != depth {
                return Err(Error::Cache("descriptor shape does not match configuration".into()));
            }
            buf.clear();
            for v in d.as_slice() {
                buf.extend_from_slice(&(*v as f32).to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a cache written for exactly `cfg`'s geometry.
    ///
    /// Values round-trip through `f32`, so loaded rows are unit-norm only to
    /// single precision.
    pub fn read<R: Read>(mut r: R, cfg: &PipelineConfig) -> Result<Vec<ImageDescriptor>> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < HEADER_LEN || bytes[..4] != MAGIC {
            return Err(Error::Cache("missing magic".into()));
        }
        if bytes[..HEADER_LEN] != header(cfg)? {
            return Err(Error::Cache("header does not match configuration".into()));
        }
        let (n, depth) = (cfg.n_regions(), cfg.depth());
        let per_image = n * depth * 4;
        let body = &bytes[HEADER_LEN..];
        if body.len() % per_image != 0 {
            return Err(Error::Cache(format!(
                "body of {} bytes is not a whole number of {per_image}-byte images",
                body.len()
            )));
        }
        body.chunks_exact(per_image)
            .map(|chunk| {
                let data = chunk
                    .chunks_exact(4)
                    .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
                    .collect();
                ImageDescriptor::from_rows(n, depth, data)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(w1: usize, h1: usize, cell: usize) -> PipelineConfig {
        PipelineConfig {
            w1,
            h1,
            w2: cell,
            h2: cell,
            ..PipelineConfig::default()
        }
    }

    fn textured(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| {
            let v = (x * 7 + y * 3) % 23 * 9 + ((x / 4 + y / 5) % 3) * 20;
            v.min(255) as u8
        })
    }

    #[test]
    fn zero_gradients_give_zero_histograms() {
        let c = cfg(8, 8, 4);
        let gm = GradientMap::new(8, 8, vec![0.0; 64], vec![0.0; 64]).unwrap();
        let grid = compute_cell_histograms(&gm, &c).unwrap();
        assert!(grid.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_vote() {
        let c = cfg(8, 8, 4);
        let mut mag = vec![0.0; 64];
        mag[9] = 7.0;
        let gm = GradientMap::new(8, 8, mag, vec![0.0; 64]).unwrap();
        let grid = compute_cell_histograms(&gm, &c).unwrap();
        assert_eq!(grid.cell(0, 0), &[7.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(grid.cell(1, 1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn alternating_orientations_split_between_two_bins() {
        let c = cfg(8, 8, 4);
        let ori: Vec<f64> = (0..64)
            .map(|i| if (i % 8 + i / 8) % 2 == 0 { 10.0 } else { 100.0 })
            .collect();
        let gm = GradientMap::new(8, 8, vec![1.0; 64], ori).unwrap();
        let grid = compute_cell_histograms(&gm, &c).unwrap();
        for (r, col) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_eq!(grid.cell(r, col), &[8.0, 0.0, 0.0, 0.0, 8.0, 0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn histograms_reject_wrong_dimensions() {
        let gm = GradientMap::new(8, 8, vec![0.0; 64], vec![0.0; 64]).unwrap();
        assert!(matches!(
            compute_cell_histograms(&gm, &cfg(16, 8, 4)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn votes_are_conserved() {
        let c = cfg(32, 24, 8);
        let gm = compute_gradients(&textured(32, 24));
        let grid = compute_cell_histograms(&gm, &c).unwrap();
        let total: f64 = gm.magnitude().iter().sum();
        let binned: f64 = grid.values().iter().sum();
        assert!((total - binned).abs() <= 1e-6 * total);
    }

    #[test]
    fn zero_grid_normalizes_to_zero() {
        let grid = CellHistogramGrid::from_cells(3, 3, 8, vec![0.0; 72]).unwrap();
        let d = block_normalize(&grid).unwrap();
        assert!(d.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_cells_concatenate_to_half_entries() {
        let mut hist = vec![0.0; 4 * 8];
        for cell in 0..4 {
            hist[cell * 8 + cell] = 1.0;
        }
        let grid = CellHistogramGrid::from_cells(2, 2, 8, hist).unwrap();
        let d = block_normalize(&grid).unwrap();
        let mut expected = vec![0.0; 32];
        for cell in 0..4 {
            expected[cell * 8 + cell] = 0.5;
        }
        for row in d.rows() {
            assert_eq!(row, expected.as_slice());
        }
    }

    #[test]
    fn positive_scaling_is_normalized_away() {
        let c = cfg(32, 32, 8);
        let grid = compute_cell_histograms(&compute_gradients(&textured(32, 32)), &c).unwrap();
        let a = block_normalize(&grid).unwrap();
        let b = block_normalize(&grid.scaled(3.7)).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn block_anchors_clamp_inward() {
        assert_eq!(block_anchor(0, 0, 4, 5), (0, 0));
        assert_eq!(block_anchor(3, 4, 4, 5), (2, 3));
        assert_eq!(block_anchor(2, 1, 4, 5), (2, 1));
    }

    #[test]
    fn too_small_grid_is_rejected() {
        let grid = CellHistogramGrid::from_cells(1, 3, 8, vec![0.0; 24]).unwrap();
        assert!(matches!(block_normalize(&grid), Err(Error::Config(_))));
    }

    #[test]
    fn region_descriptor_ignores_gradients_outside_its_block() {
        let c = cfg(32, 32, 8);
        let gm = compute_gradients(&textured(32, 32));
        let base = block_normalize(&compute_cell_histograms(&gm, &c).unwrap()).unwrap();
        // region (1,1) uses cells rows 1..=2, cols 1..=2: pixels [8,24) x [8,24)
        let mut mag = gm.magnitude().to_vec();
        for y in 0..32 {
            for x in 0..32 {
                if !((8..24).contains(&x) && (8..24).contains(&y)) {
                    mag[y * 32 + x] = mag[y * 32 + x] * 5.0 + 3.0;
                }
            }
        }
        let perturbed = GradientMap::new(32, 32, mag, gm.orientation().to_vec()).unwrap();
        let other = block_normalize(&compute_cell_histograms(&perturbed, &c).unwrap()).unwrap();
        let region = 4 + 1;
        assert_eq!(base.row(region), other.row(region));
        assert_ne!(base.row(0), other.row(0));
    }

    #[test]
    fn describe_constant_image() {
        let c = cfg(32, 32, 8);
        let bundle = describe_image(&GrayImage::filled(32, 32, 77), &c).unwrap();
        assert!(bundle.descriptor.as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(bundle.image_entropy, 0.0);
    }

    #[test]
    fn describe_is_deterministic_and_compositional() {
        let c = cfg(32, 32, 8);
        let img = textured(32, 32);
        let a = describe_image(&img, &c).unwrap();
        let b = describe_image(&img, &c).unwrap();
        assert_eq!(a, b);

        let gm = compute_gradients(&img);
        let desc = block_normalize(&compute_cell_histograms(&gm, &c).unwrap()).unwrap();
        let em = compute_entropy_map(&img, &c);
        assert_eq!(a.descriptor, desc);
        assert_eq!(a.image_entropy, image_entropy_scalar(&em));
        assert_eq!(a.entropy_map, em);
    }

    #[test]
    fn from_rows_checks_norms() {
        assert!(ImageDescriptor::from_rows(1, 2, vec![0.6, 0.8]).is_ok());
        assert!(ImageDescriptor::from_rows(1, 2, vec![0.0, 0.0]).is_ok());
        assert!(ImageDescriptor::from_rows(1, 2, vec![0.5, 0.5]).is_err());
        assert!(ImageDescriptor::from_rows(1, 2, vec![-0.6, 0.8]).is_err());
    }

    #[test]
    fn cache_round_trip_at_single_precision() {
        let c = cfg(32, 32, 8);
        let descs: Vec<_> = (0..3)
            .map(|s| {
                let img = GrayImage::from_fn(32, 32, |x, y| ((x * (s + 3) + y * 11) % 200) as u8);
                describe_image(&img, &c).unwrap().descriptor
            })
            .collect();
        let mut buf = Vec::new();
        cache::write(&mut buf, &c, &descs).unwrap();
        assert_eq!(buf.len(), cache::HEADER_LEN + 3 * 16 * 32 * 4);
        assert_eq!(&buf[..4], b"CSQD");
        let back = cache::read(buf.as_slice(), &c).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in descs.iter().zip(&back) {
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert!((x - y).abs() < 1e-7);
            }
        }
        let other = PipelineConfig { bins: 9, ..c };
        assert!(matches!(cache::read(buf.as_slice(), &other), Err(Error::Cache(_))));
        assert!(matches!(
            cache::read(&buf[..buf.len() - 1], &c),
            Err(Error::Cache(_))
        ));
    }
}
