//! Entropy-based region-of-interest selection for query images.

use crate::config::PipelineConfig;
use crate::descriptor::ImageDescriptor;
use crate::error::{Error, Result};
use crate::imaging::EntropyMap;

/// Strictly increasing region indices selected as ROIs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoiSelection {
    region_indices: Vec<usize>,
}

impl RoiSelection {
    pub fn new(region_indices: Vec<usize>, n_regions: usize) -> Result<Self> {
        if region_indices.is_empty() {
            return Err(Error::invariant("ROI selection must not be empty"));
        }
        if region_indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invariant("ROI indices must be strictly increasing"));
        }
        if let Some(&last) = region_indices.last() {
            if last >= n_regions {
                return Err(Error::Range {
                    index: last,
                    len: n_regions,
                });
            }
        }
        Ok(Self { region_indices })
    }

    pub fn all(n_regions: usize) -> Self {
        Self {
            region_indices: (0..n_regions).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.region_indices
    }

    /// Number of selected regions, `G`.
    pub fn len(&self) -> usize {
        self.region_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.region_indices.is_empty()
    }
}

/// The ROI rows of a query image's descriptor, plus its entropy scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryDescriptor {
    roi: RoiSelection,
    depth: usize,
    vectors: Vec<f64>,
    image_entropy: f64,
}

impl QueryDescriptor {
    pub fn roi(&self) -> &RoiSelection {
        &self.roi
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of rows, `G`.
    pub fn n_rows(&self) -> usize {
        self.roi.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.depth..(i + 1) * self.depth]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.vectors
    }

    pub fn image_entropy(&self) -> f64 {
        self.image_entropy
    }
}

/// Mean rescaled entropy (`mean / 8`) of each `w2 x h2` region, row-major.
pub fn region_entropy_means(em: &EntropyMap, cfg: &PipelineConfig) -> Result<Vec<f64>> {
    if em.width() != cfg.w1 || em.height() != cfg.h1 {
        return Err(Error::config(format!(
            "entropy map is {}x{}, configuration expects {}x{}",
            em.width(),
            em.height(),
            cfg.w1,
            cfg.h1
        )));
    }
    let cols = cfg.grid_cols();
    let mut sums = vec![0.0; cfg.n_regions()];
    for y in 0..cfg.h1 {
        let base = (y / cfg.h2) * cols;
        for x in 0..cfg.w1 {
            sums[base + x / cfg.w2] += em.get(x, y);
        }
    }
    let denom = (cfg.w2 * cfg.h2) as f64 * 8.0;
    Ok(sums.into_iter().map(|s| s / denom).collect())
}

/// Regions whose rescaled mean entropy is at least `ET`; all regions when
/// none qualifies.
pub fn extract_roi(em: &EntropyMap, cfg: &PipelineConfig) -> Result<RoiSelection> {
    let means = region_entropy_means(em, cfg)?;
    Ok(select_by_threshold(&means, cfg.et))
}

pub fn select_by_threshold(region_means: &[f64], et: f64) -> RoiSelection {
    let picked: Vec<usize> = region_means
        .iter()
        .enumerate()
        .filter(|(_, &m)| m >= et)
        .map(|(i, _)| i)
        .collect();
    if picked.is_empty() {
        RoiSelection::all(region_means.len())
    } else {
        RoiSelection {
            region_indices: picked,
        }
    }
}

/// Gathers the ROI rows of `desc` in selection order.
pub fn select_regions(
    desc: &ImageDescriptor,
    roi: &RoiSelection,
    image_entropy: f64,
) -> Result<QueryDescriptor> {
    let depth = desc.depth();
    let mut vectors = Vec::with_capacity(roi.len() * depth);
    for &i in roi.indices() {
        if i >= desc.n_regions() {
            return Err(Error::Range {
                index: i,
                len: desc.n_regions(),
            });
        }
        vectors.extend_from_slice(desc.row(i));
    }
    Ok(QueryDescriptor {
        roi: roi.clone(),
        depth,
        vectors,
        image_entropy,
    })
}

/// Uses every region of `desc` as a query row.
pub fn whole_image_query(desc: &ImageDescriptor, image_entropy: f64) -> QueryDescriptor {
    QueryDescriptor {
        roi: RoiSelection::all(desc.n_regions()),
        depth: desc.depth(),
        vectors: desc.as_slice().to_vec(),
        image_entropy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg4() -> PipelineConfig {
        // 2x2 regions of 4x4 pixels
        PipelineConfig {
            w1: 8,
            h1: 8,
            w2: 4,
            h2: 4,
            ..PipelineConfig::default()
        }
    }

    fn map_from_region_means(means: [f64; 4]) -> EntropyMap {
        let mut v = vec![0.0; 64];
        for y in 0..8 {
            for x in 0..8 {
                v[y * 8 + x] = means[(y / 4) * 2 + x / 4] * 8.0;
            }
        }
        EntropyMap::new(8, 8, v).unwrap()
    }

    fn desc16() -> ImageDescriptor {
        let depth = 4;
        let data = (0..16)
            .flat_map(|r| {
                let mut row = vec![0.0; depth];
                row[r % depth] = 1.0;
                row
            })
            .collect();
        ImageDescriptor::from_rows(16, depth, data).unwrap()
    }

    #[test]
    fn uniform_high_entropy_selects_all() {
        let roi = extract_roi(&map_from_region_means([1.0; 4]), &cfg4()).unwrap();
        assert_eq!(roi.indices(), &[0, 1, 2, 3]);
    }

    #[test]
    fn zero_entropy_falls_back_to_all() {
        let roi = extract_roi(&map_from_region_means([0.0; 4]), &cfg4()).unwrap();
        assert_eq!(roi.len(), 4);
    }

    #[test]
    fn threshold_picks_regions() {
        let roi = extract_roi(&map_from_region_means([0.9, 0.4, 0.6, 0.1]), &cfg4()).unwrap();
        assert_eq!(roi.indices(), &[0, 2]);
    }

    #[test]
    fn zero_threshold_selects_everything() {
        let cfg = PipelineConfig { et: 0.0, ..cfg4() };
        let roi = extract_roi(&map_from_region_means([0.0, 0.3, 0.0, 0.01]), &cfg).unwrap();
        assert_eq!(roi.len(), 4);
    }

    #[test]
    fn extract_rejects_wrong_dims() {
        let em = EntropyMap::new(4, 4, vec![0.0; 16]).unwrap();
        assert!(extract_roi(&em, &cfg4()).is_err());
    }

    #[test]
    fn identity_gather() {
        let d = desc16();
        let q = select_regions(&d, &RoiSelection::all(16), 0.3).unwrap();
        assert_eq!(q.as_slice(), d.as_slice());
        assert_eq!(q.image_entropy(), 0.3);
    }

    #[test]
    fn single_and_sparse_gathers() {
        let d = desc16();
        let q = select_regions(&d, &RoiSelection::new(vec![0], 16).unwrap(), 0.0).unwrap();
        assert_eq!(q.n_rows(), 1);
        assert_eq!(q.row(0), d.row(0));

        let picks = vec![3, 7, 11];
        let q = select_regions(&d, &RoiSelection::new(picks.clone(), 16).unwrap(), 0.0).unwrap();
        let mut brute = Vec::new();
        for &p in &picks {
            for k in 0..d.depth() {
                brute.push(d.as_slice()[p * d.depth() + k]);
            }
        }
        assert_eq!(q.as_slice(), brute.as_slice());
    }

    #[test]
    fn selection_validation() {
        assert!(RoiSelection::new(vec![], 4).is_err());
        assert!(RoiSelection::new(vec![2, 1], 4).is_err());
        assert!(RoiSelection::new(vec![1, 1], 4).is_err());
        assert!(matches!(
            RoiSelection::new(vec![1, 4], 4),
            Err(Error::Range { index: 4, len: 4 })
        ));
    }

    #[test]
    fn gather_out_of_range() {
        let d = ImageDescriptor::from_rows(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let roi = RoiSelection::new(vec![0, 5], 8).unwrap();
        assert!(matches!(select_regions(&d, &roi, 0.0), Err(Error::Range { .. })));
    }
}
