//! Pipeline parameters shared by every stage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Encoding time of the slowest reference technique, in seconds per frame.
pub const DEFAULT_T_E_MAX: f64 = 0.77;

/// All tunables of the encoder, the sequencer and the matcher.
///
/// Field names follow the conventional symbols: `w1 x h1` is the standardized
/// image, `w2 x h2` a region (HOG cell), `bins` the orientation bin count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub w1: usize,
    pub h1: usize,
    pub w2: usize,
    pub h2: usize,
    pub bins: usize,
    /// Half-width of the square local-entropy window.
    pub entropy_radius: usize,
    /// Entropy threshold, used for ROI selection and for sequential entropy.
    pub et: f64,
    /// Information threshold on `1 - similarity`.
    pub it: f64,
    pub min_k: usize,
    pub max_k_info_gain: usize,
    pub max_k: usize,
    pub seq_step: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            w1: 512,
            h1: 512,
            w2: 16,
            h2: 16,
            bins: 8,
            entropy_radius: 5,
            et: 0.5,
            it: 0.9,
            min_k: 1,
            max_k_info_gain: 15,
            max_k: 25,
            seq_step: 1,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.w1 == 0 || self.h1 == 0 || self.w2 == 0 || self.h2 == 0 {
            return Err(Error::config("image and region dimensions must be nonzero"));
        }
        if !self.w1.is_multiple_of(self.w2) || !self.h1.is_multiple_of(self.h2) {
            return Err(Error::config(format!(
                "image {}x{} is not divisible into {}x{} regions",
                self.w1, self.h1, self.w2, self.h2
            )));
        }
        if self.grid_cols() < 2 || self.grid_rows() < 2 {
            return Err(Error::config("region grid must be at least 2x2 cells"));
        }
        if !(0.0..=1.0).contains(&self.et) {
            return Err(Error::config(format!("ET must lie in [0,1], got {}", self.et)));
        }
        if !(0.0..=1.0).contains(&self.it) {
            return Err(Error::config(format!("IT must lie in [0,1], got {}", self.it)));
        }
        if !(1 <= self.min_k && self.min_k <= self.max_k_info_gain && self.max_k_info_gain <= self.max_k)
        {
            return Err(Error::config(format!(
                "need 1 <= min_k ({}) <= max_k_info_gain ({}) <= max_k ({})",
                self.min_k, self.max_k_info_gain, self.max_k
            )));
        }
        if self.bins < 2 {
            return Err(Error::config("need at least 2 orientation bins"));
        }
        if self.entropy_radius < 1 {
            return Err(Error::config("entropy_radius must be >= 1"));
        }
        if self.seq_step < 1 {
            return Err(Error::config("seq_step must be >= 1"));
        }
        Ok(())
    }

    pub fn grid_rows(&self) -> usize {
        self.h1 / self.h2
    }

    pub fn grid_cols(&self) -> usize {
        self.w1 / self.w2
    }

    /// Number of regions `N`.
    pub fn n_regions(&self) -> usize {
        self.grid_rows() * self.grid_cols()
    }

    /// Descriptor depth `4 * L`.
    pub fn depth(&self) -> usize {
        4 * self.bins
    }

    /// Collapse the sequencer to a single fixed length `k`.
    pub fn with_fixed_k(mut self, k: usize) -> Self {
        self.min_k = k;
        self.max_k_info_gain = k;
        self.max_k = k;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.n_regions(), 1024);
        assert_eq!(cfg.depth(), 32);
        assert_eq!((cfg.et, cfg.it, cfg.min_k), (0.5, 0.9, 1));
        assert_eq!((cfg.max_k_info_gain, cfg.max_k), (15, 25));
    }

    #[test]
    fn rejects_bad_values() {
        let base = PipelineConfig::default();
        let cases = [
            PipelineConfig { w2: 15, ..base },
            PipelineConfig { et: 1.5, ..base },
            PipelineConfig { it: -0.1, ..base },
            PipelineConfig { min_k: 0, ..base },
            PipelineConfig { max_k_info_gain: 30, ..base },
            PipelineConfig { bins: 1, ..base },
            PipelineConfig { entropy_radius: 0, ..base },
            PipelineConfig { seq_step: 0, ..base },
            PipelineConfig { w1: 16, ..base },
        ];
        for cfg in cases {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn fixed_k_is_valid() {
        let cfg = PipelineConfig::default().with_fixed_k(7);
        cfg.validate().unwrap();
        assert_eq!((cfg.min_k, cfg.max_k_info_gain, cfg.max_k), (7, 7, 7));
    }
}
