//! Layered configuration: defaults, then manifest, then config file, then flags.

use std::fs;
use std::path::Path;

use clap::Args;
use convseq::dataset::DEFAULT_TOLERANCE;
use convseq::{PipelineConfig, DEFAULT_T_E_MAX};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, IoContext, Result};

/// Fully resolved run parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub pipeline: PipelineConfig,
    pub tolerance: usize,
    pub t_e_max: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            pipeline: PipelineConfig::default(),
            tolerance: DEFAULT_TOLERANCE,
            t_e_max: DEFAULT_T_E_MAX,
        }
    }
}

/// Optional overrides, shared by command-line flags and config files.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    /// Entropy threshold ET in [0, 1]
    #[arg(long)]
    pub et: Option<f64>,
    /// Information threshold IT in [0, 1]
    #[arg(long)]
    pub it: Option<f64>,
    /// Shortest sequence length
    #[arg(long)]
    pub min_k: Option<usize>,
    /// Longest length the info-gain step may choose
    #[arg(long)]
    pub max_k_info_gain: Option<usize>,
    /// Longest sequence length after the entropy step
    #[arg(long)]
    pub max_k: Option<usize>,
    /// Stride between sequence starts
    #[arg(long)]
    pub seq_step: Option<usize>,
    /// Side of the square standardized image, in pixels
    #[arg(long)]
    pub image_size: Option<usize>,
    /// Side of the square region (HOG cell), in pixels
    #[arg(long)]
    pub cell_size: Option<usize>,
    /// Orientation bins per cell histogram
    #[arg(long)]
    pub bins: Option<usize>,
    /// Half-width of the local entropy window
    #[arg(long)]
    pub entropy_radius: Option<usize>,
    /// Ground-truth tolerance in frames
    #[arg(long)]
    pub tolerance: Option<usize>,
    /// Reference encoding time for PCU, seconds per frame
    #[arg(long)]
    pub t_e_max: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, s: &mut Settings) {
        let p = &mut s.pipeline;
        if let Some(v) = self.et {
            p.et = v;
        }
        if let Some(v) = self.it {
            p.it = v;
        }
        if let Some(v) = self.min_k {
            p.min_k = v;
        }
        if let Some(v) = self.max_k_info_gain {
            p.max_k_info_gain = v;
        }
        if let Some(v) = self.max_k {
            p.max_k = v;
        }
        if let Some(v) = self.seq_step {
            p.seq_step = v;
        }
        if let Some(v) = self.image_size {
            p.w1 = v;
            p.h1 = v;
        }
        if let Some(v) = self.cell_size {
            p.w2 = v;
            p.h2 = v;
        }
        if let Some(v) = self.bins {
            p.bins = v;
        }
        if let Some(v) = self.entropy_radius {
            p.entropy_radius = v;
        }
        if let Some(v) = self.tolerance {
            s.tolerance = v;
        }
        if let Some(v) = self.t_e_max {
            s.t_e_max = v;
        }
    }
}

/// Reads overrides from a `.json` file, or TOML for any other extension.
pub fn load_config_file(path: &Path) -> Result<Overrides> {
    let text = fs::read_to_string(path).context(|| format!("cannot read {}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|reason| CliError::Format {
        path: path.to_path_buf(),
        reason,
    })
}

/// `base` (defaults or a manifest), then the config file, then the flags.
pub fn resolve(base: Settings, file: Option<&Path>, flags: &Overrides) -> Result<Settings> {
    let mut s = base;
    if let Some(path) = file {
        load_config_file(path)?.apply(&mut s);
    }
    flags.apply(&mut s);
    s.pipeline.validate()?;
    if s.t_e_max.is_nan() || s.t_e_max <= 0.0 {
        return Err(CliError::Usage("t_e_max must be positive".into()));
    }
    Ok(s)
}
