//! Where frames come from: dataset directories or the seeded generator.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use convseq::dataset::{load_ground_truth, load_rasters, load_traverse, DatasetLayout};
use convseq::{generate_synthetic_traverse, GrayImage, GroundTruth, Raster, Variation, WorldParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, IoContext, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    Directories {
        query: PathBuf,
        reference: Option<PathBuf>,
        ground_truth: Option<PathBuf>,
    },
    Synthetic {
        seed: u64,
        frames: usize,
        variation: Variation,
        world: WorldParams,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum VariationPreset {
    /// Query identical to reference
    None,
    /// 1.5x brightness, 16 px shift, mild noise
    #[default]
    Conditional,
}

impl VariationPreset {
    pub fn variation(self) -> Variation {
        match self {
            VariationPreset::None => Variation::NONE,
            VariationPreset::Conditional => Variation::CONDITIONAL,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SourceArgs {
    /// Dataset root holding query/, reference/ and optionally ground_truth.csv
    #[arg(long, conflicts_with_all = ["query", "synthetic"])]
    pub dataset: Option<PathBuf>,
    /// Query traverse directory
    #[arg(long)]
    pub query: Option<PathBuf>,
    /// Reference traverse directory
    #[arg(long, requires = "query")]
    pub reference: Option<PathBuf>,
    /// CSV of query_index,reference_index pairs (frame-aligned if omitted)
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    /// Generate a synthetic pair in memory from this seed
    #[arg(long, conflicts_with = "query")]
    pub synthetic: Option<u64>,
    /// Frames per synthetic traverse
    #[arg(long, default_value_t = 100, requires = "synthetic")]
    pub frames: usize,
    /// Query-side perturbation of the synthetic pair
    #[arg(long, value_enum, default_value_t = VariationPreset::Conditional, requires = "synthetic")]
    pub variation: VariationPreset,
}

/// Manifests store absolute paths so replays do not depend on the working directory.
fn absolute(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).context(|| format!("cannot resolve {}", p.display()))
}

impl SourceArgs {
    /// Flags win over the manifest's source.
    pub fn resolve(&self, from_manifest: Option<&DatasetSource>) -> Result<DatasetSource> {
        if let Some(root) = &self.dataset {
            let layout = DatasetLayout::discover(root)?;
            let ground_truth = self.ground_truth.clone().or(layout.ground_truth);
            return Ok(DatasetSource::Directories {
                query: absolute(&layout.query)?,
                reference: Some(absolute(&layout.reference)?),
                ground_truth: ground_truth.as_deref().map(absolute).transpose()?,
            });
        }
        if let Some(query) = &self.query {
            return Ok(DatasetSource::Directories {
                query: absolute(query)?,
                reference: self.reference.as_deref().map(absolute).transpose()?,
                ground_truth: self.ground_truth.as_deref().map(absolute).transpose()?,
            });
        }
        if let Some(seed) = self.synthetic {
            if self.frames == 0 {
                return Err(CliError::Usage("--frames must be positive".into()));
            }
            return Ok(DatasetSource::Synthetic {
                seed,
                frames: self.frames,
                variation: self.variation.variation(),
                world: WorldParams::default(),
            });
        }
        from_manifest
            .cloned()
            .ok_or_else(|| CliError::Usage("no dataset: pass --dataset, --query/--reference, --synthetic or --manifest".into()))
    }
}

impl DatasetSource {
    pub fn seed(&self) -> Option<u64> {
        match self {
            DatasetSource::Synthetic { seed, .. } => Some(*seed),
            DatasetSource::Directories { .. } => None,
        }
    }
}

/// Decoded frames of both traverses with their ground truth.
pub struct LoadedPair {
    pub query: Vec<Raster>,
    pub reference: Vec<Raster>,
    pub ground_truth: GroundTruth,
}

fn gray_rasters(frames: Vec<GrayImage>) -> Result<Vec<Raster>> {
    frames
        .into_iter()
        .map(|g| Raster::gray(g.width(), g.height(), g.into_pixels()).map_err(CliError::from))
        .collect()
}

fn load_dir(dir: &Path) -> Result<Vec<Raster>> {
    let traverse = load_traverse(dir)?;
    log::info!("{}: {} frames", dir.display(), traverse.len());
    Ok(load_rasters(&traverse)?)
}

impl DatasetSource {
    pub fn load_pair(&self, tolerance: usize) -> Result<LoadedPair> {
        match self {
            DatasetSource::Directories {
                query,
                reference,
                ground_truth,
            } => {
                let reference = reference
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("a reference traverse is required".into()))?;
                let q = load_dir(query)?;
                let r = load_dir(reference)?;
                let gt = load_ground_truth(ground_truth.as_deref(), q.len(), tolerance)?;
                Ok(LoadedPair {
                    query: q,
                    reference: r,
                    ground_truth: gt,
                })
            }
            DatasetSource::Synthetic {
                seed,
                frames,
                variation,
                world,
            } => {
                let pair = generate_synthetic_traverse(*seed, *frames, *variation, *world);
                Ok(LoadedPair {
                    query: gray_rasters(pair.query)?,
                    reference: gray_rasters(pair.reference)?,
                    ground_truth: pair.ground_truth.with_tolerance(tolerance),
                })
            }
        }
    }

    /// Ground truth without decoding any frames.
    pub fn ground_truth(&self, n_queries: usize, tolerance: usize) -> Result<GroundTruth> {
        match self {
            DatasetSource::Directories { ground_truth, .. } => {
                Ok(load_ground_truth(ground_truth.as_deref(), n_queries, tolerance)?)
            }
            DatasetSource::Synthetic { .. } => Ok(GroundTruth::frame_aligned(n_queries, tolerance)),
        }
    }

    /// Query frames only, for commands that never touch the reference.
    pub fn load_query(&self) -> Result<Vec<Raster>> {
        match self {
            DatasetSource::Directories { query, .. } => load_dir(query),
            DatasetSource::Synthetic {
                seed,
                frames,
                variation,
                world,
            } => gray_rasters(generate_synthetic_traverse(*seed, *frames, *variation, *world).query),
        }
    }
}
