//! Per-frame encoding shared by the query and reference roles.

use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::descriptor::{describe_image, ImageDescriptor};
use crate::error::Result;
use crate::imaging::{standardize, GrayImage, Raster};
use crate::saliency::{extract_roi, select_regions, QueryDescriptor};

/// Everything the sequencer and matcher need from one frame: the full
/// `N`-region descriptor (reference role) and its ROI projection with the
/// entropy scalar (query role).
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedFrame {
    pub descriptor: ImageDescriptor,
    pub query: QueryDescriptor,
}

impl EncodedFrame {
    pub fn image_entropy(&self) -> f64 {
        self.query.image_entropy()
    }
}

/// Descriptor, entropy map, ROI selection and ROI gather for a standardized image.
pub fn encode_image(img: &GrayImage, cfg: &PipelineConfig) -> Result<EncodedFrame> {
    let bundle = describe_image(img, cfg)?;
    let roi = extract_roi(&bundle.entropy_map, cfg)?;
    let query = select_regions(&bundle.descriptor, &roi, bundle.image_entropy)?;
    Ok(EncodedFrame {
        descriptor: bundle.descriptor,
        query,
    })
}

/// Standardizes then encodes a decoded raster.
pub fn encode_raster(raw: &Raster, cfg: &PipelineConfig) -> Result<EncodedFrame> {
    encode_image(&standardize(raw, cfg)?, cfg)
}

/// Encodes any grayscale frame, resizing it first when it is not `W1 x H1`.
pub fn encode_gray(img: &GrayImage, cfg: &PipelineConfig) -> Result<EncodedFrame> {
    if (img.width(), img.height()) == (cfg.w1, cfg.h1) {
        encode_image(img, cfg)
    } else {
        let raw = Raster::gray(img.width(), img.height(), img.pixels().to_vec())?;
        encode_raster(&raw, cfg)
    }
}

/// Encodes a traverse in parallel; output order follows input order.
pub fn encode_traverse(frames: &[GrayImage], cfg: &PipelineConfig) -> Result<Vec<EncodedFrame>> {
    cfg.validate()?;
    frames.par_iter().map(|f| encode_gray(f, cfg)).collect()
}

pub fn encode_rasters(frames: &[Raster], cfg: &PipelineConfig) -> Result<Vec<EncodedFrame>> {
    cfg.validate()?;
    frames.par_iter().map(|f| encode_raster(f, cfg)).collect()
}
