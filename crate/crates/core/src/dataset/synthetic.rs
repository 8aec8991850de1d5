//! Seeded synthetic traverse pairs for self-contained experiments.
//!
//! A long textured "world" strip is assembled from tiles drawn (with
//! repetition) from a small palette of textures, so distant places can look
//! alike. Every tile instance also carries one small landmark patch of its
//! own, which keeps distinct places from being pixel-identical. Frame `i` is
//! the crop starting at `i * drift_px`. The query
//! traverse crops `shift_px` further right and applies a brightness gain and
//! additive Gaussian noise.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{DatasetLayout, GroundTruth, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Viewpoint and condition change applied to the query traverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Variation {
    pub shift_px: usize,
    pub brightness_gain: f64,
    /// Standard deviation of the additive noise, in intensity levels.
    pub noise_level: f64,
}

impl Variation {
    pub const NONE: Variation = Variation {
        shift_px: 0,
        brightness_gain: 1.0,
        noise_level: 0.0,
    };

    /// Gain 1.5, 16 px shift and mild noise.
    pub const CONDITIONAL: Variation = Variation {
        shift_px: 16,
        brightness_gain: 1.5,
        noise_level: 6.0,
    };
}

impl Default for Variation {
    fn default() -> Self {
        Self::NONE
    }
}

/// Geometry of the generated world and frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldParams {
    pub width: usize,
    pub height: usize,
    pub drift_px: usize,
    pub tile_width: usize,
    pub palette_size: usize,
}

impl Default for WorldParams {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            drift_px: 24,
            tile_width: 64,
            palette_size: 8,
        }
    }
}

/// Reference and query frames with frame-aligned ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    pub reference: Vec<GrayImage>,
    pub query: Vec<GrayImage>,
    pub ground_truth: GroundTruth,
}

/// Deterministic in `(seed, n_frames, variation, params)`.
pub fn generate_synthetic_traverse(
    seed: u64,
    n_frames: usize,
    variation: Variation,
    params: WorldParams,
) -> SyntheticPair {
    assert!(n_frames >= 1, "need at least one frame");
    assert!(params.width > 0 && params.height > 0 && params.tile_width > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let palette: Vec<Texture> = (0..params.palette_size.max(1))
        .map(|_| Texture::random(&mut rng, params.tile_width, params.height))
        .collect();

    let world_width = (n_frames - 1) * params.drift_px + params.width + variation.shift_px;
    let n_tiles = world_width.div_ceil(params.tile_width);
    let mut landmark_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1a2d_3a4c);
    let tiles: Vec<Tile> = (0..n_tiles)
        .map(|_| Tile {
            texture: rng.random_range(0..palette.len()),
            landmark: Landmark::random(&mut landmark_rng, params.tile_width, params.height),
        })
        .collect();
    let world = World {
        palette,
        tiles,
        tile_width: params.tile_width,
    };

    let reference: Vec<GrayImage> = (0..n_frames)
        .map(|i| world.crop(i * params.drift_px, params.width, params.height))
        .collect();

    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x05ee_d0fa_015e);
    let normal = (variation.noise_level > 0.0)
        .then(|| Normal::new(0.0, variation.noise_level).expect("finite noise level"));
    let query = (0..n_frames)
        .map(|i| {
            let clean = world.crop(i * params.drift_px + variation.shift_px, params.width, params.height);
            perturb(&clean, variation.brightness_gain, normal.as_ref(), &mut noise_rng)
        })
        .collect();

    SyntheticPair {
        reference,
        query,
        ground_truth: GroundTruth::frame_aligned(n_frames, DEFAULT_TOLERANCE),
    }
}

impl SyntheticPair {
    /// Writes `query/NNNNN.png`, `reference/NNNNN.png` and `ground_truth.csv`
    /// under `root`. Output bytes depend only on the pair.
    pub fn write_to(&self, root: &Path) -> Result<DatasetLayout> {
        let layout = DatasetLayout {
            query: root.join(DatasetLayout::QUERY_DIR),
            reference: root.join(DatasetLayout::REFERENCE_DIR),
            ground_truth: Some(root.join(DatasetLayout::GROUND_TRUTH)),
        };
        for (dir, frames) in [(&layout.query, &self.query), (&layout.reference, &self.reference)] {
            fs::create_dir_all(dir)?;
            for (i, img) in frames.iter().enumerate() {
                let path = dir.join(format!("{i:05}.png"));
                image::save_buffer(
                    &path,
                    img.pixels(),
                    img.width() as u32,
                    img.height() as u32,
                    image::ExtendedColorType::L8,
                )
                .map_err(|e| Error::Dataset(format!("cannot write {}: {e}", path.display())))?;
            }
        }
        let mut csv = String::from("query_index,reference_index\n");
        for (q, r) in self.ground_truth.iter() {
            let _ = writeln!(csv, "{q},{r}");
        }
        fs::write(root.join(DatasetLayout::GROUND_TRUTH), csv)?;
        Ok(layout)
    }
}

fn perturb(img: &GrayImage, gain: f64, noise: Option<&Normal<f64>>, rng: &mut ChaCha8Rng) -> GrayImage {
    if gain == 1.0 && noise.is_none() {
        return img.clone();
    }
    let mut pixels = img.pixels().to_vec();
    for p in pixels.iter_mut() {
        let mut v = *p as f64 * gain;
        if let Some(n) = noise {
            v += n.sample(rng);
        }
        *p = v.round().clamp(0.0, 255.0) as u8;
    }
    GrayImage::new(img.width(), img.height(), pixels).expect("same shape")
}

/// Sum of a few oriented gratings plus rectangles and static grain.
struct Texture {
    width: usize,
    pixels: Vec<u8>,
}

impl Texture {
    fn random(rng: &mut ChaCha8Rng, width: usize, height: usize) -> Self {
        let base = rng.random_range(50.0..110.0);
        let gratings: Vec<(f64, f64, f64, f64)> = (0..rng.random_range(2..4))
            .map(|_| {
                let theta = rng.random_range(0.0..std::f64::consts::PI);
                let period = rng.random_range(6.0..28.0);
                let amp = rng.random_range(15.0..40.0);
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                (theta, period, amp, phase)
            })
            .collect();
        let rects: Vec<(usize, usize, usize, usize, f64)> = (0..rng.random_range(2..6))
            .map(|_| {
                let w = rng.random_range(6..width.max(7));
                let h = rng.random_range(6..height.max(7));
                let x = rng.random_range(0..width);
                let y = rng.random_range(0..height);
                (x, y, w, h, rng.random_range(-40.0..40.0))
            })
            .collect();
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let mut v = base;
                for &(theta, period, amp, phase) in &gratings {
                    let t = x as f64 * theta.cos() + y as f64 * theta.sin();
                    v += amp * (std::f64::consts::TAU * t / period + phase).sin();
                }
                for &(rx, ry, rw, rh, dv) in &rects {
                    if x >= rx && x < rx + rw && y >= ry && y < ry + rh {
                        v += dv;
                    }
                }
                v += rng.random_range(-6.0..6.0);
                pixels.push(v.round().clamp(0.0, 170.0) as u8);
            }
        }
        Self { width, pixels }
    }
}

/// Small rectangle with a brightness offset.
struct Landmark {
    x: usize,
    y: usize,
    w: usize,
    h: usize,
    delta: i16,
}

impl Landmark {
    fn random(rng: &mut ChaCha8Rng, width: usize, height: usize) -> Self {
        let w = rng.random_range(1..=width.min(4));
        let h = rng.random_range(1..=height.min(4));
        let magnitude = rng.random_range(12..24);
        Self {
            x: rng.random_range(0..=width - w),
            y: rng.random_range(0..=height - h),
            w,
            h,
            delta: if rng.random() { magnitude } else { -magnitude },
        }
    }

    fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }
}

struct Tile {
    texture: usize,
    landmark: Landmark,
}

struct World {
    palette: Vec<Texture>,
    tiles: Vec<Tile>,
    tile_width: usize,
}

impl World {
    fn pixel(&self, x: usize, y: usize) -> u8 {
        let tile = &self.tiles[x / self.tile_width];
        let tex = &self.palette[tile.texture];
        let (tx, v) = (x % self.tile_width, tex.pixels[y * tex.width + x % self.tile_width]);
        if tile.landmark.contains(tx, y) {
            (v as i16 + tile.landmark.delta).clamp(0, 170) as u8
        } else {
            v
        }
    }

    fn crop(&self, x0: usize, width: usize, height: usize) -> GrayImage {
        GrayImage::from_fn(width, height, |x, y| self.pixel(x0 + x, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> WorldParams {
        WorldParams {
            width: 64,
            height: 48,
            drift_px: 8,
            tile_width: 16,
            palette_size: 3,
        }
    }

    #[test]
    fn no_variation_gives_identical_traverses() {
        let p = generate_synthetic_traverse(3, 6, Variation::NONE, small());
        assert_eq!(p.reference, p.query);
        assert_eq!(p.ground_truth.len(), 6);
    }

    #[test]
    fn same_seed_same_frames() {
        let a = generate_synthetic_traverse(11, 5, Variation::CONDITIONAL, small());
        let b = generate_synthetic_traverse(11, 5, Variation::CONDITIONAL, small());
        assert_eq!(a, b);
        let c = generate_synthetic_traverse(12, 5, Variation::CONDITIONAL, small());
        assert_ne!(a.reference, c.reference);
    }

    #[test]
    fn shift_moves_query_content() {
        let v = Variation {
            shift_px: 8,
            ..Variation::NONE
        };
        let p = generate_synthetic_traverse(5, 4, v, small());
        // drift equals the shift, so query i shows reference i+1
        for i in 0..3 {
            assert_eq!(p.query[i], p.reference[i + 1]);
        }
    }

    #[test]
    fn written_pair_loads_back() {
        let p = generate_synthetic_traverse(9, 3, Variation::CONDITIONAL, small());
        let dir = tempfile::tempdir().unwrap();
        let layout = p.write_to(dir.path()).unwrap();
        let q = super::super::load_traverse(&layout.query).unwrap();
        assert_eq!(q.len(), 3);
        let raster = super::super::decode_frame(&q.frames[1]).unwrap();
        assert_eq!(raster.data(), p.query[1].pixels());
        let gt = super::super::load_ground_truth(layout.ground_truth.as_deref(), 3, 2).unwrap();
        assert_eq!(gt, p.ground_truth);
    }

    #[test]
    fn gain_scales_pixels() {
        let v = Variation {
            brightness_gain: 0.5,
            ..Variation::NONE
        };
        let p = generate_synthetic_traverse(5, 2, v, small());
        for (q, r) in p.query[0].pixels().iter().zip(p.reference[0].pixels()) {
            assert_eq!(*q, (*r as f64 * 0.5).round() as u8);
        }
    }
}
