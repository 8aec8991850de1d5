//! Grayscale standardization, gradients and local entropy.

use crate::config::PipelineConfig;
use crate::error::{Error, Result};

/// Pixel layout of a decoded raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelLayout {
    Gray,
    Rgb,
}

impl PixelLayout {
    pub fn channels(self) -> usize {
        match self {
            PixelLayout::Gray => 1,
            PixelLayout::Rgb => 3,
        }
    }
}

/// A decoded 8-bit raster of arbitrary size, before standardization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    layout: PixelLayout,
    data: Vec<u8>,
}

impl Raster {
    pub fn new(width: usize, height: usize, layout: PixelLayout, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Decode {
                source_name: "<raster>".into(),
                reason: format!("zero-sized raster {width}x{height}"),
            });
        }
        if data.len() != width * height * layout.channels() {
            return Err(Error::Decode {
                source_name: "<raster>".into(),
                reason: format!(
                    "buffer holds {} bytes, expected {}",
                    data.len(),
                    width * height * layout.channels()
                ),
            });
        }
        Ok(Self {
            width,
            height,
            layout,
            data,
        })
    }

    pub fn gray(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        Self::new(width, height, PixelLayout::Gray, data)
    }

    pub fn rgb(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        Self::new(width, height, PixelLayout::Rgb, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn layout(&self) -> PixelLayout {
        self.layout
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    fn to_luma(&self) -> Vec<u8> {
        match self.layout {
            PixelLayout::Gray => self.data.clone(),
            PixelLayout::Rgb => self
                .data
                .chunks_exact(3)
                .map(|p| luma(p[0], p[1], p[2]))
                .collect(),
        }
    }
}

/// Rounded ITU-R BT.601 luminance.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
    y.round().clamp(0.0, 255.0) as u8
}

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::config(format!(
                "gray image {width}x{height} with {} pixels",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "empty image");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn map(&self, f: impl Fn(u8) -> u8) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }
}

/// Per-pixel gradient magnitude and unsigned orientation in degrees, `[0, 180)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMap {
    width: usize,
    height: usize,
    magnitude: Vec<f64>,
    orientation: Vec<f64>,
}

impl GradientMap {
    pub fn new(
        width: usize,
        height: usize,
        magnitude: Vec<f64>,
        orientation: Vec<f64>,
    ) -> Result<Self> {
        let n = width * height;
        if magnitude.len() != n || orientation.len() != n {
            return Err(Error::config("gradient buffers do not match dimensions"));
        }
        if magnitude.iter().any(|m| m.is_nan() || *m < 0.0) {
            return Err(Error::config("gradient magnitudes must be non-negative"));
        }
        if orientation.iter().any(|o| !(0.0..180.0).contains(o)) {
            return Err(Error::config("orientations must lie in [0, 180)"));
        }
        Ok(Self {
            width,
            height,
            magnitude,
            orientation,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }

    pub fn orientation(&self) -> &[f64] {
        &self.orientation
    }

    /// Multiplies every magnitude by `alpha`, leaving orientations untouched.
    pub fn scaled(&self, alpha: f64) -> Self {
        assert!(alpha >= 0.0, "scale must be non-negative");
        Self {
            magnitude: self.magnitude.iter().map(|m| m * alpha).collect(),
            ..self.clone()
        }
    }
}

/// Per-pixel local Shannon entropy in bits, each value in `[0, 8]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl EntropyMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::config("entropy buffer does not match dimensions"));
        }
        if values.iter().any(|v| !(0.0..=8.0).contains(v)) {
            return Err(Error::config("entropy values must lie in [0, 8]"));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

/// Converts a raster to luminance and resizes it to `w1 x h1` with bilinear
/// interpolation (pixel-center aligned, edge-clamped sampling).
pub fn standardize(raw: &Raster, cfg: &PipelineConfig) -> Result<GrayImage> {
    let luma = raw.to_luma();
    let (sw, sh) = (raw.width, raw.height);
    let (dw, dh) = (cfg.w1, cfg.h1);
    if dw == 0 || dh == 0 {
        return Err(Error::config("target size must be nonzero"));
    }
    if (sw, sh) == (dw, dh) {
        return GrayImage::new(dw, dh, luma);
    }

    let xs = sample_axis(sw, dw);
    let ys = sample_axis(sh, dh);
    let mut out = Vec::with_capacity(dw * dh);
    for &(y0, y1, fy) in &ys {
        let row0 = &luma[y0 * sw..(y0 + 1) * sw];
        let row1 = &luma[y1 * sw..(y1 + 1) * sw];
        for &(x0, x1, fx) in &xs {
            let top = lerp(row0[x0] as f64, row0[x1] as f64, fx);
            let bottom = lerp(row1[x0] as f64, row1[x1] as f64, fx);
            out.push(lerp(top, bottom, fy).round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(dw, dh, out)
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// For each destination coordinate: the two source taps and the weight of the second.
fn sample_axis(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|d| {
            let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let s0 = s.floor() as usize;
            let s1 = (s0 + 1).min(src - 1);
            (s0, s1, s - s0 as f64)
        })
        .collect()
}

/// Central-difference gradients with replicated edges.
///
/// Orientation is folded into `[0, 180)`. The gradient vector is first
/// canonicalized to the upper half-plane so that `g` and `-g` produce
/// bit-identical angles; zero gradients get orientation 0.
pub fn compute_gradients(img: &GrayImage) -> GradientMap {
    let (w, h) = (img.width, img.height);
    let px = &img.pixels;
    let mut magnitude = vec![0.0; w * h];
    let mut orientation = vec![0.0; w * h];
    for y in 0..h {
        let up = y.saturating_sub(1);
        let down = (y + 1).min(h - 1);
        for x in 0..w {
            let left = x.saturating_sub(1);
            let right = (x + 1).min(w - 1);
            let mut gx = px[y * w + right] as i32 - px[y * w + left] as i32;
            let mut gy = px[down * w + x] as i32 - px[up * w + x] as i32;
            if gx == 0 && gy == 0 {
                continue;
            }
            if gy < 0 || (gy == 0 && gx < 0) {
                gx = -gx;
                gy = -gy;
            }
            let i = y * w + x;
            magnitude[i] = ((gx * gx + gy * gy) as f64).sqrt();
            let deg = (gy as f64).atan2(gx as f64).to_degrees();
            orientation[i] = if deg >= 180.0 { 0.0 } else { deg };
        }
    }
    GradientMap {
        width: w,
        height: h,
        magnitude,
        orientation,
    }
}

/// Local Shannon entropy of the 256-bin intensity histogram over a square
/// window of half-width `cfg.entropy_radius`, shrunk at the image borders.
///
/// Uses a sliding histogram along each row and keeps `sum c*log2(c)` up to
/// date, so entropy is `log2(n) - S / n` for a window of `n` pixels.
pub fn compute_entropy_map(img: &GrayImage, cfg: &PipelineConfig) -> EntropyMap {
    entropy_map_with_radius(img, cfg.entropy_radius)
}

pub fn entropy_map_with_radius(img: &GrayImage, radius: usize) -> EntropyMap {
    let (w, h) = (img.width, img.height);
    let px = &img.pixels;
    let max_count = (2 * radius + 1).min(w) * (2 * radius + 1).min(h) + 1;
    // delta[c] = (c+1) log2(c+1) - c log2(c)
    let delta: Vec<f64> = (0..max_count)
        .map(|c| {
            let next = (c + 1) as f64;
            let cur = if c == 0 { 0.0 } else { c as f64 * (c as f64).log2() };
            next * next.log2() - cur
        })
        .collect();

    let mut values = vec![0.0; w * h];
    let mut hist = [0u32; 256];
    for y in 0..h {
        let y0 = y.saturating_sub(radius);
        let y1 = (y + radius).min(h - 1);
        hist.fill(0);
        let mut distinct = 0usize;
        let mut s = 0.0f64;

        let add_col = |x: usize, hist: &mut [u32; 256], s: &mut f64, distinct: &mut usize| {
            for yy in y0..=y1 {
                let v = px[yy * w + x] as usize;
                let c = hist[v] as usize;
                *s += delta[c];
                if c == 0 {
                    *distinct += 1;
                }
                hist[v] += 1;
            }
        };
        let remove_col = |x: usize, hist: &mut [u32; 256], s: &mut f64, distinct: &mut usize| {
            for yy in y0..=y1 {
                let v = px[yy * w + x] as usize;
                let c = hist[v] as usize;
                *s -= delta[c - 1];
                if c == 1 {
                    *distinct -= 1;
                }
                hist[v] -= 1;
            }
        };

        for x in 0..=radius.min(w - 1) {
            add_col(x, &mut hist, &mut s, &mut distinct);
        }
        for x in 0..w {
            if x > 0 {
                if x > radius {
                    remove_col(x - radius - 1, &mut hist, &mut s, &mut distinct);
                }
                if x + radius < w {
                    add_col(x + radius, &mut hist, &mut s, &mut distinct);
                }
            }
            let x0 = x.saturating_sub(radius);
            let x1 = (x + radius).min(w - 1);
            let n = ((y1 - y0 + 1) * (x1 - x0 + 1)) as f64;
            values[y * w + x] = if distinct <= 1 {
                0.0
            } else {
                (n.log2() - s / n).clamp(0.0, 8.0)
            };
        }
    }
    EntropyMap {
        width: w,
        height: h,
        values,
    }
}

/// Mean entropy rescaled to `[0, 1]`: `sum(e) / (W * H * 8)`.
pub fn image_entropy_scalar(em: &EntropyMap) -> f64 {
    let total: f64 = em.values.iter().sum();
    (total / (em.values.len() as f64 * 8.0)).clamp(0.0, 1.0)
}
