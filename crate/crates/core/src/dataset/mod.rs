//! Traverse loading, ground truth, and synthetic traverses.

mod natural;
pub mod synthetic;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::Raster;

pub use natural::natural_cmp;

/// File extensions accepted as frames (case-insensitive).
pub const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "bmp", "tif", "tiff", "pgm", "ppm", "pnm"];

/// Ground-truth tolerance for most frame-aligned traverses.
pub const DEFAULT_TOLERANCE: usize = 2;
/// Tighter tolerance used for densely sampled routes such as Nordland.
pub const NORDLAND_TOLERANCE: usize = 1;

/// Ordered frame files of one traverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Traverse {
    pub name: String,
    pub frames: Vec<PathBuf>,
    /// Directory entries that were not recognized as images.
    pub skipped: usize,
}

impl Traverse {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
        .unwrap_or(false)
}

/// Lists image files in `dir`, ordered by natural (numeric-aware) filename order.
pub fn load_traverse(dir: &Path) -> Result<Traverse> {
    let entries = fs::read_dir(dir)
        .map_err(|e| Error::Dataset(format!("cannot read {}: {e}", dir.display())))?;
    let mut frames = Vec::new();
    let mut skipped = 0;
    for entry in entries {
        let entry = entry?;
        if !entry.file_type()?.is_file() {
            continue;
        }
        let path = entry.path();
        if is_image(&path) {
            frames.push(path);
        } else {
            skipped += 1;
        }
    }
    if frames.is_empty() {
        return Err(Error::Dataset(format!("no images in {}", dir.display())));
    }
    if skipped > 0 {
        log::warn!("{}: skipped {skipped} non-image entries", dir.display());
    }
    frames.sort_by(|a, b| natural_cmp(&file_name(a), &file_name(b)));
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    Ok(Traverse {
        name,
        frames,
        skipped,
    })
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Decodes one frame, keeping grayscale sources single-channel.
pub fn decode_frame(path: &Path) -> Result<Raster> {
    let img = image::open(path).map_err(|e| Error::Decode {
        source_name: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let raster = if img.color().has_color() {
        Raster::rgb(w, h, img.into_rgb8().into_raw())
    } else {
        Raster::gray(w, h, img.into_luma8().into_raw())
    };
    raster.map_err(|e| match e {
        Error::Decode { reason, .. } => Error::Decode {
            source_name: path.display().to_string(),
            reason,
        },
        other => other,
    })
}

/// Decodes every frame in parallel; order is the traverse order.
pub fn load_rasters(traverse: &Traverse) -> Result<Vec<Raster>> {
    traverse.frames.par_iter().map(|p| decode_frame(p)).collect()
}

/// Query index to true reference index, with a symmetric frame tolerance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    mapping: BTreeMap<usize, usize>,
    tolerance: usize,
}

impl GroundTruth {
    pub fn new(mapping: BTreeMap<usize, usize>, tolerance: usize) -> Self {
        Self { mapping, tolerance }
    }

    /// Query `i` corresponds to reference `i` for `i < n`.
    pub fn frame_aligned(n: usize, tolerance: usize) -> Self {
        Self::new((0..n).map(|i| (i, i)).collect(), tolerance)
    }

    pub fn tolerance(&self) -> usize {
        self.tolerance
    }

    pub fn with_tolerance(mut self, tolerance: usize) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn truth(&self, query: usize) -> Option<usize> {
        self.mapping.get(&query).copied()
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mapping.iter().map(|(&q, &r)| (q, r))
    }

    /// `|predicted - truth| <= tolerance`.
    pub fn is_correct(&self, query: usize, predicted: usize) -> Result<bool> {
        let truth = self.truth(query).ok_or_else(|| {
            Error::Evaluation(format!("query {query} has no ground-truth entry"))
        })?;
        Ok(predicted.abs_diff(truth) <= self.tolerance)
    }
}

/// Parses `query_index,reference_index` rows. A leading header row, blank
/// lines and `#` comments are ignored.
pub fn parse_ground_truth(text: &str, source: &Path, tolerance: usize) -> Result<GroundTruth> {
    let mut mapping = BTreeMap::new();
    let mut seen_row = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse_err = |reason: String| Error::Parse {
            path: source.to_path_buf(),
            line: line_no,
            reason,
        };
        if !seen_row && fields.iter().any(|f| f.starts_with(|c: char| c.is_ascii_alphabetic())) {
            seen_row = true;
            continue;
        }
        seen_row = true;
        if fields.len() != 2 {
            return Err(parse_err(format!("expected 2 fields, found {}", fields.len())));
        }
        let q: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(format!("bad query index {:?}", fields[0])))?;
        let r: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(format!("bad reference index {:?}", fields[1])))?;
        if mapping.insert(q, r).is_some() {
            return Err(parse_err(format!("duplicate query index {q}")));
        }
    }
    Ok(GroundTruth::new(mapping, tolerance))
}

/// Reads a ground-truth CSV, or falls back to the frame-aligned mapping for
/// `n_queries` frames when `file` is `None`.
pub fn load_ground_truth(file: Option<&Path>, n_queries: usize, tolerance: usize) -> Result<GroundTruth> {
    match file {
        None => Ok(GroundTruth::frame_aligned(n_queries, tolerance)),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Dataset(format!("cannot read {}: {e}", path.display())))?;
            parse_ground_truth(&text, path, tolerance)
        }
    }
}

/// Standard layout: `<root>/query`, `<root>/reference`, optional `<root>/ground_truth.csv`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetLayout {
    pub query: PathBuf,
    pub reference: PathBuf,
    pub ground_truth: Option<PathBuf>,
}

impl DatasetLayout {
    pub const QUERY_DIR: &'static str = "query";
    pub const REFERENCE_DIR: &'static str = "reference";
    pub const GROUND_TRUTH: &'static str = "ground_truth.csv";

    pub fn discover(root: &Path) -> Result<Self> {
        let query = root.join(Self::QUERY_DIR);
        let reference = root.join(Self::REFERENCE_DIR);
        for dir in [&query, &reference] {
            if !dir.is_dir() {
                return Err(Error::Dataset(format!("missing directory {}", dir.display())));
            }
        }
        let gt = root.join(Self::GROUND_TRUTH);
        Ok(Self {
            query,
            reference,
            ground_truth: gt.is_file().then_some(gt),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn touch(dir: &Path, name: &str) {
        fs::write(dir.join(name), b"").unwrap();
    }

    #[test]
    fn natural_order_of_listing() {
        let dir = tempfile::tempdir().unwrap();
        for n in ["img2.png", "img10.png", "img1.png", "notes.txt"] {
            touch(dir.path(), n);
        }
        let t = load_traverse(dir.path()).unwrap();
        let names: Vec<_> = t.frames.iter().map(|p| file_name(p)).collect();
        assert_eq!(names, ["img1.png", "img2.png", "img10.png"]);
        assert_eq!(t.skipped, 1);
    }

    #[test]
    fn empty_or_missing_directory_is_dataset_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_traverse(dir.path()), Err(Error::Dataset(_))));
        assert!(matches!(
            load_traverse(&dir.path().join("nope")),
            Err(Error::Dataset(_))
        ));
    }

    #[test]
    fn absent_ground_truth_is_identity() {
        let gt = load_ground_truth(None, 50, 2).unwrap();
        assert_eq!(gt.len(), 50);
        assert!(gt.iter().all(|(q, r)| q == r));
    }

    #[test]
    fn parses_rows_and_header() {
        let gt = parse_ground_truth("query_index,reference_index\n3,7\n\n# c\n4, 9\n", Path::new("gt.csv"), 2)
            .unwrap();
        assert_eq!(gt.truth(3), Some(7));
        assert_eq!(gt.truth(4), Some(9));
        assert_eq!(gt.len(), 2);
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let err = parse_ground_truth("1,2\n3;4\n", Path::new("gt.csv"), 2).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_ground_truth("1,2\n3,x\n", Path::new("gt.csv"), 2).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_ground_truth("1,2\n1,3\n", Path::new("gt.csv"), 2).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn tolerance_window() {
        let gt = GroundTruth::new([(0, 10)].into_iter().collect(), 2);
        assert!(gt.is_correct(0, 12).unwrap());
        assert!(gt.is_correct(0, 8).unwrap());
        assert!(!gt.is_correct(0, 13).unwrap());
        assert!(gt.is_correct(5, 5).is_err());
    }

    #[test]
    fn decodes_gray_and_rgb_png() {
        let dir = tempfile::tempdir().unwrap();
        let gray = image::GrayImage::from_fn(5, 4, |x, y| image::Luma([(x * 10 + y) as u8]));
        gray.save(dir.path().join("g.png")).unwrap();
        let rgb = image::RgbImage::from_fn(3, 2, |x, _| image::Rgb([x as u8, 0, 255]));
        rgb.save(dir.path().join("c.png")).unwrap();

        let g = decode_frame(&dir.path().join("g.png")).unwrap();
        assert_eq!((g.width(), g.height(), g.layout()), (5, 4, crate::imaging::PixelLayout::Gray));
        assert_eq!(g.data()[6], 11);
        let c = decode_frame(&dir.path().join("c.png")).unwrap();
        assert_eq!(c.layout(), crate::imaging::PixelLayout::Rgb);
        assert_eq!(&c.data()[3..6], &[1, 0, 255]);

        touch(dir.path(), "broken.png");
        assert!(matches!(
            decode_frame(&dir.path().join("broken.png")),
            Err(Error::Decode { .. })
        ));
    }

    #[test]
    fn layout_discovery() {
        let dir = tempfile::tempdir().unwrap();
        assert!(DatasetLayout::discover(dir.path()).is_err());
        fs::create_dir(dir.path().join("query")).unwrap();
        fs::create_dir(dir.path().join("reference")).unwrap();
        let l = DatasetLayout::discover(dir.path()).unwrap();
        assert!(l.ground_truth.is_none());
        touch(dir.path(), "ground_truth.csv");
        assert!(DatasetLayout::discover(dir.path()).unwrap().ground_truth.is_some());
    }
}
