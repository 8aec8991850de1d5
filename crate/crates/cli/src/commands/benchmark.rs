use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use convseq::dataset::{load_rasters, load_traverse};
use convseq::descriptor::cache;
use convseq::encoding::encode_rasters;
use convseq::evaluation::{render_pr_svg, time_encoding};
use convseq::{Benchmark, ImageDescriptor, PipelineConfig, Raster};
use serde::{Deserialize, Serialize};

use crate::error::{IoContext, Result};
use crate::source::DatasetSource;
use crate::manifest::RunManifest;
use crate::output::{self, OutDir};
use crate::CommonArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Dynamic sequence lengths and window search
    Sequence,
    /// Each query frame matched on its own
    SingleFrame,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    #[arg(long, value_enum, default_value_t = Mode::Sequence)]
    pub mode: Mode,

    /// Also render the PR curve as SVG
    #[arg(long)]
    pub svg: bool,

    /// Skip the serial encoding-time measurement (no t_e / PCU in the report)
    #[arg(long)]
    pub skip_timing: bool,

    /// Reference descriptor cache: read when the file exists, written otherwise.
    /// Cached values are 32-bit, so scores may differ from an uncached run in
    /// the last digits.
    #[arg(long)]
    pub reference_cache: Option<PathBuf>,
}

/// Reference descriptors from the cache, or encoded and then cached.
fn reference_descriptors(
    args: &BenchmarkArgs,
    source: &DatasetSource,
    cfg: &PipelineConfig,
) -> Result<Option<Vec<ImageDescriptor>>> {
    let Some(path) = &args.reference_cache else {
        return Ok(None);
    };
    if path.exists() {
        let file = File::open(path).context(|| format!("cannot open {}", path.display()))?;
        let descs = cache::read(BufReader::new(file), cfg)?;
        log::info!("{}: {} cached reference descriptors", path.display(), descs.len());
        return Ok(Some(descs));
    }
    let DatasetSource::Directories { reference: Some(dir), .. } = source else {
        let pair = source.load_pair(0)?;
        return write_cache(path, cfg, &pair.reference).map(Some);
    };
    let rasters = load_rasters(&load_traverse(dir)?)?;
    write_cache(path, cfg, &rasters).map(Some)
}

fn write_cache(path: &Path, cfg: &PipelineConfig, rasters: &[Raster]) -> Result<Vec<ImageDescriptor>> {
    let descs: Vec<ImageDescriptor> = encode_rasters(rasters, cfg)?.into_iter().map(|f| f.descriptor).collect();
    let file = File::create(path).context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    cache::write(&mut w, cfg, &descs)?;
    w.flush().context(|| format!("cannot write {}", path.display()))?;
    Ok(descs)
}

pub fn run(args: &BenchmarkArgs) -> Result<String> {
    let (settings, source) = args.common.prepare()?;
    let cfg = settings.pipeline;
    let (query, bench, gt) = match reference_descriptors(args, &source, &cfg)? {
        Some(refs) => {
            let query = source.load_query()?;
            let gt = source.ground_truth(query.len(), settings.tolerance)?;
            let bench = Benchmark::from_encoded(encode_rasters(&query, &cfg)?, refs, &cfg)?;
            (query, bench, gt)
        }
        None => {
            let pair = source.load_pair(settings.tolerance)?;
            let bench = Benchmark::from_rasters(&pair.query, &pair.reference, &cfg)?;
            (pair.query, bench, pair.ground_truth)
        }
    };
    let run = match args.mode {
        Mode::Sequence => bench.run(&cfg, &gt)?,
        Mode::SingleFrame => bench.single_frame_run(&gt)?,
    };
    let mut report = run.report.clone();
    if !args.skip_timing {
        let t_e_frame = time_encoding(&query, &cfg)?;
        report.attach_timing(t_e_frame, settings.t_e_max)?;
    }

    let out = OutDir::create(&args.common.out)?;
    output::write_report(&out, &report)?;
    output::write_matches(&out, &run, &gt)?;
    output::write_seq_lengths(&out, &run.decisions)?;
    let mut manifest = RunManifest::new("benchmark", &settings, &source);
    manifest.mode = Some(args.mode);
    out.write_json(output::MANIFEST, &manifest)?;
    if args.svg {
        out.write_text(output::PR_SVG, &render_pr_svg(&report.pr_points, "Precision-recall"))?;
    }

    let mut s = String::new();
    let _ = writeln!(
        s,
        "accuracy {:.4}  auc_pr {:.4}  p_r100 {:.4}  matched {}/{}  mean k {:.2}",
        report.accuracy,
        report.auc_pr,
        report.p_r100,
        report.n_matched,
        report.n_queries,
        report.mean_sequence_length
    );
    if let Some(t) = report.timing {
        let _ = writeln!(s, "t_e {:.4} s/frame ({:.4} s per sequence)  pcu {:.4}", t.t_e_frame, t.t_e, t.pcu);
    }
    let _ = writeln!(s, "wrote {}", args.common.out.display());
    Ok(s)
}
