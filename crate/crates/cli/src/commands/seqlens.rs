use std::fmt::Write as _;

use clap::Args;
use convseq::encoding::encode_rasters;
use convseq::sequencer::decide_all;

use crate::error::Result;
use crate::manifest::RunManifest;
use crate::output::{self, OutDir};
use crate::CommonArgs;

#[derive(Debug, Clone, Args)]
pub struct SeqlensArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

pub fn run(args: &SeqlensArgs) -> Result<String> {
    let (settings, source) = args.common.prepare()?;
    let frames = encode_rasters(&source.load_query()?, &settings.pipeline)?;
    let decisions = decide_all(&frames, &settings.pipeline)?;
    let hist = output::length_histogram(&decisions);

    let out = OutDir::create(&args.common.out)?;
    output::write_seq_lengths(&out, &decisions)?;
    output::write_histogram(&out, &hist)?;
    out.write_json(output::MANIFEST, &RunManifest::new("seqlens", &settings, &source))?;

    let mut s = format!("{} starts decided of {} frames\nlength  count\n", decisions.len(), frames.len());
    for (len, count) in &hist {
        let _ = writeln!(s, "{len:>6}  {count:>5}");
    }
    Ok(s)
}
