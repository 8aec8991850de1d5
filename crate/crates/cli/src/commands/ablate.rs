use std::fmt::Write as _;

use clap::Args;
use convseq::evaluation::time_encoding;
use convseq::Benchmark;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::output::{self, OutDir};
use crate::CommonArgs;

#[derive(Debug, Clone, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    #[arg(long, default_value_t = 1)]
    pub k_min: usize,

    #[arg(long, default_value_t = 20)]
    pub k_max: usize,

    /// Leave the mean_t_e column empty instead of timing the encoder
    #[arg(long)]
    pub skip_timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub k: usize,
    pub accuracy: f64,
    pub auc_pr: f64,
    pub mean_t_e: Option<f64>,
    pub n_matched: usize,
}

pub fn run(args: &AblateArgs) -> Result<String> {
    if args.k_min < 1 || args.k_min > args.k_max {
        return Err(CliError::Usage(format!(
            "need 1 <= k_min ({}) <= k_max ({})",
            args.k_min, args.k_max
        )));
    }
    let (settings, source) = args.common.prepare()?;
    let cfg = settings.pipeline;
    let pair = source.load_pair(settings.tolerance)?;
    let bench = Benchmark::from_rasters(&pair.query, &pair.reference, &cfg)?;
    let t_e_frame = if args.skip_timing {
        None
    } else {
        Some(time_encoding(&pair.query, &cfg)?)
    };

    let limit = pair.query.len().min(pair.reference.len());
    let mut rows = Vec::new();
    for k in args.k_min..=args.k_max {
        if k > limit {
            log::warn!("k = {k} exceeds the traverse length {limit}; skipped");
            continue;
        }
        let run = bench.run(&cfg.with_fixed_k(k), &pair.ground_truth)?;
        rows.push(AblationRow {
            k,
            accuracy: run.report.accuracy,
            auc_pr: run.report.auc_pr,
            mean_t_e: t_e_frame.map(|t| t * k as f64),
            n_matched: run.report.n_matched,
        });
    }

    let out = OutDir::create(&args.common.out)?;
    out.write_csv(output::ABLATION, rows.iter())?;
    let mut manifest = RunManifest::new("ablate", &settings, &source);
    manifest.k_range = Some((args.k_min, args.k_max));
    out.write_json(output::MANIFEST, &manifest)?;

    let mut s = String::from("   k  accuracy    auc_pr\n");
    for r in &rows {
        let _ = writeln!(s, "{:>4}  {:>8.4}  {:>8.4}", r.k, r.accuracy, r.auc_pr);
    }
    let _ = writeln!(s, "wrote {}", out.path(output::ABLATION).display());
    Ok(s)
}
