use std::path::PathBuf;

use clap::Args;
use convseq::{generate_synthetic_traverse, Variation, WorldParams};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::output::OutDir;
use crate::source::VariationPreset;

#[derive(Debug, Clone, Args)]
pub struct GenSyntheticArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Frames per traverse
    #[arg(long, short = 'n', default_value_t = 100)]
    pub frames: usize,

    #[arg(long, value_enum, default_value_t = VariationPreset::Conditional)]
    pub variation: VariationPreset,

    /// Override the preset's horizontal query shift, pixels
    #[arg(long)]
    pub shift_px: Option<usize>,

    /// Override the preset's brightness gain
    #[arg(long)]
    pub gain: Option<f64>,

    /// Override the preset's noise standard deviation
    #[arg(long)]
    pub noise: Option<f64>,

    /// Frame side, pixels
    #[arg(long, default_value_t = WorldParams::default().width)]
    pub frame_size: usize,

    /// Camera advance between frames, pixels
    #[arg(long, default_value_t = WorldParams::default().drift_px)]
    pub drift: usize,

    #[arg(long, short, required = true)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct SyntheticSpec {
    seed: u64,
    frames: usize,
    variation: Variation,
    world: WorldParams,
}

pub fn run(args: &GenSyntheticArgs) -> Result<String> {
    if args.frames == 0 || args.frame_size == 0 {
        return Err(CliError::Usage("--frames and --frame-size must be positive".into()));
    }
    let mut variation = args.variation.variation();
    if let Some(v) = args.shift_px {
        variation.shift_px = v;
    }
    if let Some(v) = args.gain {
        variation.brightness_gain = v;
    }
    if let Some(v) = args.noise {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(CliError::Usage("--noise must be finite and non-negative".into()));
        }
        variation.noise_level = v;
    }
    let world = WorldParams {
        width: args.frame_size,
        height: args.frame_size,
        drift_px: args.drift,
        ..WorldParams::default()
    };
    let pair = generate_synthetic_traverse(args.seed, args.frames, variation, world);
    let out = OutDir::create(&args.out)?;
    pair.write_to(&args.out)?;
    out.write_json(
        "synthetic.json",
        &SyntheticSpec {
            seed: args.seed,
            frames: args.frames,
            variation,
            world,
        },
    )?;
    Ok(format!(
        "wrote {} query and {} reference frames to {}\n",
        pair.query.len(),
        pair.reference.len(),
        args.out.display()
    ))
}
