//! Shared fixtures for the criterion benches.

use convseq::encoding::{encode_traverse, EncodedFrame};
use convseq::{generate_synthetic_traverse, PipelineConfig, SyntheticPair, Variation, WorldParams};

pub const SEED: u64 = 42;

pub fn pair(frames: usize) -> SyntheticPair {
    generate_synthetic_traverse(SEED, frames, Variation::CONDITIONAL, WorldParams::default())
}

pub fn config(side: usize) -> PipelineConfig {
    PipelineConfig {
        w1: side,
        h1: side,
        ..PipelineConfig::default()
    }
}

/// Query and reference frames encoded at `side x side`.
pub fn encoded(frames: usize, side: usize) -> (Vec<EncodedFrame>, Vec<EncodedFrame>) {
    let p = pair(frames);
    let cfg = config(side);
    (
        encode_traverse(&p.query, &cfg).expect("valid config"),
        encode_traverse(&p.reference, &cfg).expect("valid config"),
    )
}
