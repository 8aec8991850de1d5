//! Dynamic sequence length: an information-gain stage followed by a
//! sequential-entropy stage.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::descriptor::ImageDescriptor;
use crate::encoding::EncodedFrame;
use crate::error::{Error, Result};
use crate::matcher::match_images;
use crate::saliency::QueryDescriptor;

/// `1 - similarity` between a query frame and a later frame used as reference.
pub fn information_gain(a: &QueryDescriptor, b_as_reference: &ImageDescriptor) -> Result<f64> {
    Ok(1.0 - match_images(a, b_as_reference)?.value())
}

/// Result of the information-gain stage for one start index.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoGainOutcome {
    pub length: usize,
    /// Gains examined, in order: frame `start` against `start + min_k`, ...
    pub gains: Vec<f64>,
    /// The stage still wanted to grow when the traverse ran out.
    pub truncated: bool,
}

/// Information-gain loop over an arbitrary gain oracle.
///
/// Starting from `min_k`, compares frame `start` with frame `start + k`
/// while `k < max_k_info_gain`; each gain of at least `IT` extends `k` by one.
pub fn initial_length_with(
    traverse_len: usize,
    start: usize,
    cfg: &PipelineConfig,
    mut gain_at: impl FnMut(usize) -> Result<f64>,
) -> Result<InfoGainOutcome> {
    if start >= traverse_len {
        return Err(Error::Range {
            index: start,
            len: traverse_len,
        });
    }
    let mut k = cfg.min_k;
    let mut gains = Vec::new();
    let mut truncated = false;
    while k < cfg.max_k_info_gain {
        if start + k >= traverse_len {
            truncated = true;
            break;
        }
        let gain = gain_at(start + k)?;
        gains.push(gain);
        if gain >= cfg.it {
            k += 1;
        } else {
            break;
        }
    }
    Ok(InfoGainOutcome {
        length: k,
        gains,
        truncated,
    })
}

pub fn initial_sequence_length(
    traverse: &[EncodedFrame],
    start: usize,
    cfg: &PipelineConfig,
) -> Result<InfoGainOutcome> {
    initial_length_with(traverse.len(), start, cfg, |other| {
        information_gain(&traverse[start].query, &traverse[other].descriptor)
    })
}

/// Length decision for one start index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceDecision {
    pub start: usize,
    pub info_gain_length: usize,
    pub final_length: usize,
    pub seq_entropy: f64,
    #[serde(skip)]
    pub gains: Vec<f64>,
    /// The decided length needs more frames than the traverse has left;
    /// `final_length` is then clamped to what remains and the sequence is
    /// not matched.
    pub truncated: bool,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Grows `k` from `info_gain_length` by `seq_step` until the mean entropy of
/// frames `[start, start + k)` reaches `ET`, accepting `max_k` unconditionally.
pub fn dynamic_sequence_length(
    traverse_entropies: &[f64],
    start: usize,
    info_gain_length: usize,
    cfg: &PipelineConfig,
) -> Result<SequenceDecision> {
    let len = traverse_entropies.len();
    if start >= len {
        return Err(Error::Range { index: start, len });
    }
    if info_gain_length < cfg.min_k || info_gain_length > cfg.max_k {
        return Err(Error::invariant(format!(
            "info-gain length {info_gain_length} outside [{}, {}]",
            cfg.min_k, cfg.max_k
        )));
    }
    let available = len - start;
    let mut k = info_gain_length;
    loop {
        if k > available {
            return Ok(SequenceDecision {
                start,
                info_gain_length,
                final_length: available,
                seq_entropy: mean(&traverse_entropies[start..]),
                gains: Vec::new(),
                truncated: true,
            });
        }
        let seq_entropy = mean(&traverse_entropies[start..start + k]);
        if seq_entropy >= cfg.et || k >= cfg.max_k {
            return Ok(SequenceDecision {
                start,
                info_gain_length,
                final_length: k,
                seq_entropy,
                gains: Vec::new(),
                truncated: false,
            });
        }
        k = (k + cfg.seq_step).min(cfg.max_k);
    }
}

/// Both stages for one start index.
pub fn decide(traverse: &[EncodedFrame], start: usize, cfg: &PipelineConfig) -> Result<SequenceDecision> {
    let info = initial_sequence_length(traverse, start, cfg)?;
    let entropies: Vec<f64> = traverse.iter().map(EncodedFrame::image_entropy).collect();
    finish_decision(&entropies, start, info, cfg)
}

fn finish_decision(
    entropies: &[f64],
    start: usize,
    info: InfoGainOutcome,
    cfg: &PipelineConfig,
) -> Result<SequenceDecision> {
    let mut decision = dynamic_sequence_length(entropies, start, info.length, cfg)?;
    decision.truncated |= info.truncated;
    decision.gains = info.gains;
    Ok(decision)
}

/// Decisions for every start, in order, up to (excluding) the first
/// truncated one. Starts are decided in parallel.
pub fn decide_all(traverse: &[EncodedFrame], cfg: &PipelineConfig) -> Result<Vec<SequenceDecision>> {
    let mut all = decide_every_start(traverse, cfg)?;
    if let Some(cut) = all.iter().position(|d| d.truncated) {
        all.truncate(cut);
    }
    Ok(all)
}

/// Decisions for every start index, including truncated ones.
pub fn decide_every_start(
    traverse: &[EncodedFrame],
    cfg: &PipelineConfig,
) -> Result<Vec<SequenceDecision>> {
    cfg.validate()?;
    let entropies: Vec<f64> = traverse.iter().map(EncodedFrame::image_entropy).collect();
    (0..traverse.len())
        .into_par_iter()
        .map(|start| {
            let info = initial_sequence_length(traverse, start, cfg)?;
            finish_decision(&entropies, start, info, cfg)
        })
        .collect()
}

/// `k` consecutive query frames starting at `decision.start`.
#[derive(Debug, Clone)]
pub struct QuerySequence<'a> {
    pub decision: SequenceDecision,
    pub members: &'a [EncodedFrame],
}

impl QuerySequence<'_> {
    pub fn start(&self) -> usize {
        self.decision.start
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Decides the length at `start` and gathers the members.
///
/// Returns `Ok(None)` when the traverse ends before the decided length,
/// which signals the caller to stop issuing sequences.
pub fn build_query_sequence<'a>(
    traverse: &'a [EncodedFrame],
    start: usize,
    cfg: &PipelineConfig,
) -> Result<Option<QuerySequence<'a>>> {
    let decision = decide(traverse, start, cfg)?;
    Ok(sequence_from_decision(traverse, decision))
}

pub fn sequence_from_decision(
    traverse: &[EncodedFrame],
    decision: SequenceDecision,
) -> Option<QuerySequence<'_>> {
    if decision.truncated || decision.start + decision.final_length > traverse.len() {
        return None;
    }
    let members = &traverse[decision.start..decision.start + decision.final_length];
    Some(QuerySequence { decision, members })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saliency::whole_image_query;

    fn cfg() -> PipelineConfig {
        PipelineConfig::default()
    }

    /// Frames with one 2-d region each; frame `i` sits at angle `angles[i]`.
    fn angled_frames(angles: &[f64], entropy: f64) -> Vec<EncodedFrame> {
        angles
            .iter()
            .map(|a| {
                let (c, s) = if *a == std::f64::consts::FRAC_PI_2 {
                    (0.0, 1.0)
                } else {
                    (a.cos(), a.sin())
                };
                let d = ImageDescriptor::from_rows(1, 2, vec![c, s]).unwrap();
                EncodedFrame {
                    query: whole_image_query(&d, entropy),
                    descriptor: d,
                }
            })
            .collect()
    }

    #[test]
    fn gain_examples() {
        let frames = angled_frames(&[0.0, 0.0, std::f64::consts::FRAC_PI_2], 0.5);
        let g = |a: usize, b: usize| information_gain(&frames[a].query, &frames[b].descriptor).unwrap();
        assert_eq!(g(0, 1), 0.0);
        assert_eq!(g(0, 2), 1.0);

        let zero = ImageDescriptor::from_rows(1, 2, vec![0.0, 0.0]).unwrap();
        assert_eq!(information_gain(&whole_image_query(&zero, 0.0), &frames[0].descriptor).unwrap(), 1.0);

        let seventy = angled_frames(&[0.0, 0.7f64.acos()], 0.5);
        let gain = information_gain(&seventy[0].query, &seventy[1].descriptor).unwrap();
        assert!((gain - 0.3).abs() < 1e-12);
    }

    #[test]
    fn identical_frames_keep_min_k() {
        let frames = angled_frames(&[0.3; 10], 0.9);
        let out = initial_sequence_length(&frames, 0, &cfg()).unwrap();
        assert_eq!(out.length, 1);
        assert_eq!(out.gains, vec![0.0]);
        assert!(!out.truncated);
    }

    #[test]
    fn orthogonal_frames_hit_the_cap() {
        // frames alternate between two orthogonal directions relative to frame 0
        let angles: Vec<f64> = (0..20)
            .map(|i| if i == 0 { 0.0 } else { std::f64::consts::FRAC_PI_2 })
            .collect();
        let frames = angled_frames(&angles, 0.9);
        let out = initial_sequence_length(&frames, 0, &cfg()).unwrap();
        assert_eq!(out.length, 15);
        assert_eq!(out.gains.len(), 14);
    }

    #[test]
    fn traced_gains_stop_at_first_low_gain() {
        let gains = [0.95, 0.93, 0.2, 0.99];
        let out = initial_length_with(10, 0, &cfg(), |i| Ok(gains[i - 1])).unwrap();
        assert_eq!(out.length, 3);
        assert_eq!(out.gains, vec![0.95, 0.93, 0.2]);

        // same trace through real descriptors
        let angles: Vec<f64> = std::iter::once(0.0)
            .chain(gains.iter().map(|g| (1.0 - g).acos()))
            .chain(std::iter::repeat_n(0.0, 5))
            .collect();
        let frames = angled_frames(&angles, 0.9);
        assert_eq!(initial_sequence_length(&frames, 0, &cfg()).unwrap().length, 3);
    }

    #[test]
    fn initial_length_range_and_truncation() {
        assert!(matches!(
            initial_length_with(5, 5, &cfg(), |_| Ok(1.0)),
            Err(Error::Range { index: 5, len: 5 })
        ));
        let out = initial_length_with(5, 2, &cfg(), |_| Ok(1.0)).unwrap();
        assert_eq!(out.length, 3);
        assert!(out.truncated);
    }

    #[test]
    fn high_entropy_accepts_immediately() {
        let e = vec![0.9; 40];
        let d = dynamic_sequence_length(&e, 0, 4, &cfg()).unwrap();
        assert_eq!(d.final_length, 4);
        assert!(!d.truncated);
    }

    #[test]
    fn low_entropy_grows_to_max_k() {
        let e = vec![0.1; 40];
        let d = dynamic_sequence_length(&e, 3, 2, &cfg()).unwrap();
        assert_eq!(d.final_length, 25);
        assert!((d.seq_entropy - 0.1).abs() < 1e-12);
    }

    #[test]
    fn entropy_growth_hand_traced() {
        // k=2: 0.3 -> k=3: (0.3+0.3+0.9)/3 = 0.5 >= 0.5, accepted
        let e = [0.3, 0.3, 0.9, 0.9, 0.9, 0.9];
        let d = dynamic_sequence_length(&e, 0, 2, &cfg()).unwrap();
        assert_eq!(d.final_length, 3);
        assert!((d.seq_entropy - 0.5).abs() < 1e-12);

        // k=2: 0.3, k=3: 0.4667, k=4: 0.575 -> 4
        let e = [0.3, 0.3, 0.8, 0.9, 0.9, 0.9];
        let d = dynamic_sequence_length(&e, 0, 2, &cfg()).unwrap();
        assert_eq!(d.final_length, 4);
        assert!((d.seq_entropy - 0.575).abs() < 1e-12);
    }

    #[test]
    fn step_larger_than_one_caps_at_max_k() {
        let c = PipelineConfig { seq_step: 4, max_k: 10, ..cfg() };
        let e = vec![0.0; 30];
        let d = dynamic_sequence_length(&e, 0, 1, &c).unwrap();
        assert_eq!(d.final_length, 10);
    }

    #[test]
    fn entropy_stage_truncates_at_traverse_end() {
        let e = vec![0.1; 10];
        let d = dynamic_sequence_length(&e, 4, 1, &cfg()).unwrap();
        assert!(d.truncated);
        assert_eq!(d.final_length, 6);
    }

    #[test]
    fn fixed_k_one_gives_single_frame_sequences() {
        let c = cfg().with_fixed_k(1);
        let frames = angled_frames(&[0.0, 0.5, 1.0, 1.5], 0.0);
        let ds = decide_all(&frames, &c).unwrap();
        assert_eq!(ds.len(), 4);
        assert!(ds.iter().all(|d| d.final_length == 1));
    }

    #[test]
    fn valid_starts_follow_n_minus_k_plus_one() {
        let c = cfg().with_fixed_k(10);
        let frames = angled_frames(&vec![0.2; 100], 0.9);
        let ds = decide_all(&frames, &c).unwrap();
        assert_eq!(ds.len(), 91);
        assert_eq!(ds.last().unwrap().start, 90);
        assert!(build_query_sequence(&frames, 91, &c).unwrap().is_none());
    }

    #[test]
    fn members_are_consecutive_slices() {
        let c = PipelineConfig { max_k_info_gain: 4, max_k: 6, ..cfg() };
        let angles: Vec<f64> = (0..20).map(|i| (i % 3) as f64 * 0.7).collect();
        let frames: Vec<EncodedFrame> = angled_frames(&angles, 0.0)
            .into_iter()
            .enumerate()
            .map(|(i, mut f)| {
                let entropy = if i % 4 == 0 { 0.9 } else { 0.2 };
                f.query = whole_image_query(&f.descriptor, entropy);
                f
            })
            .collect();
        for start in 0..20 {
            match build_query_sequence(&frames, start, &c).unwrap() {
                Some(seq) => {
                    let k = seq.len();
                    assert!((c.min_k..=c.max_k).contains(&k));
                    assert_eq!(seq.members, &frames[start..start + k]);
                }
                None => assert!(start > 10),
            }
        }
    }
}
