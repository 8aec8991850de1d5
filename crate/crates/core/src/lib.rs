//! Training-free visual place recognition with dynamically sized query
//! sequences.
//!
//! Each frame is standardized to a fixed-size grayscale image and described
//! by block-normalized regional HOG vectors. Query frames keep only their
//! high-entropy regions of interest. Two frames are compared by regional
//! convolutional matching: every query ROI is scored by cosine similarity
//! against every reference region, the row maxima are averaged.
//!
//! Query frames are grouped into sequences whose length is chosen per start
//! index, first by information gain between consecutive frames and then by
//! the mean image entropy of the sequence. Each sequence is matched against
//! every same-length window of the reference traverse.
//!
//! The [`pipeline::Benchmark`] type runs the whole procedure and the
//! [`evaluation`] module scores it (accuracy, PR curve, AUC, PCU).

pub mod config;
pub mod dataset;
pub mod descriptor;
pub mod encoding;
pub mod error;
pub mod evaluation;
pub mod imaging;
pub mod matcher;
pub mod pipeline;
pub mod saliency;
pub mod seqmatch;
pub mod sequencer;

pub use config::{PipelineConfig, DEFAULT_T_E_MAX};
pub use dataset::synthetic::{generate_synthetic_traverse, SyntheticPair, Variation, WorldParams};
pub use dataset::{GroundTruth, Traverse};
pub use descriptor::{CellHistogramGrid, ImageDescriptor};
pub use encoding::EncodedFrame;
pub use error::{Error, Result};
pub use evaluation::{BenchmarkReport, MatchRecord, PrPoint};
pub use imaging::{EntropyMap, GradientMap, GrayImage, Raster};
pub use matcher::{MatchScore, ScoreMatrix};
pub use pipeline::{Benchmark, BenchmarkRun};
pub use saliency::{QueryDescriptor, RoiSelection};
pub use seqmatch::{PairScoreTable, SequenceMatchResult};
pub use sequencer::{QuerySequence, SequenceDecision};
