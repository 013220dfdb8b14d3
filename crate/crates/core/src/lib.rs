//! SALSA spatial audio features for sound event localization and detection.
//!
//! The pipeline turns 4-channel first-order ambisonics (FOA) or microphone
//! array (MIC) recordings into an 8-channel time-frequency feature: four
//! log-power spectrograms, a direct-to-reverberant ratio estimate, and three
//! normalized principal-eigenvector components that are non-zero only on
//! bins dominated by a single source. Around it sit label-consistent
//! augmentations, the SEDXYZ and ACCDOA output codecs, the segment-based
//! SELD metrics, and an anechoic FOA scene synthesizer for ground truth.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod audio_io;
pub mod augment;
pub mod cli;
pub mod config;
pub mod eigen;
pub mod error;
pub mod feature_file;
pub mod kv;
pub mod metrics;
pub mod outputs;
pub mod salsa;
pub mod synth;
pub mod tfr;
pub mod types;

pub use audio_io::MultichannelAudio;
pub use augment::SpatialPattern;
pub use config::ToolConfig;
pub use error::{Result, SalsaError};
pub use metrics::SeldScores;
pub use outputs::{OutputFormat, SeldFrameOutput};
pub use salsa::{extract_salsa, SalsaConfig, SalsaFeature};
pub use synth::{render_foa, SceneSpec, SourceSignal, SourceSpec};
pub use tfr::StftConfig;
pub use types::{ArrayFormat, EventAnnotation};
