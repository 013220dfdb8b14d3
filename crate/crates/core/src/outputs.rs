//! Class-wise SELD output formats and their conversion to and from labels.
//!
//! Two formats share one in-memory frame type:
//!
//! * **SEDXYZ** stores a class activity and a separate Cartesian DOA.
//! * **ACCDOA** folds activity into the DOA length; `activity` mirrors
//!   `|doa|` after encoding and is ignored when decoding.
//!
//! Both are class-wise: one DOA per class and frame. When two tracks of the
//! same class overlap only the lowest track index is encoded, and decoding
//! always emits track 0.

use crate::error::{Result, SalsaError};
use crate::types::{
    direction_to_unit, normalize_azimuth, sort_annotations, unit_to_direction, EventAnnotation,
    ELEVATION_MAX_DEG, ELEVATION_MIN_DEG, NUM_CLASSES,
};

/// Activity threshold used to binarize class predictions.
pub const DEFAULT_THRESHOLD: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    SedXyz,
    AccDoa,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassOutput {
    pub activity: f64,
    /// Cartesian (x, y, z).
    pub doa: [f64; 3],
}

impl ClassOutput {
    pub fn doa_norm(&self) -> f64 {
        self.doa.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Predictions for every class at one frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SeldFrameOutput {
    pub classes: [ClassOutput; NUM_CLASSES],
}

/// Build per-frame targets from annotations.
pub fn encode_labels(
    events: &[EventAnnotation],
    num_frames: usize,
    format: OutputFormat,
) -> Result<Vec<SeldFrameOutput>> {
    let mut out = vec![SeldFrameOutput::default(); num_frames];
    // track index of the event currently occupying each (frame, class)
    let mut owner: Vec<Option<usize>> = vec![None; num_frames * NUM_CLASSES];
    for e in events {
        if e.frame_index >= num_frames {
            return Err(SalsaError::Range(format!(
                "event frame {} beyond sequence of {num_frames} frames",
                e.frame_index
            )));
        }
        if e.class_index >= NUM_CLASSES {
            return Err(SalsaError::Range(format!(
                "class {} out of range",
                e.class_index
            )));
        }
        let slot = e.frame_index * NUM_CLASSES + e.class_index;
        if owner[slot].is_some_and(|t| t <= e.track_index) {
            continue;
        }
        owner[slot] = Some(e.track_index);
        let unit = direction_to_unit(e.azimuth_deg, e.elevation_deg);
        // both formats carry unit activity on active classes; the ACCDOA
        // vector is activity * unit direction
        out[e.frame_index].classes[e.class_index] = ClassOutput {
            activity: 1.0,
            doa: unit,
        };
    }
    if format == OutputFormat::AccDoa {
        for frame in &mut out {
            for c in &mut frame.classes {
                c.activity = c.doa_norm();
            }
        }
    }
    Ok(out)
}

/// Decoded annotations plus the number of active outputs whose DOA was the
/// zero vector (emitted at azimuth 0, elevation 0).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecodedEvents {
    pub events: Vec<EventAnnotation>,
    pub zero_norm_count: usize,
}

/// Threshold outputs into annotations. A class is active when its activity
/// (SEDXYZ) or DOA length (ACCDOA) is strictly greater than `threshold`.
pub fn decode(
    outputs: &[SeldFrameOutput],
    format: OutputFormat,
    threshold: f64,
) -> Result<DecodedEvents> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(SalsaError::Range(format!(
            "threshold {threshold} outside (0, 1)"
        )));
    }
    let mut decoded = DecodedEvents::default();
    for (frame, out) in outputs.iter().enumerate() {
        for (class, c) in out.classes.iter().enumerate() {
            let score = match format {
                OutputFormat::SedXyz => c.activity,
                OutputFormat::AccDoa => c.doa_norm(),
            };
            if !(score > threshold) {
                continue;
            }
            let (az, el) = match unit_to_direction(c.doa) {
                Some(dir) => dir,
                None => {
                    decoded.zero_norm_count += 1;
                    (0.0, 0.0)
                }
            };
            decoded.events.push(EventAnnotation {
                frame_index: frame,
                class_index: class,
                track_index: 0,
                azimuth_deg: normalize_azimuth(az),
                elevation_deg: el.clamp(ELEVATION_MIN_DEG, ELEVATION_MAX_DEG),
            });
        }
    }
    sort_annotations(&mut decoded.events);
    Ok(decoded)
}

/// Repeat every frame `factor` times.
pub fn upsample_outputs(
    outputs: &[SeldFrameOutput],
    factor: usize,
) -> Result<Vec<SeldFrameOutput>> {
    if factor == 0 {
        return Err(SalsaError::Range(
            "upsampling factor must be at least 1".into(),
        ));
    }
    Ok(outputs
        .iter()
        .flat_map(|frame| std::iter::repeat_n(*frame, factor))
        .collect())
}
