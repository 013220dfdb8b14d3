//! Label-consistent augmentation of SALSA features.
//!
//! Spatial patterns reflect and swap the FOA axes. They act on the feature
//! (spectrogram and spatial channels), on the raw audio, on event labels and
//! on Cartesian model outputs, always with the same geometry so that features
//! and labels stay consistent. Masking operations (cutout, time/frequency
//! stripes, SS-bin dropout) are seeded and reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio_io::MultichannelAudio;
use crate::error::{Result, SalsaError};
use crate::outputs::SeldFrameOutput;
use crate::salsa::{SalsaFeature, DRR_CHANNEL, NUM_FEATURE_CHANNELS, SPATIAL_CHANNEL};
use crate::tfr::LOG_FLOOR_DB;
use crate::types::{normalize_azimuth, ArrayFormat, EventAnnotation};

pub const NUM_SPATIAL_PATTERNS: usize = 16;

// Channel indices within the FOA (W, Y, Z, X) spectrogram block.
const SPEC_Y: usize = 1;
const SPEC_X: usize = 3;
// Spatial cue channels hold (Y, Z, X).
const CUE_Y: usize = SPATIAL_CHANNEL;
const CUE_Z: usize = SPATIAL_CHANNEL + 1;
const CUE_X: usize = SPATIAL_CHANNEL + 2;

/// One of the 16 axis transforms: optional X/Y swap followed by independent
/// sign flips of the (post-swap) X, Y and Z axes.
///
/// The id packs the flags as bits: 1 = swap_xy, 2 = neg_x, 4 = neg_y, 8 = neg_z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SpatialPattern {
    pub swap_xy: bool,
    pub neg_x: bool,
    pub neg_y: bool,
    pub neg_z: bool,
}

impl SpatialPattern {
    pub const IDENTITY: SpatialPattern = SpatialPattern {
        swap_xy: false,
        neg_x: false,
        neg_y: false,
        neg_z: false,
    };

    pub fn from_id(id: usize) -> Result<Self> {
        if id >= NUM_SPATIAL_PATTERNS {
            return Err(SalsaError::Range(format!(
                "spatial pattern id {id} outside [0, 16)"
            )));
        }
        Ok(Self {
            swap_xy: id & 1 != 0,
            neg_x: id & 2 != 0,
            neg_y: id & 4 != 0,
            neg_z: id & 8 != 0,
        })
    }

    pub fn id(&self) -> usize {
        usize::from(self.swap_xy)
            | usize::from(self.neg_x) << 1
            | usize::from(self.neg_y) << 2
            | usize::from(self.neg_z) << 3
    }

    /// All 16 patterns in id order; index 0 is the identity.
    pub fn all() -> [SpatialPattern; NUM_SPATIAL_PATTERNS] {
        std::array::from_fn(|i| Self::from_id(i).expect("id below 16"))
    }

    /// The pattern undoing `self`.
    ///
    /// Flipping then swapping equals swapping then flipping the other axis, so
    /// the inverse of a swapping pattern exchanges the X and Y sign flags.
    pub fn inverse(&self) -> Self {
        if self.swap_xy {
            Self {
                neg_x: self.neg_y,
                neg_y: self.neg_x,
                ..*self
            }
        } else {
            *self
        }
    }

    /// Apply the transform to a Cartesian vector (x, y, z).
    pub fn apply_vector(&self, v: [f64; 3]) -> [f64; 3] {
        let [mut x, mut y, mut z] = v;
        if self.swap_xy {
            std::mem::swap(&mut x, &mut y);
        }
        if self.neg_x {
            x = -x;
        }
        if self.neg_y {
            y = -y;
        }
        if self.neg_z {
            z = -z;
        }
        [x, y, z]
    }

    /// Apply the transform to a direction in degrees.
    pub fn apply_direction(&self, az_deg: f64, el_deg: f64) -> (f64, f64) {
        let mut az = az_deg;
        let mut el = el_deg;
        if self.swap_xy {
            az = 90.0 - az;
        }
        if self.neg_x {
            az = 180.0 - az;
        }
        if self.neg_y {
            az = -az;
        }
        if self.neg_z {
            el = -el;
        }
        (normalize_azimuth(az), el)
    }
}

fn require_foa(feat: &SalsaFeature) -> Result<()> {
    if feat.format != ArrayFormat::Foa {
        return Err(SalsaError::Unsupported(
            "spatial patterns are only defined for FOA features".into(),
        ));
    }
    Ok(())
}

fn negate_channel(feat: &mut SalsaFeature, channel: usize) {
    for v in feat.channel_mut(channel) {
        // keeps exact zeros on non-SS bins positive
        if *v != 0.0 {
            *v = -*v;
        }
    }
}

fn swap_channels(feat: &mut SalsaFeature, a: usize, b: usize) {
    let len = feat.plane_len();
    let (lo, hi) = (a.min(b), a.max(b));
    let (head, tail) = feat.data.split_at_mut(hi * len);
    head[lo * len..(lo + 1) * len].swap_with_slice(&mut tail[..len]);
}

/// Transform an FOA feature. The W spectrogram and DRR channel are untouched;
/// the Y/X spectrograms swap with the axes, and the spatial cues follow the
/// full pattern.
pub fn apply_spatial_pattern_feature(
    feat: &SalsaFeature,
    p: SpatialPattern,
) -> Result<SalsaFeature> {
    require_foa(feat)?;
    let mut out = feat.clone();
    if p.swap_xy {
        swap_channels(&mut out, SPEC_Y, SPEC_X);
        swap_channels(&mut out, CUE_Y, CUE_X);
    }
    if p.neg_x {
        negate_channel(&mut out, CUE_X);
    }
    if p.neg_y {
        negate_channel(&mut out, CUE_Y);
    }
    if p.neg_z {
        negate_channel(&mut out, CUE_Z);
    }
    Ok(out)
}

/// Transform four-channel FOA audio (W, Y, Z, X) in the time domain.
pub fn apply_spatial_pattern_audio(
    audio: &MultichannelAudio,
    p: SpatialPattern,
) -> Result<MultichannelAudio> {
    if audio.num_channels() != 4 {
        return Err(SalsaError::Config(format!(
            "FOA audio needs 4 channels, got {}",
            audio.num_channels()
        )));
    }
    let ch = audio.channels();
    let sign = |neg: bool| if neg { -1.0 } else { 1.0 };
    let (mut x, mut y) = (ch[3].clone(), ch[1].clone());
    if p.swap_xy {
        std::mem::swap(&mut x, &mut y);
    }
    let scale = |v: Vec<f64>, s: f64| -> Vec<f64> { v.into_iter().map(|a| a * s).collect() };
    let w = ch[0].clone();
    let y = scale(y, sign(p.neg_y));
    let z = scale(ch[2].clone(), sign(p.neg_z));
    let x = scale(x, sign(p.neg_x));
    MultichannelAudio::new(vec![w, y, z, x], audio.sample_rate())
}

/// Map event directions through the pattern; frame, class and track are kept.
pub fn apply_spatial_pattern_labels(
    events: &[EventAnnotation],
    p: SpatialPattern,
) -> Vec<EventAnnotation> {
    events
        .iter()
        .map(|e| {
            let (az, el) = p.apply_direction(e.azimuth_deg, e.elevation_deg);
            EventAnnotation {
                azimuth_deg: az,
                elevation_deg: el,
                ..*e
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskKind {
    Cutout,
    TimeMask,
    FreqMask,
}

/// A rectangular region applied to all eight channels.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSpec {
    pub kind: MaskKind,
    pub frames: std::ops::Range<usize>,
    pub bins: std::ops::Range<usize>,
}

impl MaskSpec {
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty() || self.bins.is_empty()
    }
}

/// Fill value for a masked channel: the log floor on spectrograms, zero on
/// spatial channels.
pub fn mask_fill(channel: usize) -> f32 {
    if channel < DRR_CHANNEL {
        LOG_FLOOR_DB as f32
    } else {
        0.0
    }
}

/// Apply one mask in place. Masked bins also leave the SS mask.
pub fn apply_mask(feat: &mut SalsaFeature, mask: &MaskSpec) -> Result<()> {
    if mask.frames.end > feat.num_frames || mask.bins.end > feat.num_bins {
        return Err(SalsaError::Shape(format!(
            "mask {:?}x{:?} exceeds {}x{}",
            mask.frames, mask.bins, feat.num_frames, feat.num_bins
        )));
    }
    for ch in 0..NUM_FEATURE_CHANNELS {
        let fill = mask_fill(ch);
        for t in mask.frames.clone() {
            let i = feat.index(ch, t, 0);
            feat.data[i + mask.bins.start..i + mask.bins.end].fill(fill);
        }
    }
    for t in mask.frames.clone() {
        let row = t * feat.num_bins;
        feat.ss_mask[row + mask.bins.start..row + mask.bins.end].fill(false);
    }
    Ok(())
}

/// Inclusive size range for one axis of a random rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeRange {
    pub min: usize,
    pub max: usize,
}

impl SizeRange {
    pub fn new(min: usize, max: usize) -> Self {
        Self { min, max }
    }
}

fn sample_span(
    rng: &mut ChaCha8Rng,
    range: SizeRange,
    dim: usize,
) -> Result<std::ops::Range<usize>> {
    if range.min > range.max || range.max > dim {
        return Err(SalsaError::Range(format!(
            "size range [{}, {}] invalid for dimension {dim}",
            range.min, range.max
        )));
    }
    let len = rng.random_range(range.min..=range.max);
    let start = rng.random_range(0..=dim - len);
    Ok(start..start + len)
}

/// Draw the rectangle a call to [`random_cutout`] with this seed would mask.
pub fn sample_cutout(
    feat: &SalsaFeature,
    seed: u64,
    time: SizeRange,
    freq: SizeRange,
) -> Result<MaskSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames = sample_span(&mut rng, time, feat.num_frames)?;
    let bins = sample_span(&mut rng, freq, feat.num_bins)?;
    Ok(MaskSpec {
        kind: MaskKind::Cutout,
        frames,
        bins,
    })
}

/// Mask one random rectangle across all channels.
pub fn random_cutout(
    feat: &SalsaFeature,
    seed: u64,
    time: SizeRange,
    freq: SizeRange,
) -> Result<SalsaFeature> {
    let mask = sample_cutout(feat, seed, time, freq)?;
    let mut out = feat.clone();
    apply_mask(&mut out, &mask)?;
    Ok(out)
}

/// Stripe counts and maximum widths for [`spec_augment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpecAugmentParams {
    pub max_time_width: usize,
    pub max_freq_width: usize,
    pub time_masks: usize,
    pub freq_masks: usize,
}

/// Draw the stripes a call to [`spec_augment`] with this seed would mask.
pub fn sample_spec_augment(
    feat: &SalsaFeature,
    seed: u64,
    params: SpecAugmentParams,
) -> Result<Vec<MaskSpec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut masks = Vec::with_capacity(params.time_masks + params.freq_masks);
    for _ in 0..params.time_masks {
        let frames = sample_span(
            &mut rng,
            SizeRange::new(0, params.max_time_width),
            feat.num_frames,
        )?;
        masks.push(MaskSpec {
            kind: MaskKind::TimeMask,
            frames,
            bins: 0..feat.num_bins,
        });
    }
    for _ in 0..params.freq_masks {
        let bins = sample_span(
            &mut rng,
            SizeRange::new(0, params.max_freq_width),
            feat.num_bins,
        )?;
        masks.push(MaskSpec {
            kind: MaskKind::FreqMask,
            frames: 0..feat.num_frames,
            bins,
        });
    }
    Ok(masks)
}

/// Time and frequency stripe masking on all channels.
pub fn spec_augment(
    feat: &SalsaFeature,
    seed: u64,
    params: SpecAugmentParams,
) -> Result<SalsaFeature> {
    let masks = sample_spec_augment(feat, seed, params)?;
    let mut out = feat.clone();
    for m in &masks {
        apply_mask(&mut out, m)?;
    }
    Ok(out)
}

/// Independently remove each SS bin from channels 4-7 with probability `p`.
pub fn ss_bin_dropout(feat: &SalsaFeature, seed: u64, p: f64) -> Result<SalsaFeature> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SalsaError::Range(format!(
            "dropout probability {p} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = feat.clone();
    let plane = out.plane_len();
    for i in 0..plane {
        if !out.ss_mask[i] {
            continue;
        }
        // p = 1 must drop every bin regardless of the draw
        if p >= 1.0 || rng.random::<f64>() < p {
            out.ss_mask[i] = false;
            for ch in DRR_CHANNEL..NUM_FEATURE_CHANNELS {
                out.data[ch * plane + i] = 0.0;
            }
        }
    }
    Ok(out)
}

/// One transformed copy of the feature per spatial pattern, in id order.
pub fn tta_expand(feat: &SalsaFeature) -> Result<Vec<SalsaFeature>> {
    SpatialPattern::all()
        .iter()
        .map(|&p| apply_spatial_pattern_feature(feat, p))
        .collect()
}

/// Undo each pattern on its model output and average. `outputs[k]` must
/// have been predicted from the feature transformed by `patterns[k]`.
pub fn tta_fold_with(
    patterns: &[SpatialPattern],
    outputs: &[Vec<SeldFrameOutput>],
) -> Result<Vec<SeldFrameOutput>> {
    if patterns.len() != outputs.len() || outputs.is_empty() {
        return Err(SalsaError::Shape(format!(
            "{} patterns for {} output sequences",
            patterns.len(),
            outputs.len()
        )));
    }
    let frames = outputs[0].len();
    if outputs.iter().any(|o| o.len() != frames) {
        return Err(SalsaError::Shape(
            "output sequences differ in frame count".into(),
        ));
    }
    let weight = 1.0 / outputs.len() as f64;
    let mut folded = vec![SeldFrameOutput::default(); frames];
    for (p, seq) in patterns.iter().zip(outputs) {
        let inv = p.inverse();
        for (acc, frame) in folded.iter_mut().zip(seq) {
            for (a, c) in acc.classes.iter_mut().zip(&frame.classes) {
                let doa = inv.apply_vector(c.doa);
                a.activity += weight * c.activity;
                for k in 0..3 {
                    a.doa[k] += weight * doa[k];
                }
            }
        }
    }
    Ok(folded)
}

/// [`tta_fold_with`] over the 16 outputs produced from [`tta_expand`].
pub fn tta_fold(outputs: &[Vec<SeldFrameOutput>]) -> Result<Vec<SeldFrameOutput>> {
    if outputs.len() != NUM_SPATIAL_PATTERNS {
        return Err(SalsaError::Shape(format!(
            "expected {NUM_SPATIAL_PATTERNS} output sequences, got {}",
            outputs.len()
        )));
    }
    tta_fold_with(&SpatialPattern::all(), outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outputs::{encode_labels, OutputFormat};
    use proptest::prelude::*;

    fn toy_feature() -> SalsaFeature {
        let (frames, bins) = (6, 5);
        let mut feat = SalsaFeature::zeros(frames, bins, 80.0, ArrayFormat::Foa);
        for ch in 0..8 {
            for t in 0..frames {
                for f in 0..bins {
                    let ss = (t + f) % 2 == 0;
                    let i = feat.index(ch, t, f);
                    feat.data[i] = if ch < 4 {
                        -(10.0 * ch as f32 + t as f32 + 0.1 * f as f32)
                    } else if ss {
                        0.5 + ch as f32 + 0.01 * (t * bins + f) as f32
                    } else {
                        0.0
                    };
                }
            }
        }
        feat.mask_from_drr();
        feat
    }

    #[test]
    fn pattern_ids_round_trip() {
        for (i, p) in SpatialPattern::all().iter().enumerate() {
            assert_eq!(p.id(), i);
        }
        assert_eq!(
            SpatialPattern::from_id(0).unwrap(),
            SpatialPattern::IDENTITY
        );
        assert!(SpatialPattern::from_id(16).is_err());
        let distinct: std::collections::HashSet<_> = SpatialPattern::all().into_iter().collect();
        assert_eq!(distinct.len(), 16);
    }

    #[test]
    fn inverse_undoes_vector_transform() {
        let v = [0.3, -0.7, 0.2];
        for p in SpatialPattern::all() {
            assert_eq!(p.inverse().apply_vector(p.apply_vector(v)), v);
            assert_eq!(p.inverse().inverse(), p);
        }
    }

    #[test]
    fn direction_map_agrees_with_vector_map() {
        for p in SpatialPattern::all() {
            for &(az, el) in &[(30.0, 10.0), (-170.0, -40.0), (95.0, 0.0)] {
                let (az2, el2) = p.apply_direction(az, el);
                let expected = p.apply_vector(crate::types::direction_to_unit(az, el));
                let got = crate::types::direction_to_unit(az2, el2);
                for k in 0..3 {
                    assert!((got[k] - expected[k]).abs() < 1e-12, "{p:?}");
                }
            }
        }
    }

    #[test]
    fn identity_pattern_is_identity() {
        let feat = toy_feature();
        assert_eq!(
            apply_spatial_pattern_feature(&feat, SpatialPattern::IDENTITY).unwrap(),
            feat
        );
    }

    #[test]
    fn neg_y_touches_only_channel_five() {
        let feat = toy_feature();
        let p = SpatialPattern {
            neg_y: true,
            ..Default::default()
        };
        let out = apply_spatial_pattern_feature(&feat, p).unwrap();
        for ch in 0..8 {
            for (a, b) in out.channel(ch).iter().zip(feat.channel(ch)) {
                if ch == 5 {
                    assert_eq!(*a, -*b);
                } else {
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn swap_moves_spectrograms_and_cues() {
        let feat = toy_feature();
        let p = SpatialPattern {
            swap_xy: true,
            neg_x: true,
            ..Default::default()
        };
        let out = apply_spatial_pattern_feature(&feat, p).unwrap();
        assert_eq!(out.channel(0), feat.channel(0));
        assert_eq!(out.channel(1), feat.channel(3));
        assert_eq!(out.channel(3), feat.channel(1));
        assert_eq!(out.channel(4), feat.channel(4));
        assert_eq!(out.channel(5), feat.channel(7));
        assert_eq!(out.channel(6), feat.channel(6));
        let neg: Vec<f32> = feat
            .channel(5)
            .iter()
            .map(|v| if *v == 0.0 { 0.0 } else { -v })
            .collect();
        assert_eq!(out.channel(7), neg.as_slice());
    }

    #[test]
    fn mic_features_are_rejected() {
        let mut feat = toy_feature();
        feat.format = ArrayFormat::Mic;
        assert!(matches!(
            apply_spatial_pattern_feature(&feat, SpatialPattern::IDENTITY),
            Err(SalsaError::Unsupported(_))
        ));
    }

    #[test]
    fn label_examples() {
        let e = EventAnnotation::new(0, 1, 0, 30.0, 10.0).unwrap();
        let ny = apply_spatial_pattern_labels(
            &[e],
            SpatialPattern {
                neg_y: true,
                ..Default::default()
            },
        );
        assert_eq!((ny[0].azimuth_deg, ny[0].elevation_deg), (-30.0, 10.0));
        let sx = apply_spatial_pattern_labels(
            &[e],
            SpatialPattern {
                swap_xy: true,
                neg_x: true,
                ..Default::default()
            },
        );
        assert_eq!(sx[0].azimuth_deg, 120.0);
        assert_eq!(
            apply_spatial_pattern_labels(&[e], SpatialPattern::IDENTITY)[0],
            e
        );
    }

    #[test]
    fn cutout_cases() {
        let feat = toy_feature();
        let zero = random_cutout(&feat, 3, SizeRange::new(0, 0), SizeRange::new(0, 0)).unwrap();
        assert_eq!(zero, feat);

        let full = random_cutout(&feat, 3, SizeRange::new(6, 6), SizeRange::new(5, 5)).unwrap();
        for ch in 0..4 {
            assert!(full.channel(ch).iter().all(|&v| v == -120.0));
        }
        for ch in 4..8 {
            assert!(full.channel(ch).iter().all(|&v| v == 0.0));
        }
        assert_eq!(full.ss_count(), 0);

        let a = random_cutout(&feat, 11, SizeRange::new(1, 4), SizeRange::new(1, 3)).unwrap();
        let b = random_cutout(&feat, 11, SizeRange::new(1, 4), SizeRange::new(1, 3)).unwrap();
        assert_eq!(a, b);
        assert!(random_cutout(&feat, 1, SizeRange::new(0, 7), SizeRange::new(0, 1)).is_err());
    }

    #[test]
    fn spec_augment_cases() {
        let feat = toy_feature();
        let none = SpecAugmentParams {
            max_time_width: 3,
            max_freq_width: 2,
            time_masks: 0,
            freq_masks: 0,
        };
        assert_eq!(spec_augment(&feat, 5, none).unwrap(), feat);

        let mut out = feat.clone();
        apply_mask(
            &mut out,
            &MaskSpec {
                kind: MaskKind::TimeMask,
                frames: 2..4,
                bins: 0..5,
            },
        )
        .unwrap();
        for ch in 0..8 {
            for t in 0..6 {
                for f in 0..5 {
                    let expected = if (2..4).contains(&t) {
                        mask_fill(ch)
                    } else {
                        feat.get(ch, t, f)
                    };
                    assert_eq!(out.get(ch, t, f), expected);
                }
            }
        }

        let params = SpecAugmentParams {
            max_time_width: 3,
            max_freq_width: 2,
            time_masks: 2,
            freq_masks: 1,
        };
        assert_eq!(
            spec_augment(&feat, 9, params).unwrap(),
            spec_augment(&feat, 9, params).unwrap()
        );
        let masks = sample_spec_augment(&feat, 9, params).unwrap();
        assert_eq!(masks.len(), 3);
        assert_eq!(masks[0].bins, 0..5);
        assert_eq!(masks[2].frames, 0..6);
    }

    #[test]
    fn dropout_extremes() {
        let feat = toy_feature();
        assert_eq!(ss_bin_dropout(&feat, 4, 0.0).unwrap(), feat);
        let all = ss_bin_dropout(&feat, 4, 1.0).unwrap();
        for ch in 4..8 {
            assert!(all.channel(ch).iter().all(|&v| v == 0.0));
        }
        for ch in 0..4 {
            assert_eq!(all.channel(ch), feat.channel(ch));
        }
        assert_eq!(all.ss_count(), 0);
        assert!(ss_bin_dropout(&feat, 4, 1.5).is_err());
    }

    #[test]
    fn tta_shapes_and_identity_fold() {
        let feat = toy_feature();
        let expanded = tta_expand(&feat).unwrap();
        assert_eq!(expanded.len(), 16);
        assert_eq!(expanded[0], feat);

        let events = vec![EventAnnotation::new(1, 2, 0, 40.0, 5.0).unwrap()];
        let enc = encode_labels(&events, 3, OutputFormat::SedXyz).unwrap();
        let single =
            tta_fold_with(&[SpatialPattern::IDENTITY], std::slice::from_ref(&enc)).unwrap();
        assert_eq!(single, enc);
        assert!(tta_fold(std::slice::from_ref(&enc)).is_err());
        let mut short = enc.clone();
        short.pop();
        assert!(tta_fold_with(&[SpatialPattern::IDENTITY; 2], &[enc, short]).is_err());
    }

    fn annotation() -> impl Strategy<Value = EventAnnotation> {
        (
            0usize..100,
            0usize..12,
            0usize..3,
            -180i32..180,
            -45i32..=45,
        )
            .prop_map(|(f, c, t, az, el)| {
                EventAnnotation::new(f, c, t, f64::from(az), f64::from(el)).unwrap()
            })
    }

    proptest! {
        #[test]
        fn label_transform_inverse_restores(events in proptest::collection::vec(annotation(), 0..20), id in 0usize..16) {
            let p = SpatialPattern::from_id(id).unwrap();
            let forward = apply_spatial_pattern_labels(&events, p);
            for e in &forward {
                prop_assert!((-45.0..=45.0).contains(&e.elevation_deg));
                prop_assert!((-180.0..180.0).contains(&e.azimuth_deg));
            }
            let back = apply_spatial_pattern_labels(&forward, p.inverse());
            prop_assert_eq!(back, events);
        }

        #[test]
        fn masks_are_idempotent(t0 in 0usize..6, tl in 0usize..6, f0 in 0usize..5, fl in 0usize..5) {
            let feat = toy_feature();
            let mask = MaskSpec {
                kind: MaskKind::Cutout,
                frames: t0..(t0 + tl).min(6),
                bins: f0..(f0 + fl).min(5),
            };
            let mut once = feat.clone();
            apply_mask(&mut once, &mask).unwrap();
            let mut twice = once.clone();
            apply_mask(&mut twice, &mask).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
