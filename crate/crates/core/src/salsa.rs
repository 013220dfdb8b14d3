//! Spatial cue-augmented log-spectrogram (SALSA) extraction.
//!
//! The feature stacks eight real channels on the STFT grid:
//!
//! | channel | content                                                    |
//! |---------|------------------------------------------------------------|
//! | 0..=3   | log-power spectrograms of the four input channels          |
//! | 4       | `log10` of the clipped eigenvalue ratio `lambda1 / lambda2` |
//! | 5..=7   | normalized principal eigenvector (Y, Z, X for FOA)         |
//!
//! Channels 4 to 7 are only populated on single-source (SS) bins, which must
//! pass both a magnitude test (power above a per-frequency noise floor) and a
//! coherence test (spatial covariance close to rank one). Everywhere else they
//! hold exact zeros.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::audio_io::MultichannelAudio;
use crate::eigen::{eigen_decompose, EigenPair, SpatialCovariance, DIM};
use crate::error::{Result, SalsaError};
use crate::tfr::{log_power, stft, ComplexSpectrogram, StftConfig};
use crate::types::ArrayFormat;

pub const NUM_FEATURE_CHANNELS: usize = 8;
pub const NUM_INPUT_CHANNELS: usize = DIM;
pub const DRR_CHANNEL: usize = 4;
/// First of the three normalized eigenvector channels.
pub const SPATIAL_CHANNEL: usize = 5;

/// Guard on `lambda2` relative to `lambda1` in the eigenvalue ratio.
const RATIO_EPSILON: f64 = 1e-6;
/// Minimum reference-component magnitude relative to the vector norm.
const REFERENCE_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SalsaConfig {
    /// Quantile of channel-0 log power across frames used as the noise floor.
    pub noise_floor_percentile: f64,
    /// Margin above the noise floor a bin must exceed, in dB.
    pub magnitude_threshold_db: f64,
    /// Minimum `lambda1 / lambda2` for a bin to count as single-source.
    pub coherence_threshold: f64,
    /// Covariance averaging neighbourhood along time, in frames (odd).
    pub smoothing_time: usize,
    /// Covariance averaging neighbourhood along frequency, in bins (odd).
    pub smoothing_freq: usize,
    pub drr_clip: (f64, f64),
    pub spatial_clip: (f64, f64),
    pub format: ArrayFormat,
    /// Highest bin that may be marked single-source; `None` keeps all bins.
    pub max_bin: Option<usize>,
}

impl Default for SalsaConfig {
    fn default() -> Self {
        Self {
            noise_floor_percentile: 0.05,
            magnitude_threshold_db: 5.0,
            coherence_threshold: 5.0,
            smoothing_time: 3,
            smoothing_freq: 3,
            drr_clip: (1.0, 100.0),
            spatial_clip: (-4.0, 4.0),
            format: ArrayFormat::Foa,
            max_bin: None,
        }
    }
}

impl SalsaConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(SalsaError::Config(msg));
        if !(0.0..=1.0).contains(&self.noise_floor_percentile) {
            return err(format!(
                "noise floor percentile {} outside [0, 1]",
                self.noise_floor_percentile
            ));
        }
        if !self.magnitude_threshold_db.is_finite() {
            return err("magnitude threshold must be finite".into());
        }
        if !(self.coherence_threshold > 1.0) {
            return err(format!(
                "coherence threshold {} must exceed 1",
                self.coherence_threshold
            ));
        }
        for (name, w) in [
            ("time", self.smoothing_time),
            ("frequency", self.smoothing_freq),
        ] {
            if w == 0 || w % 2 == 0 {
                return err(format!(
                    "{name} smoothing width {w} must be odd and positive"
                ));
            }
        }
        let (lo, hi) = self.drr_clip;
        if !(lo > 0.0 && lo < hi && hi > 1.0) {
            return err(format!(
                "DRR clip ({lo}, {hi}) must satisfy 0 < min < max, max > 1"
            ));
        }
        let (lo, hi) = self.spatial_clip;
        if !(lo < hi) {
            return err(format!("spatial clip ({lo}, {hi}) is empty"));
        }
        Ok(())
    }
}

/// Covariance matrices for every bin, laid out `[frame][bin]`.
#[derive(Debug, Clone)]
pub struct CovarianceField {
    pub matrices: Vec<SpatialCovariance>,
    pub num_frames: usize,
    pub num_bins: usize,
}

impl CovarianceField {
    pub fn get(&self, frame: usize, bin: usize) -> &SpatialCovariance {
        &self.matrices[frame * self.num_bins + bin]
    }
}

fn check_four_channels(spec: &ComplexSpectrogram) -> Result<()> {
    if spec.num_channels() != NUM_INPUT_CHANNELS {
        return Err(SalsaError::Config(format!(
            "expected {NUM_INPUT_CHANNELS} channels, got {}",
            spec.num_channels()
        )));
    }
    Ok(())
}

/// Mean of `x x^H` over the smoothing neighbourhood of one bin, truncated at
/// the edges of the grid.
pub fn covariance_at(
    spec: &ComplexSpectrogram,
    frame: usize,
    bin: usize,
    cfg: &SalsaConfig,
) -> SpatialCovariance {
    let ht = cfg.smoothing_time / 2;
    let hf = cfg.smoothing_freq / 2;
    let t0 = frame.saturating_sub(ht);
    let t1 = (frame + ht).min(spec.num_frames() - 1);
    let f0 = bin.saturating_sub(hf);
    let f1 = (bin + hf).min(spec.num_bins() - 1);

    let mut acc = [[Complex64::default(); DIM]; DIM];
    for t in t0..=t1 {
        for f in f0..=f1 {
            let x: [Complex64; DIM] = spec.bin_vector(t, f);
            for i in 0..DIM {
                acc[i][i].re += x[i].norm_sqr();
                for j in i + 1..DIM {
                    acc[i][j] += x[i] * x[j].conj();
                }
            }
        }
    }
    let count = ((t1 - t0 + 1) * (f1 - f0 + 1)) as f64;
    for i in 0..DIM {
        acc[i][i] /= count;
        for j in i + 1..DIM {
            acc[i][j] /= count;
            acc[j][i] = acc[i][j].conj();
        }
    }
    SpatialCovariance { matrix: acc }
}

/// Smoothed spatial covariance for every bin of a four-channel spectrogram.
pub fn estimate_covariance(
    spec: &ComplexSpectrogram,
    cfg: &SalsaConfig,
) -> Result<CovarianceField> {
    check_four_channels(spec)?;
    cfg.validate()?;
    let (frames, bins) = (spec.num_frames(), spec.num_bins());
    let matrices = (0..frames)
        .into_par_iter()
        .flat_map_iter(|t| (0..bins).map(move |f| covariance_at(spec, t, f, cfg)))
        .collect();
    Ok(CovarianceField {
        matrices,
        num_frames: frames,
        num_bins: bins,
    })
}

/// Linear-interpolated quantile of an already sorted slice.
fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        }
    }
}

/// Per-frequency noise floor of a `[frame][bin]` log-power plane.
pub fn noise_floor(
    log_power: &[f64],
    num_frames: usize,
    num_bins: usize,
    percentile: f64,
) -> Vec<f64> {
    (0..num_bins)
        .map(|f| {
            let mut column: Vec<f64> = (0..num_frames)
                .map(|t| log_power[t * num_bins + f])
                .collect();
            column.sort_by(f64::total_cmp);
            sorted_quantile(&column, percentile)
        })
        .collect()
}

/// Bins of the reference channel whose power exceeds the noise floor of
/// their frequency by more than `magnitude_threshold_db`. Layout `[frame][bin]`.
pub fn magnitude_test(
    log_power_ch0: &[f64],
    num_frames: usize,
    num_bins: usize,
    cfg: &SalsaConfig,
) -> Result<Vec<bool>> {
    if log_power_ch0.len() != num_frames * num_bins {
        return Err(SalsaError::Shape(format!(
            "log power has {} values, expected {num_frames}x{num_bins}",
            log_power_ch0.len()
        )));
    }
    let floor = noise_floor(
        log_power_ch0,
        num_frames,
        num_bins,
        cfg.noise_floor_percentile,
    );
    Ok(log_power_ch0
        .iter()
        .enumerate()
        .map(|(i, &v)| v > floor[i % num_bins] + cfg.magnitude_threshold_db)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceOutcome {
    pub passes: bool,
    /// Clipped `lambda1 / lambda2`, linear scale.
    pub drr: f64,
}

/// Eigenvalue-ratio test for an approximately rank-one covariance.
pub fn coherence_test(eig: &EigenPair, cfg: &SalsaConfig) -> CoherenceOutcome {
    let (l1, l2) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    if !(l1 > 0.0) {
        return CoherenceOutcome {
            passes: false,
            drr: cfg.drr_clip.0,
        };
    }
    let ratio = l1 / l2.max(RATIO_EPSILON * l1);
    CoherenceOutcome {
        passes: ratio > cfg.coherence_threshold,
        drr: ratio.clamp(cfg.drr_clip.0, cfg.drr_clip.1),
    }
}

/// Normalized angular frequency of a bin, in radians per sample.
pub fn bin_angular_frequency(bin: usize, n_fft: usize) -> f64 {
    2.0 * std::f64::consts::PI * bin as f64 / n_fft as f64
}

/// Three real spatial cues from the principal eigenvector.
///
/// FOA: the vector divided by its W component, real parts of (Y, Z, X).
/// MIC: phase of each capsule relative to capsule 0, divided by the bin's
/// angular frequency. `None` when the reference component vanishes (or at DC
/// for MIC), in which case the bin is not single-source.
pub fn normalize_principal_vector(
    eig: &EigenPair,
    format: ArrayFormat,
    angular_frequency: f64,
    cfg: &SalsaConfig,
) -> Option<[f64; 3]> {
    let v = &eig.principal_vector;
    let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    if !(norm > 0.0) || v[0].norm() < REFERENCE_EPSILON * norm {
        return None;
    }
    let (lo, hi) = cfg.spatial_clip;
    match format {
        ArrayFormat::Foa => {
            let w = v[0];
            Some(std::array::from_fn(|k| (v[k + 1] / w).re.clamp(lo, hi)))
        }
        ArrayFormat::Mic => {
            if angular_frequency <= 0.0 {
                return None;
            }
            Some(std::array::from_fn(|k| {
                ((v[k + 1] * v[0].conj()).arg() / angular_frequency).clamp(lo, hi)
            }))
        }
    }
}

/// The assembled eight-channel feature, `[channel][frame][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SalsaFeature {
    pub data: Vec<f32>,
    pub num_frames: usize,
    pub num_bins: usize,
    pub frame_rate: f64,
    /// Single-source mask, `[frame][bin]`.
    pub ss_mask: Vec<bool>,
    pub format: ArrayFormat,
}

impl SalsaFeature {
    pub fn zeros(num_frames: usize, num_bins: usize, frame_rate: f64, format: ArrayFormat) -> Self {
        Self {
            data: vec![0.0; NUM_FEATURE_CHANNELS * num_frames * num_bins],
            num_frames,
            num_bins,
            frame_rate,
            ss_mask: vec![false; num_frames * num_bins],
            format,
        }
    }

    pub fn num_channels(&self) -> usize {
        NUM_FEATURE_CHANNELS
    }

    pub fn plane_len(&self) -> usize {
        self.num_frames * self.num_bins
    }

    #[inline]
    pub fn index(&self, channel: usize, frame: usize, bin: usize) -> usize {
        (channel * self.num_frames + frame) * self.num_bins + bin
    }

    #[inline]
    pub fn get(&self, channel: usize, frame: usize, bin: usize) -> f32 {
        self.data[self.index(channel, frame, bin)]
    }

    pub fn channel(&self, channel: usize) -> &[f32] {
        let len = self.plane_len();
        &self.data[channel * len..(channel + 1) * len]
    }

    pub fn channel_mut(&mut self, channel: usize) -> &mut [f32] {
        let len = self.plane_len();
        &mut self.data[channel * len..(channel + 1) * len]
    }

    pub fn is_single_source(&self, frame: usize, bin: usize) -> bool {
        self.ss_mask[frame * self.num_bins + bin]
    }

    pub fn ss_count(&self) -> usize {
        self.ss_mask.iter().filter(|&&m| m).count()
    }

    /// The three spatial cues at one bin.
    pub fn spatial_cues(&self, frame: usize, bin: usize) -> [f32; 3] {
        std::array::from_fn(|k| self.get(SPATIAL_CHANNEL + k, frame, bin))
    }

    /// Rebuild the SS mask from the DRR channel, which is strictly positive
    /// on every SS bin and zero elsewhere.
    pub fn mask_from_drr(&mut self) {
        let mask = self
            .channel(DRR_CHANNEL)
            .iter()
            .map(|&v| v != 0.0)
            .collect();
        self.ss_mask = mask;
    }
}

/// Per-bin spatial outcome within one frame.
struct FrameCues {
    mask: Vec<bool>,
    drr: Vec<f32>,
    spatial: [Vec<f32>; 3],
}

/// Run the SS tests and spatial normalization for every bin of one frame.
fn frame_cues(
    spec: &ComplexSpectrogram,
    magnitude: &[bool],
    frame: usize,
    cfg: &SalsaConfig,
) -> Result<FrameCues> {
    let bins = spec.num_bins();
    let n_fft = spec.config().n_fft;
    let mut out = FrameCues {
        mask: vec![false; bins],
        drr: vec![0.0; bins],
        spatial: std::array::from_fn(|_| vec![0.0; bins]),
    };
    for f in 0..bins {
        if !magnitude[frame * bins + f] || cfg.max_bin.is_some_and(|m| f > m) {
            continue;
        }
        let r = covariance_at(spec, frame, f, cfg);
        let eig = eigen_decompose(&r)?.principal();
        let coherence = coherence_test(&eig, cfg);
        if !coherence.passes {
            continue;
        }
        let omega = bin_angular_frequency(f, n_fft);
        if let Some(cues) = normalize_principal_vector(&eig, cfg.format, omega, cfg) {
            out.mask[f] = true;
            out.drr[f] = coherence.drr.log10() as f32;
            for k in 0..3 {
                out.spatial[k][f] = cues[k] as f32;
            }
        }
    }
    Ok(out)
}

/// Build the feature from a four-channel complex spectrogram.
pub fn salsa_from_spectrogram(
    spec: &ComplexSpectrogram,
    cfg: &SalsaConfig,
) -> Result<SalsaFeature> {
    check_four_channels(spec)?;
    cfg.validate()?;
    let (frames, bins) = (spec.num_frames(), spec.num_bins());
    let logp = log_power(spec);
    let magnitude = magnitude_test(logp.channel(0), frames, bins, cfg)?;

    let per_frame: Vec<FrameCues> = (0..frames)
        .into_par_iter()
        .map(|t| frame_cues(spec, &magnitude, t, cfg))
        .collect::<Result<_>>()?;

    let mut feat = SalsaFeature::zeros(frames, bins, spec.frame_rate(), cfg.format);
    for (dst, src) in feat.data.iter_mut().zip(&logp.data) {
        *dst = *src as f32;
    }
    for (t, cues) in per_frame.into_iter().enumerate() {
        let row = t * bins;
        feat.ss_mask[row..row + bins].copy_from_slice(&cues.mask);
        let i = feat.index(DRR_CHANNEL, t, 0);
        feat.data[i..i + bins].copy_from_slice(&cues.drr);
        for (k, plane) in cues.spatial.iter().enumerate() {
            let i = feat.index(SPATIAL_CHANNEL + k, t, 0);
            feat.data[i..i + bins].copy_from_slice(plane);
        }
    }
    Ok(feat)
}

/// Full pipeline: STFT, log spectrograms, SS-bin selection and spatial cues.
pub fn extract_salsa(
    audio: &MultichannelAudio,
    stft_cfg: &StftConfig,
    salsa_cfg: &SalsaConfig,
) -> Result<SalsaFeature> {
    if audio.num_channels() != NUM_INPUT_CHANNELS {
        return Err(SalsaError::Config(format!(
            "expected {NUM_INPUT_CHANNELS} input channels, got {}",
            audio.num_channels()
        )));
    }
    let spec = stft(audio, stft_cfg)?;
    salsa_from_spectrogram(&spec, salsa_cfg)
}
