//! Multichannel short-time Fourier transform and log spectrograms.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::audio_io::MultichannelAudio;
use crate::error::{Result, SalsaError};
use crate::types::DEFAULT_SAMPLE_RATE;

/// Floor added to the power before taking the logarithm (-120 dB).
pub const LOG_EPSILON: f64 = 1e-12;

/// Value of a log-power bin with zero energy.
pub const LOG_FLOOR_DB: f64 = -120.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    /// Periodic Hann window.
    #[default]
    Hann,
}

/// Which quantity the log spectrogram is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogScale {
    /// `10 log10(|X|^2 + eps)`
    #[default]
    PowerDb,
    /// `20 log10(|X| + sqrt(eps))`
    MagnitudeDb,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StftConfig {
    pub sample_rate: u32,
    pub win_length: usize,
    pub hop_length: usize,
    pub n_fft: usize,
    pub window: WindowKind,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            sample_rate: DEFAULT_SAMPLE_RATE,
            win_length: 512,
            hop_length: 300,
            n_fft: 512,
            window: WindowKind::Hann,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 || self.win_length == 0 || self.hop_length == 0 {
            return Err(SalsaError::Config(
                "sample rate, window and hop must be positive".into(),
            ));
        }
        if self.n_fft < self.win_length {
            return Err(SalsaError::Config(format!(
                "n_fft {} shorter than window {}",
                self.n_fft, self.win_length
            )));
        }
        if self.hop_length > self.win_length {
            return Err(SalsaError::Config(format!(
                "hop {} longer than window {}",
                self.hop_length, self.win_length
            )));
        }
        Ok(())
    }

    pub fn num_bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    /// Frames produced for a signal of `num_samples` samples.
    pub fn num_frames(&self, num_samples: usize) -> usize {
        num_samples / self.hop_length + 1
    }

    pub fn frame_rate(&self) -> f64 {
        f64::from(self.sample_rate) / self.hop_length as f64
    }

    /// Centre frequency of a bin in Hz.
    pub fn bin_frequency(&self, bin: usize) -> f64 {
        bin as f64 * f64::from(self.sample_rate) / self.n_fft as f64
    }

    /// Analysis window zero-padded and centred to `n_fft` samples.
    pub fn window(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_fft];
        let offset = (self.n_fft - self.win_length) / 2;
        let n = self.win_length as f64;
        for i in 0..self.win_length {
            out[offset + i] = match self.window {
                WindowKind::Hann => 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n).cos(),
            };
        }
        out
    }
}

/// Complex spectrogram laid out `[channel][frame][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    data: Vec<Complex64>,
    num_channels: usize,
    num_frames: usize,
    num_bins: usize,
    config: StftConfig,
}

impl ComplexSpectrogram {
    pub fn from_parts(
        data: Vec<Complex64>,
        num_channels: usize,
        num_frames: usize,
        num_bins: usize,
        config: StftConfig,
    ) -> Result<Self> {
        if data.len() != num_channels * num_frames * num_bins {
            return Err(SalsaError::Shape(format!(
                "{} values for {num_channels}x{num_frames}x{num_bins}",
                data.len()
            )));
        }
        Ok(Self {
            data,
            num_channels,
            num_frames,
            num_bins,
            config,
        })
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn frame_rate(&self) -> f64 {
        self.config.frame_rate()
    }

    #[inline]
    pub fn get(&self, channel: usize, frame: usize, bin: usize) -> Complex64 {
        self.data[(channel * self.num_frames + frame) * self.num_bins + bin]
    }

    /// One channel's frame as a slice over bins.
    pub fn frame(&self, channel: usize, frame: usize) -> &[Complex64] {
        let start = (channel * self.num_frames + frame) * self.num_bins;
        &self.data[start..start + self.num_bins]
    }

    /// Channel vector at one time-frequency bin.
    #[inline]
    pub fn bin_vector<const C: usize>(&self, frame: usize, bin: usize) -> [Complex64; C] {
        std::array::from_fn(|ch| self.get(ch, frame, bin))
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
}

/// Index into a signal of length `len` after reflection about both ends
/// (no edge repeat), folding as many times as needed.
fn reflect_index(i: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let m = i.rem_euclid(period);
    if m < len as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Centred STFT: each side reflection-padded by `n_fft / 2`, so frame `k`
/// is centred on sample `k * hop`.
pub fn stft(audio: &MultichannelAudio, cfg: &StftConfig) -> Result<ComplexSpectrogram> {
    cfg.validate()?;
    if audio.sample_rate() != cfg.sample_rate {
        return Err(SalsaError::Config(format!(
            "audio sample rate {} does not match STFT rate {}",
            audio.sample_rate(),
            cfg.sample_rate
        )));
    }
    if audio.num_channels() == 0 {
        return Err(SalsaError::Config("audio has no channels".into()));
    }

    let n = audio.len();
    let num_frames = cfg.num_frames(n);
    let num_bins = cfg.num_bins();
    let window = cfg.window();
    let pad = (cfg.n_fft / 2) as isize;
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(cfg.n_fft);

    let mut data = Vec::with_capacity(audio.num_channels() * num_frames * num_bins);
    let mut buffer = vec![Complex64::default(); cfg.n_fft];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for signal in audio.channels() {
        for frame in 0..num_frames {
            let start = (frame * cfg.hop_length) as isize - pad;
            for (k, slot) in buffer.iter_mut().enumerate() {
                let sample = if n == 0 {
                    0.0
                } else {
                    signal[reflect_index(start + k as isize, n)]
                };
                *slot = Complex64::new(sample * window[k], 0.0);
            }
            fft.process_with_scratch(&mut buffer, &mut scratch);
            data.extend_from_slice(&buffer[..num_bins]);
        }
    }
    ComplexSpectrogram::from_parts(data, audio.num_channels(), num_frames, num_bins, *cfg)
}

/// Real tensor laid out `[channel][frame][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSpectrogram {
    pub data: Vec<f64>,
    pub num_channels: usize,
    pub num_frames: usize,
    pub num_bins: usize,
}

impl LogSpectrogram {
    #[inline]
    pub fn get(&self, channel: usize, frame: usize, bin: usize) -> f64 {
        self.data[(channel * self.num_frames + frame) * self.num_bins + bin]
    }

    pub fn channel(&self, channel: usize) -> &[f64] {
        let len = self.num_frames * self.num_bins;
        &self.data[channel * len..(channel + 1) * len]
    }
}

/// Element-wise `10 log10(|X|^2 + 1e-12)`.
pub fn log_power(spec: &ComplexSpectrogram) -> LogSpectrogram {
    log_spectrogram(spec, LogScale::PowerDb)
}

/// Log spectrogram on the chosen scale. Both scales share the -120 dB floor.
pub fn log_spectrogram(spec: &ComplexSpectrogram, scale: LogScale) -> LogSpectrogram {
    let data = spec
        .data()
        .iter()
        .map(|x| match scale {
            LogScale::PowerDb => 10.0 * (x.norm_sqr() + LOG_EPSILON).log10(),
            LogScale::MagnitudeDb => 20.0 * (x.norm() + LOG_EPSILON.sqrt()).log10(),
        })
        .collect();
    LogSpectrogram {
        data,
        num_channels: spec.num_channels(),
        num_frames: spec.num_frames(),
        num_bins: spec.num_bins(),
    }
}
