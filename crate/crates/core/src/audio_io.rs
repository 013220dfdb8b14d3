//! WAV ingestion, band-limited resampling and event metadata CSV files.
//!
//! Metadata files carry one event per line with no header row:
//!
//! ```text
//! frame,class,track,azimuth,elevation
//! ```
//!
//! All five fields are integers. Frames are counted at the 10 fps label rate,
//! azimuth is wrapped into `[-180, 180)` on read and elevation must lie in
//! `[-45, 45]`. Rows are returned sorted by `(frame, class, track)`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Result, SalsaError};
use crate::types::{sort_annotations, EventAnnotation};

/// Time-domain buffer, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelAudio {
    samples: Vec<Vec<f64>>,
    sample_rate: u32,
}

impl MultichannelAudio {
    /// Wrap per-channel sample vectors. All channels must have equal length.
    pub fn new(samples: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(SalsaError::Config("sample rate must be positive".into()));
        }
        if let Some(first) = samples.first() {
            let len = first.len();
            if samples.iter().any(|ch| ch.len() != len) {
                return Err(SalsaError::Shape("channels have different lengths".into()));
            }
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.samples.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.samples[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.samples
    }

    pub fn duration_secs(&self) -> f64 {
        self.len() as f64 / f64::from(self.sample_rate)
    }

    /// Multiply every sample by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|ch| ch.iter().map(|s| s * gain).collect())
                .collect(),
            sample_rate: self.sample_rate,
        }
    }
}

fn map_hound(err: hound::Error) -> SalsaError {
    match err {
        // hound reports short reads inside the container as `Other`
        hound::Error::IoError(e)
            if matches!(
                e.kind(),
                std::io::ErrorKind::UnexpectedEof | std::io::ErrorKind::Other
            ) =>
        {
            SalsaError::Format(format!("truncated file: {e}"))
        }
        hound::Error::IoError(e) => SalsaError::Io(e),
        hound::Error::Unsupported => SalsaError::Unsupported("WAV encoding not supported".into()),
        hound::Error::TooWide => SalsaError::Unsupported("sample width too large".into()),
        other => SalsaError::Format(other.to_string()),
    }
}

/// Read a PCM (16/24/32-bit integer) or 32-bit float WAV file.
///
/// Integer encodings are scaled to `[-1, 1)` by their full-scale value.
pub fn read_wav(path: impl AsRef<Path>) -> Result<MultichannelAudio> {
    let reader = hound::WavReader::open(path.as_ref()).map_err(map_hound)?;
    let spec = reader.spec();
    let channels = usize::from(spec.channels);
    if channels == 0 {
        return Err(SalsaError::Format("header declares zero channels".into()));
    }
    let frames = reader.duration() as usize;

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_hound)?,
        (hound::SampleFormat::Int, bits @ (16 | 24 | 32)) => {
            let scale = 1.0 / f64::from(1u32 << (bits - 1));
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(map_hound)?
        }
        (format, bits) => {
            return Err(SalsaError::Unsupported(format!(
                "{bits}-bit {format:?} samples"
            )))
        }
    };

    if interleaved.len() != frames * channels {
        return Err(SalsaError::Format(format!(
            "data chunk holds {} samples, header declares {} frames of {} channels",
            interleaved.len(),
            frames,
            channels
        )));
    }

    let mut samples = vec![Vec::with_capacity(frames); channels];
    for frame in interleaved.chunks_exact(channels) {
        for (ch, &s) in samples.iter_mut().zip(frame) {
            ch.push(s);
        }
    }
    MultichannelAudio::new(samples, spec.sample_rate)
}

/// Write audio as 32-bit float WAV.
pub fn write_wav(path: impl AsRef<Path>, audio: &MultichannelAudio) -> Result<()> {
    let channels = u16::try_from(audio.num_channels())
        .map_err(|_| SalsaError::Unsupported("too many channels for WAV".into()))?;
    let spec = hound::WavSpec {
        channels,
        sample_rate: audio.sample_rate(),
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut writer = hound::WavWriter::create(path.as_ref(), spec).map_err(map_hound)?;
    for i in 0..audio.len() {
        for ch in audio.channels() {
            writer.write_sample(ch[i] as f32).map_err(map_hound)?;
        }
    }
    writer.finalize().map_err(map_hound)
}

const RESAMPLER_TAPS: usize = 64;
const RESAMPLER_KAISER_BETA: f64 = 8.0;
/// Cutoff as a fraction of the lower of the two Nyquist frequencies.
const RESAMPLER_ROLLOFF: f64 = 0.95;

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        let f = half / k as f64;
        term *= f * f;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Resample every channel to `target_rate` with a 64-tap Kaiser-windowed sinc.
///
/// Returns the input unchanged when the rates already match.
pub fn resample_if_needed(audio: MultichannelAudio, target_rate: u32) -> Result<MultichannelAudio> {
    if target_rate == 0 {
        return Err(SalsaError::Config(
            "target sample rate must be positive".into(),
        ));
    }
    let source_rate = audio.sample_rate();
    if source_rate == target_rate {
        return Ok(audio);
    }

    let ratio = f64::from(target_rate) / f64::from(source_rate);
    let cutoff = ratio.min(1.0) * RESAMPLER_ROLLOFF;
    let half = (RESAMPLER_TAPS / 2) as f64;
    let i0_beta = bessel_i0(RESAMPLER_KAISER_BETA);
    let kernel = |d: f64| -> f64 {
        let r = d / half;
        if r.abs() >= 1.0 {
            return 0.0;
        }
        let x = std::f64::consts::PI * cutoff * d;
        let sinc = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
        let window = bessel_i0(RESAMPLER_KAISER_BETA * (1.0 - r * r).sqrt()) / i0_beta;
        cutoff * sinc * window
    };

    let in_len = audio.len();
    let out_len =
        (in_len as u128 * u128::from(target_rate)).div_ceil(u128::from(source_rate)) as usize;
    let step = f64::from(source_rate) / f64::from(target_rate);

    let channels = audio
        .channels()
        .iter()
        .map(|input| {
            (0..out_len)
                .map(|n| {
                    let pos = n as f64 * step;
                    let base = pos.floor() as isize;
                    let lo = base - (RESAMPLER_TAPS as isize / 2 - 1);
                    let hi = base + RESAMPLER_TAPS as isize / 2;
                    (lo..=hi)
                        .filter(|&k| k >= 0 && (k as usize) < in_len)
                        .map(|k| input[k as usize] * kernel(pos - k as f64))
                        .sum()
                })
                .collect()
        })
        .collect();
    MultichannelAudio::new(channels, target_rate)
}

fn parse_field(field: &str, line: usize, name: &str) -> Result<i64> {
    field.trim().parse::<i64>().map_err(|_| SalsaError::Parse {
        line,
        message: format!("{name} field '{}' is not an integer", field.trim()),
    })
}

fn non_negative(value: i64, line: usize, name: &str) -> Result<usize> {
    usize::try_from(value).map_err(|_| SalsaError::Parse {
        line,
        message: format!("{name} must be non-negative, got {value}"),
    })
}

/// Parse metadata rows from any buffered reader.
pub fn parse_metadata(reader: impl BufRead) -> Result<Vec<EventAnnotation>> {
    let mut events = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 5 {
            return Err(SalsaError::Parse {
                line: line_no,
                message: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let frame = non_negative(parse_field(fields[0], line_no, "frame")?, line_no, "frame")?;
        let class = non_negative(parse_field(fields[1], line_no, "class")?, line_no, "class")?;
        let track = non_negative(parse_field(fields[2], line_no, "track")?, line_no, "track")?;
        let az = parse_field(fields[3], line_no, "azimuth")? as f64;
        let el = parse_field(fields[4], line_no, "elevation")? as f64;
        let event = EventAnnotation::new(frame, class, track, az, el).map_err(|e| match e {
            SalsaError::Range(msg) => SalsaError::Range(format!("line {line_no}: {msg}")),
            other => other,
        })?;
        events.push(event);
    }
    sort_annotations(&mut events);
    Ok(events)
}

pub fn read_metadata_csv(path: impl AsRef<Path>) -> Result<Vec<EventAnnotation>> {
    parse_metadata(BufReader::new(File::open(path.as_ref())?))
}

/// Serialize annotations; angles are rounded to whole degrees.
pub fn format_metadata(events: &[EventAnnotation], mut out: impl Write) -> Result<()> {
    for e in events {
        // `as i64` after rounding also turns -0.0 into 0
        writeln!(
            out,
            "{},{},{},{},{}",
            e.frame_index,
            e.class_index,
            e.track_index,
            e.azimuth_deg.round() as i64,
            e.elevation_deg.round() as i64
        )?;
    }
    Ok(())
}

pub fn write_metadata_csv(events: &[EventAnnotation], path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    format_metadata(events, &mut out)?;
    out.flush()?;
    Ok(())
}
