//! Anechoic first-order ambisonics scene synthesis.
//!
//! Each source is a mono signal panned with the plane-wave FOA encoding
//! `(W, Y, Z, X) = (w_gain, sin az cos el, sin el, cos az cos el)` and summed;
//! independent white noise is added to every channel. Because there is no
//! room response the true steering vector of every source is known exactly,
//! which makes rendered scenes usable as ground truth for the feature
//! pipeline.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::audio_io::MultichannelAudio;
use crate::error::{Result, SalsaError};
use crate::kv::{parse_sections, Section};
use crate::salsa::SalsaFeature;
use crate::types::{
    angle_between, check_elevation, direction_to_unit, sort_annotations, unit_to_direction,
    EventAnnotation, DEFAULT_SAMPLE_RATE, LABEL_FRAME_RATE, NUM_CLASSES,
};

/// Class index marking an unlabelled interfering source.
pub const INTERFERENCE_CLASS: i32 = -1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceSignal {
    WhiteNoise,
    Sine {
        freq_hz: f64,
    },
    /// White noise restricted to `[low_hz, high_hz]`.
    FilteredNoise {
        low_hz: f64,
        high_hz: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub time: f64,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    /// Target class in `[0, 12)`, or [`INTERFERENCE_CLASS`].
    pub class_index: i32,
    pub onset: f64,
    pub offset: f64,
    /// Direction keypoints in scene time; one keypoint means a static source.
    pub trajectory: Vec<Keypoint>,
    pub signal: SourceSignal,
    /// Gain relative to a unit-RMS signal.
    pub gain_db: f64,
}

impl SourceSpec {
    pub fn static_source(
        class_index: i32,
        onset: f64,
        offset: f64,
        az: f64,
        el: f64,
        signal: SourceSignal,
    ) -> Self {
        Self {
            class_index,
            onset,
            offset,
            trajectory: vec![Keypoint {
                time: onset,
                azimuth_deg: az,
                elevation_deg: el,
            }],
            signal,
            gain_db: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub duration: f64,
    pub sources: Vec<SourceSpec>,
    /// Level of the diffuse white noise per channel; `None` renders noiseless.
    pub noise_floor_db: Option<f64>,
    pub seed: u64,
    pub sample_rate: u32,
    /// Gain of the omnidirectional W channel relative to the dipoles.
    pub w_gain: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            duration: 1.0,
            sources: Vec::new(),
            noise_floor_db: None,
            seed: 0,
            sample_rate: DEFAULT_SAMPLE_RATE,
            w_gain: 1.0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SalsaError::Range(msg));
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return bad(format!("duration {} must be non-negative", self.duration));
        }
        if self.sample_rate == 0 {
            return bad("sample rate must be positive".into());
        }
        let nyquist = f64::from(self.sample_rate) / 2.0;
        for (i, s) in self.sources.iter().enumerate() {
            if s.class_index != INTERFERENCE_CLASS
                && !(0..NUM_CLASSES as i32).contains(&s.class_index)
            {
                return bad(format!("source {i}: class {} out of range", s.class_index));
            }
            if !(s.onset >= 0.0 && s.onset < s.offset && s.offset <= self.duration) {
                return bad(format!(
                    "source {i}: need 0 <= onset < offset <= duration, got {}..{}",
                    s.onset, s.offset
                ));
            }
            if s.trajectory.is_empty() {
                return bad(format!("source {i}: empty trajectory"));
            }
            if s.trajectory.windows(2).any(|w| w[1].time < w[0].time) {
                return bad(format!(
                    "source {i}: trajectory times must be non-decreasing"
                ));
            }
            for k in &s.trajectory {
                if !(-180.0..=180.0).contains(&k.azimuth_deg) {
                    return bad(format!(
                        "source {i}: azimuth {} outside [-180, 180]",
                        k.azimuth_deg
                    ));
                }
                check_elevation(k.elevation_deg)?;
            }
            match s.signal {
                SourceSignal::Sine { freq_hz } if !(freq_hz > 0.0 && freq_hz < nyquist) => {
                    return bad(format!(
                        "source {i}: sine frequency {freq_hz} outside (0, {nyquist})"
                    ));
                }
                SourceSignal::FilteredNoise { low_hz, high_hz }
                    if !(low_hz >= 0.0 && low_hz < high_hz && high_hz <= nyquist) =>
                {
                    return bad(format!("source {i}: band [{low_hz}, {high_hz}] invalid"));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// FOA encoding gains `(W, Y, Z, X)` for a plane wave from `(az, el)`.
pub fn foa_steering(az_deg: f64, el_deg: f64, w_gain: f64) -> [f64; 4] {
    let [x, y, z] = direction_to_unit(az_deg, el_deg);
    [w_gain, y, z, x]
}

fn slerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    let dot = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0);
    let omega = dot.acos();
    if omega < 1e-9 {
        return a;
    }
    let s = omega.sin();
    let (wa, wb) = (((1.0 - t) * omega).sin() / s, (t * omega).sin() / s);
    [
        wa * a[0] + wb * b[0],
        wa * a[1] + wb * b[1],
        wa * a[2] + wb * b[2],
    ]
}

/// Unit direction of a trajectory at time `t`, spherically interpolated
/// between keypoints and held constant outside them.
pub fn trajectory_direction(trajectory: &[Keypoint], t: f64) -> [f64; 3] {
    let unit = |k: &Keypoint| direction_to_unit(k.azimuth_deg, k.elevation_deg);
    let first = &trajectory[0];
    if t <= first.time || trajectory.len() == 1 {
        return unit(first);
    }
    for w in trajectory.windows(2) {
        if t <= w[1].time {
            let span = w[1].time - w[0].time;
            let frac = if span > 0.0 {
                (t - w[0].time) / span
            } else {
                1.0
            };
            return slerp(unit(&w[0]), unit(&w[1]), frac);
        }
    }
    unit(trajectory.last().expect("non-empty"))
}

fn unit_rms(mut x: Vec<f64>) -> Vec<f64> {
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt();
    if rms > 0.0 {
        x.iter_mut().for_each(|v| *v /= rms);
    }
    x
}

fn source_signal(signal: SourceSignal, len: usize, rate: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match signal {
        SourceSignal::WhiteNoise => (0..len).map(|_| StandardNormal.sample(rng)).collect(),
        SourceSignal::Sine { freq_hz } => {
            let phase = rng.random::<f64>() * TAU;
            (0..len)
                .map(|i| std::f64::consts::SQRT_2 * (TAU * freq_hz * i as f64 / rate + phase).sin())
                .collect()
        }
        SourceSignal::FilteredNoise { low_hz, high_hz } => {
            if len == 0 {
                return Vec::new();
            }
            let mut buf: Vec<Complex64> = (0..len)
                .map(|_| Complex64::new(StandardNormal.sample(rng), 0.0))
                .collect();
            let mut planner = FftPlanner::new();
            planner.plan_fft_forward(len).process(&mut buf);
            for (k, v) in buf.iter_mut().enumerate() {
                let bin = k.min(len - k);
                let freq = bin as f64 * rate / len as f64;
                if freq < low_hz || freq > high_hz {
                    *v = Complex64::default();
                }
            }
            planner.plan_fft_inverse(len).process(&mut buf);
            unit_rms(buf.into_iter().map(|v| v.re).collect())
        }
    }
}

/// Track index of every labelled source: its rank among earlier sources of
/// the same class.
fn track_indices(sources: &[SourceSpec]) -> Vec<usize> {
    let mut seen = [0usize; NUM_CLASSES];
    sources
        .iter()
        .map(|s| {
            if s.class_index < 0 {
                return 0;
            }
            let c = s.class_index as usize;
            let t = seen[c];
            seen[c] += 1;
            t
        })
        .collect()
}

/// Ground-truth annotations at the label frame rate.
pub fn scene_annotations(spec: &SceneSpec) -> Vec<EventAnnotation> {
    let tracks = track_indices(&spec.sources);
    let num_frames = (spec.duration * LABEL_FRAME_RATE).ceil() as usize;
    let mut events = Vec::new();
    for (source, &track) in spec.sources.iter().zip(&tracks) {
        if source.class_index < 0 {
            continue;
        }
        for frame in 0..num_frames {
            let t = frame as f64 / LABEL_FRAME_RATE;
            if t < source.onset || t >= source.offset {
                continue;
            }
            let (az, el) = unit_to_direction(trajectory_direction(&source.trajectory, t))
                .expect("trajectory directions are unit vectors");
            events.push(EventAnnotation {
                frame_index: frame,
                class_index: source.class_index as usize,
                track_index: track,
                azimuth_deg: az,
                elevation_deg: el,
            });
        }
    }
    sort_annotations(&mut events);
    events
}

/// Render a scene to 4-channel FOA audio plus its annotations.
pub fn render_foa(spec: &SceneSpec) -> Result<(MultichannelAudio, Vec<EventAnnotation>)> {
    spec.validate()?;
    let rate = f64::from(spec.sample_rate);
    let n = (spec.duration * rate).round() as usize;
    let mut channels = vec![vec![0.0; n]; 4];

    for (idx, source) in spec.sources.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(idx as u64 + 1);
        let start = ((source.onset * rate).round() as usize).min(n);
        let end = ((source.offset * rate).round() as usize).min(n);
        let signal = source_signal(source.signal, end - start, rate, &mut rng);
        let gain = 10f64.powf(source.gain_db / 20.0);
        let is_static = source.trajectory.len() == 1;
        let fixed = foa_steering(
            source.trajectory[0].azimuth_deg,
            source.trajectory[0].elevation_deg,
            spec.w_gain,
        );
        for (offset, s) in signal.iter().enumerate() {
            let i = start + offset;
            let steer = if is_static {
                fixed
            } else {
                let [x, y, z] = trajectory_direction(&source.trajectory, i as f64 / rate);
                [spec.w_gain, y, z, x]
            };
            for ch in 0..4 {
                channels[ch][i] += gain * s * steer[ch];
            }
        }
    }

    if let Some(db) = spec.noise_floor_db {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(0);
        let level = 10f64.powf(db / 20.0);
        for ch in channels.iter_mut() {
            for v in ch.iter_mut() {
                let noise: f64 = StandardNormal.sample(&mut rng);
                *v += level * noise;
            }
        }
    }

    let audio = MultichannelAudio::new(channels, spec.sample_rate)?;
    Ok((audio, scene_annotations(spec)))
}

/// Per-bin direction vectors `(x, y, z)` of every SS bin in the frame range.
pub fn ss_bin_directions(feat: &SalsaFeature, frames: std::ops::Range<usize>) -> Vec<[f64; 3]> {
    let frames = frames.start.min(feat.num_frames)..frames.end.min(feat.num_frames);
    let mut out = Vec::new();
    for t in frames {
        for f in 0..feat.num_bins {
            if feat.is_single_source(t, f) {
                let [y, z, x] = feat.spatial_cues(t, f).map(f64::from);
                out.push([x, y, z]);
            }
        }
    }
    out
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Direction estimate from the spatial channels: the component-wise median
/// of the SS-bin cues read as `(sin az cos el, sin el, cos az cos el)`.
pub fn doa_from_spatial_channels(
    feat: &SalsaFeature,
    frames: std::ops::Range<usize>,
) -> Result<(f64, f64)> {
    let points = ss_bin_directions(feat, frames.clone());
    if points.is_empty() {
        return Err(SalsaError::NoEstimate(format!(
            "no single-source bins in frames {frames:?}"
        )));
    }
    let comp = |k: usize| median(&mut points.iter().map(|p| p[k]).collect::<Vec<_>>());
    let (x, y, z) = (comp(0), comp(1), comp(2));
    let az = crate::types::normalize_azimuth(y.atan2(x).to_degrees());
    let el = z.clamp(-1.0, 1.0).asin().to_degrees();
    Ok((az, el))
}

/// Up to `k` dominant directions among `points`, found by greedy density
/// peaks: each mode is the candidate with the most points within
/// `radius_deg`, excluding points already claimed by an earlier mode, then
/// refined to the component-wise median of its neighbourhood.
pub fn direction_modes(points: &[[f64; 3]], k: usize, radius_deg: f64) -> Vec<(f64, f64)> {
    const MAX_CANDIDATES: usize = 400;
    let step = points.len().div_ceil(MAX_CANDIDATES).max(1);
    let mut claimed = vec![false; points.len()];
    let mut modes = Vec::new();
    for _ in 0..k {
        let best = points
            .iter()
            .step_by(step)
            .map(|c| {
                let count = points
                    .iter()
                    .zip(&claimed)
                    .filter(|(p, used)| !**used && angle_between(**p, *c) <= radius_deg)
                    .count();
                (count, *c)
            })
            .max_by_key(|(count, _)| *count);
        let Some((count, centre)) = best else { break };
        if count == 0 {
            break;
        }
        let members: Vec<usize> = (0..points.len())
            .filter(|&i| !claimed[i] && angle_between(points[i], centre) <= radius_deg)
            .collect();
        let comp =
            |d: usize| median(&mut members.iter().map(|&i| points[i][d]).collect::<Vec<_>>());
        let refined = [comp(0), comp(1), comp(2)];
        if let Some(dir) = unit_to_direction(refined) {
            modes.push(dir);
        }
        // claim a wider cone so the next mode is a distinct source
        for (i, p) in points.iter().enumerate() {
            if angle_between(*p, centre) <= 2.0 * radius_deg {
                claimed[i] = true;
            }
        }
    }
    modes
}

fn parse_f64(section: &Section, key: &str) -> Result<Option<f64>> {
    section
        .get(key)
        .map(|(value, line)| {
            value.parse::<f64>().map_err(|_| SalsaError::Parse {
                line,
                message: format!("{key} = '{value}' is not a number"),
            })
        })
        .transpose()
}

fn require_f64(section: &Section, key: &str) -> Result<f64> {
    parse_f64(section, key)?.ok_or_else(|| SalsaError::Parse {
        line: section.line,
        message: format!("[{}] is missing '{key}'", section.name),
    })
}

fn parse_signal(value: &str, line: usize) -> Result<SourceSignal> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>().map_err(|_| SalsaError::Parse {
            line,
            message: format!("bad number '{s}' in signal"),
        })
    };
    match parts.as_slice() {
        ["white_noise"] | ["noise"] => Ok(SourceSignal::WhiteNoise),
        ["sine", f] => Ok(SourceSignal::Sine { freq_hz: num(f)? }),
        ["band", lo, hi] => Ok(SourceSignal::FilteredNoise {
            low_hz: num(lo)?,
            high_hz: num(hi)?,
        }),
        _ => Err(SalsaError::Parse {
            line,
            message: format!("unknown signal '{value}' (white_noise | sine:HZ | band:LO:HI)"),
        }),
    }
}

fn parse_trajectory(value: &str, line: usize) -> Result<Vec<Keypoint>> {
    value
        .split(',')
        .map(|kp| {
            let f: Vec<f64> = kp
                .split(':')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| SalsaError::Parse {
                    line,
                    message: format!("bad keypoint '{kp}'"),
                })?;
            match f.as_slice() {
                [time, az, el] => Ok(Keypoint {
                    time: *time,
                    azimuth_deg: *az,
                    elevation_deg: *el,
                }),
                _ => Err(SalsaError::Parse {
                    line,
                    message: format!("keypoint '{kp}' needs time:az:el"),
                }),
            }
        })
        .collect()
}

/// Parse a scene description.
///
/// ```text
/// [scene]
/// duration = 4.0
/// noise_floor_db = -20      # omit for a noiseless scene
/// seed = 7
///
/// [source]
/// class = 3                 # -1 renders an unlabelled interferer
/// onset = 0.5
/// offset = 3.5
/// signal = band:300:4000    # white_noise | sine:HZ | band:LO:HI
/// gain_db = 0
/// doa = 30:10               # static azimuth:elevation, or
/// trajectory = 0.5:30:10, 3.5:90:0
/// ```
pub fn parse_scene_spec(text: &str) -> Result<SceneSpec> {
    let sections = parse_sections(text)?;
    let mut spec = SceneSpec::default();
    let mut saw_scene = false;
    for section in &sections {
        match section.name.as_str() {
            "scene" => {
                saw_scene = true;
                spec.duration = require_f64(section, "duration")?;
                spec.noise_floor_db = match section.get("noise_floor_db") {
                    Some((v, _)) if v.eq_ignore_ascii_case("none") => None,
                    _ => parse_f64(section, "noise_floor_db")?,
                };
                if let Some((v, line)) = section.get("seed") {
                    spec.seed = v.parse().map_err(|_| SalsaError::Parse {
                        line,
                        message: format!("bad seed '{v}'"),
                    })?;
                }
                if let Some((v, line)) = section.get("sample_rate") {
                    spec.sample_rate = v.parse().map_err(|_| SalsaError::Parse {
                        line,
                        message: format!("bad sample rate '{v}'"),
                    })?;
                }
                if let Some(w) = parse_f64(section, "w_gain")? {
                    spec.w_gain = w;
                }
            }
            "source" => {
                let (class_str, class_line) =
                    section.get("class").ok_or_else(|| SalsaError::Parse {
                        line: section.line,
                        message: "[source] is missing 'class'".into(),
                    })?;
                let class_index = class_str.parse::<i32>().map_err(|_| SalsaError::Parse {
                    line: class_line,
                    message: format!("bad class '{class_str}'"),
                })?;
                let onset = require_f64(section, "onset")?;
                let offset = require_f64(section, "offset")?;
                let signal = match section.get("signal") {
                    Some((v, line)) => parse_signal(v, line)?,
                    None => SourceSignal::WhiteNoise,
                };
                let trajectory = if let Some((v, line)) = section.get("trajectory") {
                    parse_trajectory(v, line)?
                } else if let Some((v, line)) = section.get("doa") {
                    let mut kp = parse_trajectory(&format!("{onset}:{v}"), line)?;
                    kp.truncate(1);
                    kp
                } else {
                    return Err(SalsaError::Parse {
                        line: section.line,
                        message: "[source] needs 'doa' or 'trajectory'".into(),
                    });
                };
                spec.sources.push(SourceSpec {
                    class_index,
                    onset,
                    offset,
                    trajectory,
                    signal,
                    gain_db: parse_f64(section, "gain_db")?.unwrap_or(0.0),
                });
            }
            other => {
                return Err(SalsaError::Parse {
                    line: section.line,
                    message: format!("unknown section [{other}]"),
                })
            }
        }
    }
    if !saw_scene {
        return Err(SalsaError::Parse {
            line: 1,
            message: "missing [scene] section".into(),
        });
    }
    spec.validate().map_err(|e| match e {
        SalsaError::Range(msg) => SalsaError::Parse {
            line: 0,
            message: msg,
        },
        other => other,
    })?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::salsa::SPATIAL_CHANNEL;

    fn one_source(az: f64, el: f64, noise: Option<f64>) -> SceneSpec {
        SceneSpec {
            duration: 0.5,
            sources: vec![SourceSpec::static_source(
                2,
                0.0,
                0.5,
                az,
                el,
                SourceSignal::WhiteNoise,
            )],
            noise_floor_db: noise,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn front_source_has_equal_w_and_x() {
        let (audio, events) = render_foa(&one_source(0.0, 0.0, None)).unwrap();
        assert_eq!(audio.channel(0), audio.channel(3));
        assert!(audio.channel(1).iter().all(|&v| v == 0.0));
        assert!(audio.channel(2).iter().all(|&v| v == 0.0));
        assert_eq!(events.len(), 5);
        assert!(events
            .iter()
            .all(|e| e.azimuth_deg == 0.0 && e.class_index == 2));
    }

    #[test]
    fn left_source_has_equal_w_and_y() {
        let (audio, _) = render_foa(&one_source(90.0, 0.0, None)).unwrap();
        for i in 0..audio.len() {
            assert!((audio.channel(1)[i] - audio.channel(0)[i]).abs() < 1e-12);
            assert!(audio.channel(3)[i].abs() < 1e-12);
        }
        assert!(audio.channel(2).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_scene_is_pure_noise() {
        let spec = SceneSpec {
            duration: 1.0,
            noise_floor_db: Some(-20.0),
            seed: 5,
            ..Default::default()
        };
        let (audio, events) = render_foa(&spec).unwrap();
        assert!(events.is_empty());
        assert_eq!(audio.len(), 24_000);
        for ch in audio.channels() {
            let rms = (ch.iter().map(|v| v * v).sum::<f64>() / ch.len() as f64).sqrt();
            assert!((rms - 0.1).abs() < 0.005, "rms {rms}");
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let mut spec = one_source(30.0, 10.0, Some(-20.0));
        spec.sources.push(SourceSpec::static_source(
            4,
            0.1,
            0.4,
            -60.0,
            0.0,
            SourceSignal::FilteredNoise {
                low_hz: 500.0,
                high_hz: 3000.0,
            },
        ));
        let a = render_foa(&spec).unwrap();
        let b = render_foa(&spec).unwrap();
        assert_eq!(a, b);
        spec.seed += 1;
        assert_ne!(render_foa(&spec).unwrap().0, a.0);
    }

    #[test]
    fn out_of_range_trajectory_is_rejected() {
        assert!(render_foa(&one_source(0.0, 60.0, None)).is_err());
        let mut spec = one_source(0.0, 0.0, None);
        spec.sources[0].offset = 0.7;
        assert!(render_foa(&spec).is_err());
    }

    #[test]
    fn interference_is_not_annotated() {
        let mut spec = one_source(0.0, 0.0, None);
        spec.sources[0].class_index = INTERFERENCE_CLASS;
        let (audio, events) = render_foa(&spec).unwrap();
        assert!(events.is_empty());
        assert!(audio.channel(0).iter().any(|&v| v != 0.0));
    }

    #[test]
    fn same_class_sources_get_distinct_tracks() {
        let spec = SceneSpec {
            duration: 1.0,
            sources: vec![
                SourceSpec::static_source(1, 0.0, 0.6, 10.0, 0.0, SourceSignal::WhiteNoise),
                SourceSpec::static_source(1, 0.3, 1.0, -10.0, 0.0, SourceSignal::WhiteNoise),
            ],
            ..Default::default()
        };
        let events = scene_annotations(&spec);
        let overlap: Vec<_> = events.iter().filter(|e| e.frame_index == 4).collect();
        assert_eq!(overlap.len(), 2);
        assert_eq!((overlap[0].track_index, overlap[1].track_index), (0, 1));
    }

    #[test]
    fn moving_source_interpolates_on_the_sphere() {
        let traj = vec![
            Keypoint {
                time: 0.0,
                azimuth_deg: 170.0,
                elevation_deg: 0.0,
            },
            Keypoint {
                time: 1.0,
                azimuth_deg: -170.0,
                elevation_deg: 0.0,
            },
        ];
        // the short way round passes through 180, not through 0
        let (az, el) = unit_to_direction(trajectory_direction(&traj, 0.5)).unwrap();
        assert!((az.abs() - 180.0).abs() < 1e-9 && el.abs() < 1e-9, "{az}");
        let (az, _) = unit_to_direction(trajectory_direction(&traj, 2.0)).unwrap();
        assert!((az + 170.0).abs() < 1e-9);
    }

    #[test]
    fn filtered_noise_stays_in_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = source_signal(
            SourceSignal::FilteredNoise {
                low_hz: 2000.0,
                high_hz: 4000.0,
            },
            4800,
            24_000.0,
            &mut rng,
        );
        let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
        assert!((rms - 1.0).abs() < 1e-9);
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(4800).process(&mut buf);
        let out_of_band: f64 = (0..2400)
            .filter(|&k| k * 5 < 2000 || k * 5 > 4000)
            .map(|k| buf[k].norm_sqr())
            .sum();
        assert!(out_of_band < 1e-12 * buf.iter().map(Complex64::norm_sqr).sum::<f64>());
    }

    #[test]
    fn doa_readout_examples() {
        let mut feat = SalsaFeature::zeros(2, 3, 80.0, crate::types::ArrayFormat::Foa);
        let i = feat.index(SPATIAL_CHANNEL + 2, 0, 1);
        feat.data[i] = 1.0;
        feat.ss_mask[1] = true;
        let (az, el) = doa_from_spatial_channels(&feat, 0..2).unwrap();
        assert_eq!((az, el), (0.0, 0.0));

        let mut left = SalsaFeature::zeros(1, 1, 80.0, crate::types::ArrayFormat::Foa);
        let i = left.index(SPATIAL_CHANNEL, 0, 0);
        left.data[i] = 1.0;
        left.ss_mask[0] = true;
        let (az, el) = doa_from_spatial_channels(&left, 0..1).unwrap();
        assert!((az - 90.0).abs() < 1e-12 && el == 0.0);

        let empty = SalsaFeature::zeros(2, 3, 80.0, crate::types::ArrayFormat::Foa);
        assert!(matches!(
            doa_from_spatial_channels(&empty, 0..2),
            Err(SalsaError::NoEstimate(_))
        ));
    }

    #[test]
    fn modes_find_two_clusters_despite_outliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut points = Vec::new();
        for &(az, n) in &[(60.0, 300), (-45.0, 200)] {
            for _ in 0..n {
                let jitter: f64 = StandardNormal.sample(&mut rng);
                points.push(direction_to_unit(az + 3.0 * jitter, 0.0));
            }
        }
        for _ in 0..60 {
            points.push(direction_to_unit(
                rng.random_range(-180.0..180.0),
                rng.random_range(-45.0..45.0),
            ));
        }
        let modes = direction_modes(&points, 2, 15.0);
        assert_eq!(modes.len(), 2);
        assert!((modes[0].0 - 60.0).abs() < 2.0, "{modes:?}");
        assert!((modes[1].0 + 45.0).abs() < 2.0, "{modes:?}");
    }

    #[test]
    fn scene_file_parsing() {
        let text = "\
[scene]
duration = 2.0
noise_floor_db = -30
seed = 3

[source]
class = 5
onset = 0.2
offset = 1.5
signal = band:200:6000
doa = 30:10

[source]
class = -1
onset = 0
offset = 2
trajectory = 0:0:0, 2:90:20
gain_db = -6
";
        let spec = parse_scene_spec(text).unwrap();
        assert_eq!(spec.duration, 2.0);
        assert_eq!(spec.noise_floor_db, Some(-30.0));
        assert_eq!(spec.seed, 3);
        assert_eq!(spec.sources.len(), 2);
        assert_eq!(
            spec.sources[0].trajectory,
            vec![Keypoint {
                time: 0.2,
                azimuth_deg: 30.0,
                elevation_deg: 10.0
            }]
        );
        assert_eq!(
            spec.sources[0].signal,
            SourceSignal::FilteredNoise {
                low_hz: 200.0,
                high_hz: 6000.0
            }
        );
        assert_eq!(spec.sources[1].trajectory.len(), 2);
        assert_eq!(spec.sources[1].gain_db, -6.0);

        assert!(parse_scene_spec("[source]\nclass = 1\n").is_err());
        assert!(parse_scene_spec("[scene]\nduration = x\n").is_err());
        assert!(parse_scene_spec(
            "[scene]\nduration = 1\n[source]\nclass=1\nonset=0\noffset=1\ndoa=0:80\n"
        )
        .is_err());
        let empty = parse_scene_spec("[scene]\nduration = 1\n").unwrap();
        assert!(empty.sources.is_empty() && empty.noise_floor_db.is_none());
    }
}
