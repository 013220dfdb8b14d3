//! Tool-wide configuration loaded from a sectioned `key = value` file.
//!
//! ```text
//! [stft]
//! sample_rate = 24000
//! win_length = 512
//! hop_length = 300
//! n_fft = 512
//! log_scale = power_db        # or magnitude_db
//!
//! [salsa]
//! noise_floor_percentile = 0.05
//! magnitude_threshold_db = 5
//! coherence_threshold = 5
//! smoothing_time = 3
//! smoothing_freq = 3
//! drr_clip = 1, 100
//! spatial_clip = -4, 4
//! max_bin = none
//!
//! [augment]
//! cutout_time = 10, 40         # min, max frames
//! cutout_freq = 10, 40         # min, max bins
//! specaugment_time_width = 20
//! specaugment_freq_width = 20
//! specaugment_time_masks = 2
//! specaugment_freq_masks = 2
//!
//! [metrics]
//! threshold_deg = 20
//! segment_frames = 10
//! lr_gated = false
//! ```

use std::path::Path;
use std::str::FromStr;

use crate::augment::{SizeRange, SpecAugmentParams};
use crate::error::{Result, SalsaError};
use crate::kv::{parse_sections, Section};
use crate::metrics::{ScoreConfig, DEFAULT_SEGMENT_FRAMES};
use crate::salsa::SalsaConfig;
use crate::tfr::{LogScale, StftConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AugmentDefaults {
    pub cutout_time: SizeRange,
    pub cutout_freq: SizeRange,
    pub spec_augment: SpecAugmentParams,
}

impl Default for AugmentDefaults {
    fn default() -> Self {
        Self {
            cutout_time: SizeRange::new(10, 40),
            cutout_freq: SizeRange::new(10, 40),
            spec_augment: SpecAugmentParams {
                max_time_width: 20,
                max_freq_width: 20,
                time_masks: 2,
                freq_masks: 2,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSettings {
    pub score: ScoreConfig,
    pub segment_frames: usize,
}

impl Default for MetricSettings {
    fn default() -> Self {
        Self {
            score: ScoreConfig::default(),
            segment_frames: DEFAULT_SEGMENT_FRAMES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ToolConfig {
    pub stft: StftConfig,
    pub log_scale: LogScale,
    pub salsa: SalsaConfig,
    pub augment: AugmentDefaults,
    pub metrics: MetricSettings,
}

fn parse_value<T: FromStr>(value: &str, key: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| SalsaError::Parse {
        line,
        message: format!("invalid value '{value}' for {key}"),
    })
}

fn parse_pair<T: FromStr>(value: &str, key: &str, line: usize) -> Result<(T, T)> {
    let (a, b) = value.split_once(',').ok_or_else(|| SalsaError::Parse {
        line,
        message: format!("{key} needs two comma-separated values"),
    })?;
    Ok((
        parse_value(a.trim(), key, line)?,
        parse_value(b.trim(), key, line)?,
    ))
}

fn unknown_key(section: &str, key: &str, line: usize) -> SalsaError {
    SalsaError::Parse {
        line,
        message: format!("unknown key '{key}' in [{section}]"),
    }
}

impl ToolConfig {
    pub fn validate(&self) -> Result<()> {
        self.stft.validate()?;
        self.salsa.validate()?;
        let m = &self.metrics;
        if !(m.score.threshold_deg > 0.0 && m.score.threshold_deg <= 180.0) {
            return Err(SalsaError::Config(format!(
                "threshold {} outside (0, 180]",
                m.score.threshold_deg
            )));
        }
        if m.segment_frames == 0 {
            return Err(SalsaError::Config("segment length must be positive".into()));
        }
        for r in [self.augment.cutout_time, self.augment.cutout_freq] {
            if r.min > r.max {
                return Err(SalsaError::Config(format!(
                    "cutout size range [{}, {}] is empty",
                    r.min, r.max
                )));
            }
        }
        Ok(())
    }

    /// Parse and validate a config file body; absent keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for section in parse_sections(text)? {
            cfg.apply_section(&section)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn apply_section(&mut self, section: &Section) -> Result<()> {
        let name = section.name.as_str();
        if !matches!(name, "stft" | "salsa" | "augment" | "metrics") {
            return Err(SalsaError::Parse {
                line: section.line,
                message: format!("unknown section [{name}]"),
            });
        }
        for (key, value, line) in &section.entries {
            let (key, value, line) = (key.as_str(), value.as_str(), *line);
            match (name, key) {
                ("stft", "sample_rate") => self.stft.sample_rate = parse_value(value, key, line)?,
                ("stft", "win_length") => self.stft.win_length = parse_value(value, key, line)?,
                ("stft", "hop_length") => self.stft.hop_length = parse_value(value, key, line)?,
                ("stft", "n_fft") => self.stft.n_fft = parse_value(value, key, line)?,
                ("stft", "log_scale") => {
                    self.log_scale = match value {
                        "power_db" => LogScale::PowerDb,
                        "magnitude_db" => LogScale::MagnitudeDb,
                        _ => {
                            return Err(SalsaError::Parse {
                                line,
                                message: format!("unknown log scale '{value}'"),
                            })
                        }
                    }
                }
                ("salsa", "noise_floor_percentile") => {
                    self.salsa.noise_floor_percentile = parse_value(value, key, line)?
                }
                ("salsa", "magnitude_threshold_db") => {
                    self.salsa.magnitude_threshold_db = parse_value(value, key, line)?
                }
                ("salsa", "coherence_threshold") => {
                    self.salsa.coherence_threshold = parse_value(value, key, line)?
                }
                ("salsa", "smoothing_time") => {
                    self.salsa.smoothing_time = parse_value(value, key, line)?
                }
                ("salsa", "smoothing_freq") => {
                    self.salsa.smoothing_freq = parse_value(value, key, line)?
                }
                ("salsa", "drr_clip") => self.salsa.drr_clip = parse_pair(value, key, line)?,
                ("salsa", "spatial_clip") => {
                    self.salsa.spatial_clip = parse_pair(value, key, line)?
                }
                ("salsa", "format") => self.salsa.format = parse_value(value, key, line)?,
                ("salsa", "max_bin") => {
                    self.salsa.max_bin = if value == "none" {
                        None
                    } else {
                        Some(parse_value(value, key, line)?)
                    }
                }
                ("augment", "cutout_time") => {
                    let (min, max) = parse_pair(value, key, line)?;
                    self.augment.cutout_time = SizeRange::new(min, max);
                }
                ("augment", "cutout_freq") => {
                    let (min, max) = parse_pair(value, key, line)?;
                    self.augment.cutout_freq = SizeRange::new(min, max);
                }
                ("augment", "specaugment_time_width") => {
                    self.augment.spec_augment.max_time_width = parse_value(value, key, line)?
                }
                ("augment", "specaugment_freq_width") => {
                    self.augment.spec_augment.max_freq_width = parse_value(value, key, line)?
                }
                ("augment", "specaugment_time_masks") => {
                    self.augment.spec_augment.time_masks = parse_value(value, key, line)?
                }
                ("augment", "specaugment_freq_masks") => {
                    self.augment.spec_augment.freq_masks = parse_value(value, key, line)?
                }
                ("metrics", "threshold_deg") => {
                    self.metrics.score.threshold_deg = parse_value(value, key, line)?
                }
                ("metrics", "segment_frames") => {
                    self.metrics.segment_frames = parse_value(value, key, line)?
                }
                ("metrics", "lr_gated") => {
                    self.metrics.score.lr_gated = parse_value(value, key, line)?
                }
                _ => return Err(unknown_key(name, key, line)),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::ArrayFormat;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ToolConfig::parse("").unwrap();
        assert_eq!(cfg, ToolConfig::default());
        assert_eq!(cfg.stft.hop_length, 300);
        assert_eq!(cfg.metrics.score.threshold_deg, 20.0);
        assert_eq!(cfg.metrics.segment_frames, 10);
    }

    #[test]
    fn overrides_apply() {
        let cfg = ToolConfig::parse(
            "[stft]\nlog_scale = magnitude_db\n[salsa]\nformat = mic\ndrr_clip = 1, 50\nmax_bin = 200\n\
             [metrics]\nthreshold_deg = 15\nlr_gated = true\n[augment]\ncutout_time = 2, 4\n",
        )
        .unwrap();
        assert_eq!(cfg.log_scale, LogScale::MagnitudeDb);
        assert_eq!(cfg.salsa.format, ArrayFormat::Mic);
        assert_eq!(cfg.salsa.drr_clip, (1.0, 50.0));
        assert_eq!(cfg.salsa.max_bin, Some(200));
        assert_eq!(cfg.metrics.score.threshold_deg, 15.0);
        assert!(cfg.metrics.score.lr_gated);
        assert_eq!(cfg.augment.cutout_time, SizeRange::new(2, 4));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(matches!(
            ToolConfig::parse("[stft]\nhop = 3\n"),
            Err(SalsaError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            ToolConfig::parse("[bogus]\n"),
            Err(SalsaError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            ToolConfig::parse("[salsa]\nsmoothing_time = 2\n"),
            Err(SalsaError::Config(_))
        ));
        assert!(matches!(
            ToolConfig::parse("[stft]\nhop_length = 0\n"),
            Err(SalsaError::Config(_))
        ));
        assert!(ToolConfig::parse("[metrics]\nthreshold_deg = abc\n").is_err());
        assert!(ToolConfig::parse("[augment]\ncutout_freq = 9, 3\n").is_err());
    }
}
