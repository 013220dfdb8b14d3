//! `SALSAFT1` feature file.
//!
//! ```text
//! offset  size  field
//! 0       8     magic "SALSAFT1"
//! 8       4     version (1), u32 LE
//! 12      4     channels, u32 LE
//! 16      4     frames, u32 LE
//! 20      4     bins, u32 LE
//! 24      4     frame rate in 1/100 fps, u32 LE
//! 28      4*N   payload, f32 LE, [channel][frame][bin]
//! 28+4N   8     checksum, u64 LE
//! ```
//!
//! The checksum XORs the payload bytes taken as little-endian u64 words,
//! zero-padding the final partial word.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Result, SalsaError};
use crate::salsa::{SalsaFeature, NUM_FEATURE_CHANNELS};
use crate::types::ArrayFormat;

pub const MAGIC: &[u8; 8] = b"SALSAFT1";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 28;

/// Header fields of a feature file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureHeader {
    pub version: u32,
    pub channels: u32,
    pub frames: u32,
    pub bins: u32,
    pub frame_rate_centi_fps: u32,
}

impl FeatureHeader {
    pub fn frame_rate(&self) -> f64 {
        f64::from(self.frame_rate_centi_fps) / 100.0
    }

    fn payload_len(&self) -> usize {
        self.channels as usize * self.frames as usize * self.bins as usize
    }
}

/// XOR-fold of `bytes` as little-endian u64 words.
pub fn checksum(bytes: &[u8]) -> u64 {
    let mut chunks = bytes.chunks_exact(8);
    let mut acc = chunks.by_ref().fold(0u64, |acc, w| {
        acc ^ u64::from_le_bytes(w.try_into().expect("8-byte chunk"))
    });
    let tail = chunks.remainder();
    if !tail.is_empty() {
        let mut word = [0u8; 8];
        word[..tail.len()].copy_from_slice(tail);
        acc ^= u64::from_le_bytes(word);
    }
    acc
}

fn to_u32(value: usize, what: &str) -> Result<u32> {
    u32::try_from(value)
        .map_err(|_| SalsaError::Range(format!("{what} {value} does not fit in u32")))
}

/// Serialize a feature to any writer.
pub fn write_feature(feat: &SalsaFeature, mut out: impl Write) -> Result<()> {
    let rate = (feat.frame_rate * 100.0).round();
    if !(rate >= 0.0 && rate <= f64::from(u32::MAX)) {
        return Err(SalsaError::Range(format!(
            "frame rate {} not representable",
            feat.frame_rate
        )));
    }
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(MAGIC);
    for v in [
        VERSION,
        to_u32(feat.num_channels(), "channel count")?,
        to_u32(feat.num_frames, "frame count")?,
        to_u32(feat.num_bins, "bin count")?,
        rate as u32,
    ] {
        header.extend_from_slice(&v.to_le_bytes());
    }
    let payload: Vec<u8> = feat.data.iter().flat_map(|v| v.to_le_bytes()).collect();
    out.write_all(&header)?;
    out.write_all(&payload)?;
    out.write_all(&checksum(&payload).to_le_bytes())?;
    out.flush()?;
    Ok(())
}

fn read_u32(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4 bytes"))
}

/// Parse only the header.
pub fn parse_header(bytes: &[u8]) -> Result<FeatureHeader> {
    if bytes.len() < HEADER_LEN {
        return Err(SalsaError::Format(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..8] != MAGIC {
        return Err(SalsaError::Format("missing SALSAFT1 magic".into()));
    }
    let header = FeatureHeader {
        version: read_u32(bytes, 8),
        channels: read_u32(bytes, 12),
        frames: read_u32(bytes, 16),
        bins: read_u32(bytes, 20),
        frame_rate_centi_fps: read_u32(bytes, 24),
    };
    if header.version != VERSION {
        return Err(SalsaError::Unsupported(format!(
            "feature file version {}",
            header.version
        )));
    }
    Ok(header)
}

/// Deserialize a feature. The file does not record the array format, so
/// the caller supplies it. The SS mask is rebuilt from the DRR channel.
pub fn read_feature(mut input: impl Read, format: ArrayFormat) -> Result<SalsaFeature> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let header = parse_header(&bytes)?;
    if header.channels as usize != NUM_FEATURE_CHANNELS {
        return Err(SalsaError::Format(format!(
            "expected {NUM_FEATURE_CHANNELS} channels, file has {}",
            header.channels
        )));
    }
    let n = header.payload_len();
    let expected = HEADER_LEN + 4 * n + 8;
    if bytes.len() != expected {
        return Err(SalsaError::Format(format!(
            "file is {} bytes, header implies {expected}",
            bytes.len()
        )));
    }
    let payload = &bytes[HEADER_LEN..HEADER_LEN + 4 * n];
    let stored = u64::from_le_bytes(bytes[expected - 8..].try_into().expect("8 bytes"));
    if stored != checksum(payload) {
        return Err(SalsaError::Format("checksum mismatch".into()));
    }
    let mut feat = SalsaFeature::zeros(
        header.frames as usize,
        header.bins as usize,
        header.frame_rate(),
        format,
    );
    for (dst, src) in feat.data.iter_mut().zip(payload.chunks_exact(4)) {
        *dst = f32::from_le_bytes(src.try_into().expect("4 bytes"));
    }
    feat.mask_from_drr();
    Ok(feat)
}

pub fn write_feature_file(feat: &SalsaFeature, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_feature(feat, std::io::BufWriter::new(file))
}

pub fn read_feature_file(path: impl AsRef<Path>, format: ArrayFormat) -> Result<SalsaFeature> {
    read_feature(std::io::BufReader::new(std::fs::File::open(path)?), format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::salsa::DRR_CHANNEL;
    use proptest::prelude::*;

    fn sample_feature() -> SalsaFeature {
        let mut f = SalsaFeature::zeros(3, 5, 80.0, ArrayFormat::Foa);
        for (i, v) in f.data.iter_mut().enumerate().take(4 * 15) {
            *v = -(i as f32) * 0.37;
        }
        for (t, b) in [(0, 1), (2, 4)] {
            for ch in DRR_CHANNEL..NUM_FEATURE_CHANNELS {
                let i = f.index(ch, t, b);
                f.data[i] = 0.25 + ch as f32;
            }
            f.ss_mask[t * 5 + b] = true;
        }
        f
    }

    #[test]
    fn header_layout() {
        let mut bytes = Vec::new();
        write_feature(&sample_feature(), &mut bytes).unwrap();
        assert_eq!(&bytes[..8], b"SALSAFT1");
        assert_eq!(bytes.len(), 28 + 4 * 8 * 15 + 8);
        let h = parse_header(&bytes).unwrap();
        assert_eq!(
            h,
            FeatureHeader {
                version: 1,
                channels: 8,
                frames: 3,
                bins: 5,
                frame_rate_centi_fps: 8000
            }
        );
    }

    #[test]
    fn round_trip_restores_mask() {
        let feat = sample_feature();
        let mut bytes = Vec::new();
        write_feature(&feat, &mut bytes).unwrap();
        let back = read_feature(bytes.as_slice(), ArrayFormat::Foa).unwrap();
        assert_eq!(back, feat);
    }

    #[test]
    fn checksum_words() {
        assert_eq!(checksum(&[]), 0);
        assert_eq!(
            checksum(&[1, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0]),
            0
        );
        assert_eq!(checksum(&[0, 0, 0, 0, 0, 0, 0, 0, 0xff]), 0xff);
        assert_eq!(checksum(&2u64.to_le_bytes()), 2);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let mut bytes = Vec::new();
        write_feature(&sample_feature(), &mut bytes).unwrap();

        let mut flipped = bytes.clone();
        flipped[40] ^= 1;
        assert!(matches!(
            read_feature(flipped.as_slice(), ArrayFormat::Foa),
            Err(SalsaError::Format(_))
        ));

        let truncated = &bytes[..bytes.len() - 3];
        assert!(matches!(
            read_feature(truncated, ArrayFormat::Foa),
            Err(SalsaError::Format(_))
        ));

        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(
            read_feature(magic.as_slice(), ArrayFormat::Foa),
            Err(SalsaError::Format(_))
        ));

        let mut version = bytes.clone();
        version[8] = 2;
        assert!(matches!(
            read_feature(version.as_slice(), ArrayFormat::Foa),
            Err(SalsaError::Unsupported(_))
        ));

        assert!(read_feature(&b"SALS"[..], ArrayFormat::Foa).is_err());
    }

    proptest! {
        #[test]
        fn payload_round_trip_is_bit_exact(
            frames in 1usize..6,
            bins in 1usize..9,
            seed in any::<u32>(),
        ) {
            let mut feat = SalsaFeature::zeros(frames, bins, 80.0, ArrayFormat::Mic);
            let mut state = seed;
            for v in feat.data.iter_mut() {
                state = state.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
                *v = f32::from_bits(state & 0x7f7f_ffff);
            }
            let mut bytes = Vec::new();
            write_feature(&feat, &mut bytes).unwrap();
            let back = read_feature(bytes.as_slice(), ArrayFormat::Mic).unwrap();
            prop_assert!(back.data.iter().zip(&feat.data).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }
}
