//! Dataset conventions and the small value types passed between modules.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SalsaError};

/// Number of target sound classes.
pub const NUM_CLASSES: usize = 12;

/// Label frame rate in frames per second.
pub const LABEL_FRAME_RATE: f64 = 10.0;

/// Default processing sample rate in Hz.
pub const DEFAULT_SAMPLE_RATE: u32 = 24_000;

pub const ELEVATION_MIN_DEG: f64 = -45.0;
pub const ELEVATION_MAX_DEG: f64 = 45.0;

/// Input array format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ArrayFormat {
    /// First-order ambisonics in ACN order (W, Y, Z, X).
    #[default]
    Foa,
    /// Four-capsule microphone array.
    Mic,
}

impl fmt::Display for ArrayFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrayFormat::Foa => f.write_str("foa"),
            ArrayFormat::Mic => f.write_str("mic"),
        }
    }
}

impl FromStr for ArrayFormat {
    type Err = SalsaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "foa" => Ok(ArrayFormat::Foa),
            "mic" => Ok(ArrayFormat::Mic),
            other => Err(SalsaError::Config(format!(
                "unknown array format '{other}'"
            ))),
        }
    }
}

/// Wrap an azimuth in degrees into `[-180, 180)`.
pub fn normalize_azimuth(az_deg: f64) -> f64 {
    let wrapped = az_deg - 360.0 * ((az_deg + 180.0) / 360.0).floor();
    // rounding in the division can push results one ulp past either edge
    if wrapped >= 180.0 {
        wrapped - 360.0
    } else if wrapped < -180.0 {
        wrapped + 360.0
    } else {
        wrapped
    }
}

/// Unit vector for a direction given in degrees.
///
/// x points to the front, y to the left and z up.
pub fn direction_to_unit(az_deg: f64, el_deg: f64) -> [f64; 3] {
    let (az, el) = (az_deg.to_radians(), el_deg.to_radians());
    [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()]
}

/// Inverse of [`direction_to_unit`]; the input does not need to be normalized.
///
/// Returns `None` for the zero vector.
pub fn unit_to_direction(v: [f64; 3]) -> Option<(f64, f64)> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    let az = normalize_azimuth(v[1].atan2(v[0]).to_degrees());
    let el = (v[2] / norm).clamp(-1.0, 1.0).asin().to_degrees();
    Some((az, el))
}

/// Great-circle angle between two directions, in degrees within `[0, 180]`.
pub fn angular_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let u = direction_to_unit(a.0, a.1);
    let v = direction_to_unit(b.0, b.1);
    angle_between(u, v)
}

/// Angle between two (not necessarily unit) vectors, in degrees.
pub fn angle_between(u: [f64; 3], v: [f64; 3]) -> f64 {
    let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let nv = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 180.0;
    }
    let dot = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) / (nu * nv);
    dot.clamp(-1.0, 1.0).acos() * 180.0 / PI
}

/// One labelled sound event at one label frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventAnnotation {
    pub frame_index: usize,
    pub class_index: usize,
    pub track_index: usize,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl EventAnnotation {
    /// Build a validated annotation. The azimuth is wrapped into `[-180, 180)`.
    pub fn new(
        frame_index: usize,
        class_index: usize,
        track_index: usize,
        azimuth_deg: f64,
        elevation_deg: f64,
    ) -> Result<Self> {
        if class_index >= NUM_CLASSES {
            return Err(SalsaError::Range(format!(
                "class index {class_index} outside [0, {NUM_CLASSES})"
            )));
        }
        check_elevation(elevation_deg)?;
        if !azimuth_deg.is_finite() {
            return Err(SalsaError::Range(format!(
                "azimuth {azimuth_deg} is not finite"
            )));
        }
        Ok(Self {
            frame_index,
            class_index,
            track_index,
            azimuth_deg: normalize_azimuth(azimuth_deg),
            elevation_deg,
        })
    }

    pub fn direction(&self) -> (f64, f64) {
        (self.azimuth_deg, self.elevation_deg)
    }

    /// Sort key used for canonical annotation order.
    pub fn sort_key(&self) -> (usize, usize, usize) {
        (self.frame_index, self.class_index, self.track_index)
    }
}

pub(crate) fn check_elevation(el: f64) -> Result<()> {
    if !(ELEVATION_MIN_DEG..=ELEVATION_MAX_DEG).contains(&el) {
        return Err(SalsaError::Range(format!(
            "elevation {el} outside [{ELEVATION_MIN_DEG}, {ELEVATION_MAX_DEG}]"
        )));
    }
    Ok(())
}

/// Sort annotations by (frame, class, track).
pub fn sort_annotations(events: &mut [EventAnnotation]) {
    events.sort_by_key(EventAnnotation::sort_key);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn azimuth_wraps_into_half_open_range() {
        assert_eq!(normalize_azimuth(180.0), -180.0);
        assert_eq!(normalize_azimuth(-180.0), -180.0);
        assert_eq!(normalize_azimuth(540.0), -180.0);
        assert_eq!(normalize_azimuth(190.0), -170.0);
        assert_eq!(normalize_azimuth(-190.0), 170.0);
        assert_eq!(normalize_azimuth(-1e-18), -1e-18);
    }

    #[test]
    fn unit_vector_round_trip() {
        let v = direction_to_unit(0.0, 0.0);
        assert_eq!(v, [1.0, 0.0, 0.0]);
        let (az, el) = unit_to_direction([0.0, 0.9, 0.0]).unwrap();
        assert!((az - 90.0).abs() < 1e-12 && el.abs() < 1e-12);
        assert!(unit_to_direction([0.0; 3]).is_none());
    }

    #[test]
    fn annotation_validation() {
        assert!(EventAnnotation::new(0, 12, 0, 0.0, 0.0).is_err());
        assert!(EventAnnotation::new(0, 0, 0, 0.0, 45.5).is_err());
        let e = EventAnnotation::new(3, 11, 1, 180.0, -45.0).unwrap();
        assert_eq!(e.azimuth_deg, -180.0);
    }

    proptest::proptest! {
        #[test]
        fn normalize_is_idempotent(a in -1.0e4f64..1.0e4) {
            let once = normalize_azimuth(a);
            proptest::prop_assert!((-180.0..180.0).contains(&once));
            proptest::prop_assert_eq!(normalize_azimuth(once), once);
        }
    }
}
