// Test-time augmentation: run a model on all 16 transformed copies, undo
// each pattern on its output and average.

use salsa_seld::augment::{tta_expand, tta_fold};
use salsa_seld::outputs::{decode, ClassOutput, OutputFormat, SeldFrameOutput, DEFAULT_THRESHOLD};
use salsa_seld::salsa::SalsaFeature;
use salsa_seld::synth::{render_foa, SceneSpec, SourceSignal, SourceSpec};
use salsa_seld::types::{direction_to_unit, unit_to_direction};
use salsa_seld::{extract_salsa, SalsaConfig, StftConfig};

/// Stand-in for a trained network: class 0 active with the median cue
/// direction of each frame.
fn toy_model(feat: &SalsaFeature) -> Vec<SeldFrameOutput> {
    (0..feat.num_frames)
        .map(|t| {
            let cues: Vec<[f64; 3]> = (0..feat.num_bins)
                .filter(|&f| feat.is_single_source(t, f))
                .map(|f| {
                    let [y, z, x] = feat.spatial_cues(t, f).map(f64::from);
                    [x, y, z]
                })
                .collect();
            let mut out = SeldFrameOutput::default();
            if let Some(mean) = mean_unit(&cues) {
                out.classes[0] = ClassOutput {
                    activity: 0.9,
                    doa: mean,
                };
            }
            out
        })
        .collect()
}

fn mean_unit(vs: &[[f64; 3]]) -> Option<[f64; 3]> {
    if vs.is_empty() {
        return None;
    }
    let sum = vs
        .iter()
        .fold([0.0; 3], |a, v| [a[0] + v[0], a[1] + v[1], a[2] + v[2]]);
    unit_to_direction(sum).map(|(az, el)| direction_to_unit(az, el))
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let scene = SceneSpec {
        duration: 1.0,
        sources: vec![SourceSpec::static_source(
            0,
            0.0,
            1.0,
            -75.0,
            15.0,
            SourceSignal::WhiteNoise,
        )],
        noise_floor_db: Some(-20.0),
        seed: 6,
        ..Default::default()
    };
    let (audio, _) = render_foa(&scene)?;
    let feat = extract_salsa(&audio, &StftConfig::default(), &SalsaConfig::default())?;

    let outputs: Vec<_> = tta_expand(&feat)?.iter().map(toy_model).collect();
    let folded = tta_fold(&outputs)?;
    let events = decode(&folded, OutputFormat::SedXyz, DEFAULT_THRESHOLD)?.events;
    if let Some(e) = events.get(events.len() / 2) {
        println!(
            "frame {}: azimuth {:.1}, elevation {:.1}",
            e.frame_index, e.azimuth_deg, e.elevation_deg
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
