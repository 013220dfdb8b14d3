// Apply the 16 channel-swap/negation patterns to features and labels, and
// the masking augmentations.

use salsa_seld::augment::{
    apply_spatial_pattern_feature, apply_spatial_pattern_labels, random_cutout, spec_augment,
    ss_bin_dropout, SizeRange, SpecAugmentParams,
};
use salsa_seld::synth::{
    doa_from_spatial_channels, render_foa, SceneSpec, SourceSignal, SourceSpec,
};
use salsa_seld::{extract_salsa, SalsaConfig, SpatialPattern, StftConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let scene = SceneSpec {
        duration: 1.5,
        sources: vec![SourceSpec::static_source(
            2,
            0.3,
            1.2,
            30.0,
            10.0,
            SourceSignal::WhiteNoise,
        )],
        noise_floor_db: Some(-20.0),
        seed: 4,
        ..Default::default()
    };
    let (audio, events) = render_foa(&scene)?;
    let feat = extract_salsa(&audio, &StftConfig::default(), &SalsaConfig::default())?;

    for pattern in SpatialPattern::all() {
        let moved = apply_spatial_pattern_feature(&feat, pattern)?;
        let labels = apply_spatial_pattern_labels(&events, pattern);
        let (az, el) = doa_from_spatial_channels(&moved, 24..96)?;
        println!(
            "pattern {:2}: label ({:6.1}, {:5.1})  feature ({:6.1}, {:5.1})",
            pattern.id(),
            labels[0].azimuth_deg,
            labels[0].elevation_deg,
            az,
            el
        );
    }

    let cut = random_cutout(&feat, 1, SizeRange::new(10, 20), SizeRange::new(20, 40))?;
    let stripes = spec_augment(
        &feat,
        2,
        SpecAugmentParams {
            max_time_width: 10,
            max_freq_width: 20,
            time_masks: 2,
            freq_masks: 2,
        },
    )?;
    let dropped = ss_bin_dropout(&feat, 3, 0.5)?;
    println!(
        "single-source bins: original {}, cutout {}, specaugment {}, dropout {}",
        feat.ss_count(),
        cut.ss_count(),
        stripes.ss_count(),
        dropped.ss_count()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
