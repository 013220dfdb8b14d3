// Render a short FOA clip, extract SALSA features and save them as a
// SALSAFT1 file.

use salsa_seld::feature_file::{read_feature_file, write_feature_file};
use salsa_seld::synth::{render_foa, SceneSpec, SourceSignal, SourceSpec};
use salsa_seld::{extract_salsa, ArrayFormat, SalsaConfig, StftConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let scene = SceneSpec {
        duration: 2.0,
        sources: vec![SourceSpec::static_source(
            0,
            0.5,
            1.5,
            45.0,
            0.0,
            SourceSignal::WhiteNoise,
        )],
        noise_floor_db: Some(-20.0),
        seed: 1,
        ..Default::default()
    };
    let (audio, _) = render_foa(&scene)?;

    let feat = extract_salsa(&audio, &StftConfig::default(), &SalsaConfig::default())?;
    println!(
        "feature shape: [{}, {}, {}]",
        feat.num_channels(),
        feat.num_frames,
        feat.num_bins
    );
    println!(
        "single-source bins: {} of {} ({:.1}%)",
        feat.ss_count(),
        feat.plane_len(),
        100.0 * feat.ss_count() as f64 / feat.plane_len() as f64
    );

    let path = std::env::temp_dir().join(format!("salsa-example-{}.salsaft", std::process::id()));
    write_feature_file(&feat, &path)?;
    let back = read_feature_file(&path, ArrayFormat::Foa)?;
    std::fs::remove_file(&path)?;
    assert_eq!(back, feat);
    println!("round trip through {} ok", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
