// Read a source direction straight off the spatial channels.

use salsa_seld::synth::{
    doa_from_spatial_channels, render_foa, SceneSpec, SourceSignal, SourceSpec,
};
use salsa_seld::types::angular_distance;
use salsa_seld::{extract_salsa, SalsaConfig, StftConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let truth = (-110.0, 25.0);
    let scene = SceneSpec {
        duration: 2.0,
        sources: vec![SourceSpec::static_source(
            5,
            0.4,
            1.6,
            truth.0,
            truth.1,
            SourceSignal::WhiteNoise,
        )],
        noise_floor_db: Some(-20.0),
        seed: 3,
        ..Default::default()
    };
    let (audio, _) = render_foa(&scene)?;
    let feat = extract_salsa(&audio, &StftConfig::default(), &SalsaConfig::default())?;

    // source frames at 80 fps
    let (az, el) = doa_from_spatial_channels(&feat, 32..128)?;
    let err = angular_distance((az, el), truth);
    println!("estimated azimuth {az:.2}, elevation {el:.2}; error {err:.2} deg");
    assert!(err < 5.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
