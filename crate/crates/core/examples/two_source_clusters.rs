// Two sources in different frequency bands produce two clusters of
// single-source bin directions.

use salsa_seld::synth::{
    direction_modes, render_foa, ss_bin_directions, SceneSpec, SourceSignal, SourceSpec,
};
use salsa_seld::{extract_salsa, SalsaConfig, StftConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let scene = SceneSpec {
        duration: 2.0,
        sources: vec![
            SourceSpec::static_source(
                0,
                0.3,
                1.7,
                60.0,
                0.0,
                SourceSignal::FilteredNoise {
                    low_hz: 200.0,
                    high_hz: 3000.0,
                },
            ),
            SourceSpec::static_source(
                1,
                0.3,
                1.7,
                -60.0,
                20.0,
                SourceSignal::FilteredNoise {
                    low_hz: 4000.0,
                    high_hz: 10_000.0,
                },
            ),
        ],
        noise_floor_db: Some(-20.0),
        seed: 9,
        ..Default::default()
    };
    let (audio, _) = render_foa(&scene)?;
    let feat = extract_salsa(&audio, &StftConfig::default(), &SalsaConfig::default())?;
    let points = ss_bin_directions(&feat, 24..136);
    let modes = direction_modes(&points, 2, 15.0);
    println!("{} single-source bins", points.len());
    for (az, el) in &modes {
        println!("cluster at azimuth {az:.1}, elevation {el:.1}");
    }
    assert_eq!(modes.len(), 2);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
