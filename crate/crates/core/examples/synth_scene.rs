// Parse a scene description and render it to FOA audio plus labels.

use salsa_seld::audio_io::format_metadata;
use salsa_seld::synth::{parse_scene_spec, render_foa};

const SCENE: &str = "
[scene]
duration = 1.0
noise_floor_db = -30
seed = 42

[source]
class = 3
onset = 0.1
offset = 0.6
signal = band:300:4000
trajectory = 0.1:-30:0, 0.6:30:10

[source]
class = 7
onset = 0.4
offset = 1.0
signal = white_noise
doa = 120:-20
";

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = parse_scene_spec(SCENE)?;
    let (audio, events) = render_foa(&spec)?;
    println!(
        "{} channels, {} samples at {} Hz",
        audio.num_channels(),
        audio.len(),
        audio.sample_rate()
    );

    let mut csv = Vec::new();
    format_metadata(&events, &mut csv)?;
    print!("{}", String::from_utf8(csv)?);
    assert_eq!(events.iter().filter(|e| e.class_index == 3).count(), 5);
    assert_eq!(events.iter().filter(|e| e.class_index == 7).count(), 6);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
