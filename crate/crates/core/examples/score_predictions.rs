// Score predicted annotations against references with the segment-based
// SELD metrics.

use salsa_seld::metrics::{score_events, ScoreConfig};
use salsa_seld::EventAnnotation;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut refs = Vec::new();
    let mut preds = Vec::new();
    for frame in 0..20 {
        refs.push(EventAnnotation::new(frame, 1, 0, 30.0, 0.0)?);
        // right class, 25 degrees off: localization recall but no detection
        preds.push(EventAnnotation::new(frame, 1, 0, 55.0, 0.0)?);
    }
    for frame in 10..20 {
        refs.push(EventAnnotation::new(frame, 4, 0, -90.0, 10.0)?);
        preds.push(EventAnnotation::new(frame, 4, 0, -85.0, 10.0)?);
    }

    let scores = score_events(&refs, &preds, &ScoreConfig::default())?;
    println!("{scores}");
    println!("{}", scores.to_json_line());

    let gated = score_events(
        &refs,
        &preds,
        &ScoreConfig {
            lr_gated: true,
            ..Default::default()
        },
    )?;
    println!("gated localization recall: {:.3}", gated.lr);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
