// Decompose a spatial covariance matrix with the Jacobi solver and recover
// the steering vector of a single plane wave.

use num_complex::Complex64;
use salsa_seld::eigen::{eigen_decompose, SpatialCovariance};
use salsa_seld::synth::foa_steering;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let steer = foa_steering(135.0, -10.0, 1.0).map(|g| Complex64::new(g, 0.0));
    let mut r = SpatialCovariance::outer(&steer);
    // add a weak diffuse component
    for i in 0..4 {
        r.matrix[i][i] += 0.01;
    }

    let eig = eigen_decompose(&r)?;
    println!(
        "eigenvalues: {:?}",
        eig.values.map(|v| (v * 1e6).round() / 1e6)
    );
    let v = eig.vectors[0];
    let ratio: Vec<f64> = v.iter().map(|z| (z / v[0]).re).collect();
    println!("normalized principal vector: {ratio:.4?}");
    println!(
        "steering vector:             {:.4?}",
        foa_steering(135.0, -10.0, 1.0)
    );
    println!("reconstruction error: {:.2e}", {
        let back = eig.reconstruct();
        let diff = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| (back.matrix[i][j] - r.matrix[i][j]).norm_sqr())
            .sum::<f64>();
        diff.sqrt()
    });
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
