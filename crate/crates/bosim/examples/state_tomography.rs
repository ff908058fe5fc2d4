//! Maximum-likelihood state tomography of a two-photon polarization state.
//!
//! Sixteen projective settings drawn from {H, V, D, A, R, L} x {H, V, D, L}
//! fix the 4x4 density matrix. Counts are simulated with Poisson noise,
//! then the matrix is reconstructed by maximizing the Poisson
//! log-likelihood over the Cholesky-like parameterization
//! rho = T^dag T / Tr(T^dag T), which keeps every iterate physical
//! (Hermitian, positive, unit trace).
//!
//! Run with `cargo run --example state_tomography`.

use bosim::tomography::{
    entangled_target_density, fidelity, mle_reconstruct, simulate_tomography, trace_distance,
    TomographySettings, BASIS_LABELS,
};

fn main() -> bosim::Result<()> {
    let target = entangled_target_density();
    let settings = TomographySettings::default();

    let counts = simulate_tomography(&target, &settings)?;
    println!("simulated counts per setting (mean {}):", settings.counts_per_setting);
    for (i, (setting, count)) in settings.projectors.iter().zip(&counts).enumerate() {
        print!("  {:>2} {count:>5}", setting.label);
        if (i + 1) % 4 == 0 {
            println!();
        }
    }

    let counts: Vec<f64> = counts.into_iter().map(|n| n as f64).collect();
    let reconstruction = mle_reconstruct(&counts, &settings)?;
    println!();
    println!(
        "maximum-likelihood fit: {} iterations, converged = {}",
        reconstruction.iterations, reconstruction.converged
    );
    println!(
        "log-likelihood improved by {:.3}",
        reconstruction.log_likelihood
            - reconstruction.log_likelihood_trace.first().copied().unwrap_or(f64::NAN)
    );

    println!();
    println!("reconstructed density matrix (real parts):");
    let matrix = reconstruction.density.matrix();
    print!("       ");
    for label in BASIS_LABELS {
        print!("{label:>9}");
    }
    println!();
    for (row, label) in BASIS_LABELS.iter().enumerate() {
        print!("  {label:>4} ");
        for col in 0..4 {
            print!("{:>9.4}", matrix[(row, col)].re);
        }
        println!();
    }

    println!();
    println!("fidelity with the target state: {:.6}", fidelity(&reconstruction.density, &target));
    println!("trace distance to the target:   {:.6}", trace_distance(&reconstruction.density, &target));
    Ok(())
}
