//! Simulation of two-photon interference experiments in linear optics.

pub mod acceptance;
pub mod cli;
pub mod distinguishability;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod optics;
pub mod tomography;

pub use error::{Error, Result};

#[cfg(test)]
mod dep_probe {
    use nalgebra::{Matrix4, SymmetricEigen};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Poisson};

    #[test]
    fn hermitian_eigendecomposition_and_poisson_sampling() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let m = Matrix4::from_row_slice(&[
            c(0.5, 0.0),
            c(0.1, 0.2),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.1, -0.2),
            c(0.5, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ]);
        let eig = SymmetricEigen::new(m);
        let trace: f64 = eig.eigenvalues.iter().sum();
        assert!((trace - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let poisson = Poisson::new(20777.0).unwrap();
        let draw: f64 = poisson.sample(&mut rng);
        assert!(draw > 0.0);
    }
}
