//! Seeded problem generators shared by the criterion benchmarks.

use oem_core::{Matrix, SimulationSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A reproducible dense regression problem with equicorrelated Gaussian
/// rows and decaying true coefficients.
pub fn seeded_problem(n: usize, p: usize, rho: f64, seed: u64) -> (Matrix, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = oem_core::sample_equicorrelated_design(&mut rng, n, p, rho);
    let beta = SimulationSpec::decaying_beta(p);
    let y = oem_core::simulate_response(&mut rng, &x, &beta, 1.0);
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problems_are_reproducible() {
        let (x1, y1) = seeded_problem(30, 5, 0.1, 9);
        let (x2, y2) = seeded_problem(30, 5, 0.1, 9);
        assert_eq!(x1.data(), x2.data());
        assert_eq!(y1, y2);
    }
}
