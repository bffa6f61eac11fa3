//! Shared generators for the integration suites.

use ghr_core::moments::DistributionSpec;
use ghr_core::scalar::Exact;
use ghr_core::Scalar;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random discrete distribution with `points` distinct rational support
/// points and positive rational weights. Distinct numerators over a common
/// denominator keep the eigenvalues distinct by construction.
pub fn random_exact_spectrum(rng: &mut ChaCha8Rng, points: usize) -> DistributionSpec<Exact> {
    let den = rng.random_range(1..=5i64);
    let mut numerators: Vec<i64> = (-24..=24).collect();
    numerators.shuffle(rng);
    let mut weight_total = 0i64;
    let weights: Vec<i64> = (0..points)
        .map(|_| {
            let w = rng.random_range(1..=20i64);
            weight_total += w;
            w
        })
        .collect();
    let levels = numerators
        .into_iter()
        .take(points)
        .zip(weights)
        .map(|(num, w)| (Exact::ratio(num, den), Exact::ratio(w, weight_total)))
        .collect();
    DistributionSpec::Spectrum { levels }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
