//! Helpers shared by the acceptance and scaling targets.

use qsynth_core::linalg::random_unitary;
use qsynth_core::unitsynth::depth_synthesis_resources;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest allowed spread of `depth / (2^{n/2} n^2)` over the fitted range.
pub const FIT_RESIDUAL_RATIO: f64 = 2.0;

/// Fraction `depth / (2^{n/2} n^2)` for n = 2..=8 and the spread of that
/// fraction. Large n-independent terms dominate the emitted depth at small
/// n and it grows slower than the model, so the fraction falls steadily.
pub fn depth_fit() -> (Vec<(usize, usize)>, f64, f64) {
    let mut r = ChaCha8Rng::seed_from_u64(404);
    let mut rows = Vec::new();
    for n in 2..=8usize {
        let u = random_unitary(1 << n, &mut r);
        rows.push((n, depth_synthesis_resources(&u).unwrap().report.depth));
    }
    let fractions: Vec<f64> = rows
        .iter()
        .map(|&(n, d)| d as f64 / (2f64.powf(n as f64 / 2.0) * (n * n) as f64))
        .collect();
    let c = fractions.iter().cloned().fold(0.0, f64::max);
    let lo = fractions.iter().cloned().fold(f64::INFINITY, f64::min);
    (rows, c, c / lo)
}
