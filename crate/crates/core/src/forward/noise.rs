use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Standard normal sample for `(pattern, node)` drawn by Box–Muller from a
/// ChaCha20 stream keyed by `seed`, with the pattern index as stream id and the
/// node index selecting the block position. Independent of draw order.
pub fn gaussian(seed: u64, pattern: usize, node: usize) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(pattern as u64);
    rng.set_word_pos(4 * node as u128);
    let a = rng.next_u64();
    let b = rng.next_u64();
    // u1 in (0, 1], u2 in [0, 1)
    let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_order_free() {
        let a: Vec<f64> = (0..10).map(|j| gaussian(5, 3, j)).collect();
        let b: Vec<f64> = (0..10).rev().map(|j| gaussian(5, 3, j)).collect();
        let b: Vec<f64> = b.into_iter().rev().collect();
        assert_eq!(a, b);
        assert_ne!(gaussian(5, 3, 0), gaussian(5, 4, 0));
        assert_ne!(gaussian(5, 3, 0), gaussian(6, 3, 0));
    }

    #[test]
    fn standard_normal_moments() {
        let n = 40_000;
        let xs: Vec<f64> = (0..n).map(|j| gaussian(1, j % 7, j)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var.sqrt() - 1.0).abs() < 0.02, "std {}", var.sqrt());
    }
}
