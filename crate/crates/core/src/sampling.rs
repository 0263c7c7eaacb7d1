//! Deterministic direction sets and seeded random sampling.
//!
//! All set-containment checks in the crate are falsified (or not) on sampled
//! boundary points, so the direction generator must be deterministic: in 1D
//! the two unit directions alternate, in 2D we use the golden-angle sequence,
//! and in higher dimensions normalized Gaussian draws from a fixed-seed
//! stream. Extending `count` extends the sequence (the first points do not
//! change), which makes "more samples never weaken the check" properties
//! testable.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fixed seed for the higher-dimensional direction stream.
const DIRECTION_SEED: u64 = 0x5eed_d14e_c710_5eed;

/// Seeded RNG used everywhere explicit seeds are taken.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` quasi-uniform unit directions in dimension `dim`.
pub fn directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(dim >= 1, "dimension must be at least 1");
    match dim {
        1 => (0..count).map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).collect(),
        2 => {
            // Golden-angle sequence; prefixes are nested.
            let golden = 0.618_033_988_749_894_9_f64;
            (0..count)
                .map(|i| {
                    let theta = core::f64::consts::TAU * ((i as f64 * golden).fract());
                    vec![theta.cos(), theta.sin()]
                })
                .collect()
        }
        _ => {
            let mut r = rng(DIRECTION_SEED);
            (0..count).map(|_| gaussian_direction(dim, &mut r)).collect()
        }
    }
}

/// A single unit vector drawn from the normalized Gaussian distribution.
pub fn gaussian_direction(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Standard normal via Box-Muller.
pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
}
