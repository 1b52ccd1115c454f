//! Replayable random sampling.
//!
//! Every sample draws from its own ChaCha stream selected by
//! `(seed, sample_index)`, so a witness can be regenerated from the two
//! integers alone, independently of how the batch was partitioned across
//! worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::Scalar;

/// The generator for sample `index` of a batch seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n` values, log-uniform in `[lo, hi]`, in draw order.
pub fn log_uniform<T: Scalar, R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|_| T::lit((a + (b - a) * rng.random::<f64>()).exp())).collect()
}

/// A point drawn uniformly from the unit sphere in `R^n`.
pub fn unit_sphere<T: Scalar, R: Rng>(rng: &mut R, n: usize) -> Vec<T> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return g.into_iter().map(|x| T::lit(x / norm)).collect();
        }
    }
}
