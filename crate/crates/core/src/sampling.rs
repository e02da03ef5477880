//! Reproducible random streams.
//!
//! Every parallel task draws from its own ChaCha stream keyed by the master
//! seed and the task index, so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Number of Monte Carlo samples handled by one task.
pub const CHUNK: usize = 4096;

pub fn task_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// Uniform direction on the unit sphere in `R^len` (normalized Gaussian).
pub fn uniform_direction(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..len).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-300 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}
