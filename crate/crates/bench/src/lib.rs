//! Shared fixtures for the benchmark targets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ctd_core::matrix::SquareMatrix;
use ctd_core::traversal::metric_closure;

/// Metric-closed random instance, the regime every solver call sees.
pub fn closed_random_matrix(seed: u64, n: usize) -> SquareMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = 1.0 - rng.gen::<f64>();
            m.set(i, j, d);
            m.set(j, i, d);
        }
    }
    metric_closure(&m).dist
}
