//! Seeded synthetic instances. Reproducibility contract: the same seed
//! always yields the bit-identical matrix, independent of platform and of
//! how many simulations run around it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// m x n data matrix with i.i.d. N(0, 1/m) entries, drawn row by row from a
/// counter-based generator seeded with `seed`.
pub fn synth_gaussian(m: usize, n: usize, seed: u64) -> Result<Matrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "synthetic matrix needs positive sizes, got {m} x {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, (1.0 / m as f64).sqrt())
        .expect("positive standard deviation");
    let mut out = Matrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            out[(i, j)] = normal.sample(&mut rng);
        }
    }
    Ok(out)
}

/// Per-simulation seed derived from the master seed by SplitMix64 mixing, so
/// simulations can run in any order or in parallel without sharing a stream.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e3779b97f4a7c15_u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
