//! Seeded random sampling: RNG streams and Haar-distributed matrices.
//!
//! Every stochastic routine in the crate takes an explicit seed. Parallel
//! work derives one independent stream per index with [`derive_seed`], so
//! results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{c, CMatrix, CVector};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a master seed with an index (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(master: u64, index: u64) -> SeededRng {
    rng_from_seed(derive_seed(master, index))
}

fn normal(rng: &mut SeededRng) -> f64 {
    StandardNormal.sample(rng)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut SeededRng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2)
}

/// Haar-random isometry with `rows >= cols` (orthonormal columns).
pub fn haar_isometry(rows: usize, cols: usize, rng: &mut SeededRng) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let qr = ginibre(rows, cols, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    // fix the column phases so the distribution is exactly Haar
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary(n: usize, rng: &mut SeededRng) -> CMatrix {
    haar_isometry(n, n, rng)
}

/// Uniformly random unit vector in `C^n`.
pub fn random_unit_vector(n: usize, rng: &mut SeededRng) -> CVector {
    let v = CVector::from_fn(n, |_, _| c(normal(rng), normal(rng)));
    let norm = v.norm();
    v.unscale(norm)
}
