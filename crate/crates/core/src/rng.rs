//! Seeded randomness: seed derivation, Ginibre and Haar samplers, random states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numerics::ComplexMatrix;
use crate::C64;

/// Generator type used everywhere a seed is accepted.
pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for instance `index` of a campaign. Depends only on its arguments,
/// so instances can run in any order.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master).wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Complex normal sample with `E|z|^2 = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let entries: Vec<C64> = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    ComplexMatrix::from_row_major(rows, cols, &entries).expect("normal samples are finite")
}

/// Haar-distributed isometry (`rows >= cols`, `V^dagger V = I`), from QR of a
/// Ginibre matrix with the phases of `R`'s diagonal folded back into `Q`.
pub fn haar_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= cols && cols > 0, "isometry needs rows >= cols > 0");
    loop {
        let g = ginibre(rng, rows, cols).into_dmatrix();
        let qr = g.qr();
        let r = qr.r();
        if (0..cols).any(|i| r[(i, i)].norm() < 1e-300) {
            continue;
        }
        let mut q = qr.q();
        for j in 0..cols {
            let d = r[(j, j)];
            let phase = d / d.norm();
            for i in 0..rows {
                q[(i, j)] *= phase;
            }
        }
        return ComplexMatrix::from_dmatrix(q).expect("QR of finite matrix is finite");
    }
}

pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    haar_isometry(rng, dim, dim)
}

/// Uniformly distributed point on the unit sphere of `C^len`.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..len).map(|_| complex_normal(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-150 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Uniform sample from the probability simplex of dimension `len`.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..len).map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            return raw.into_iter().map(|x| x / total).collect();
        }
    }
}
