//! Seeded random states, unitaries and channels.
//!
//! Every generator takes an explicit RNG so callers control determinism;
//! `derive_seed` gives schedule-independent per-restart streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::QuantumChannel;
use crate::linalg::{c, cr, eigh, CMatrix, CVector, DensityMatrix, PureState};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer over `(seed, index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(gaussian(rng), gaussian(rng)))
}

/// Haar-random pure state over `dims`.
pub fn random_pure_dims<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> PureState {
    let d: usize = dims.iter().product();
    let v = CVector::from_fn(d, |_, _| c(gaussian(rng), gaussian(rng)));
    PureState::normalized(v, dims.to_vec()).expect("Gaussian vector is nonzero almost surely")
}

/// Haar-random pure state in dimension `d`, deterministic in `seed`.
pub fn random_pure(d: usize, seed: u64) -> PureState {
    random_pure_dims(&mut rng(seed), &[d])
}

/// Random mixed state from the induced measure with the given rank.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dims: &[usize], rank: usize) -> DensityMatrix {
    let d: usize = dims.iter().product();
    let g = ginibre(rng, d, rank.max(1));
    let m = &g * g.adjoint();
    let tr = crate::linalg::trace(&m).re;
    DensityMatrix::raw_hermitized(m / cr(tr), dims.to_vec())
}

/// Full-rank random mixed state.
pub fn random_mixed<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> DensityMatrix {
    let d: usize = dims.iter().product();
    random_density(rng, dims, d)
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    (&g + g.adjoint()) * cr(0.5)
}

/// Haar-random unitary via QR with the phase correction on R's diagonal.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = ginibre(rng, d, d).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / cr(z.norm()) } else { cr(1.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random CPTP map with `n_kraus` operators, built from a random isometry.
/// The count is raised to `⌈d_in/d_out⌉` when smaller, since an isometry
/// needs at least as many output rows as inputs.
pub fn random_channel<R: Rng + ?Sized>(
    rng: &mut R,
    d_in: usize,
    d_out: usize,
    n_kraus: usize,
) -> QuantumChannel {
    let n = n_kraus.max(1).max(d_in.div_ceil(d_out));
    let g = ginibre(rng, n * d_out, d_in);
    // V = G (G^dagger G)^{-1/2} is an isometry; its row blocks are Kraus operators.
    let gram = eigh(&(g.adjoint() * &g));
    let inv_sqrt = gram.map_on(|l| l > 0.0, |l| 1.0 / l.sqrt());
    let v = &g * inv_sqrt;
    let kraus = (0..n).map(|k| v.rows(k * d_out, d_out).into_owned()).collect();
    QuantumChannel::new(kraus, vec![d_in], vec![d_out]).expect("isometry blocks form a CPTP map")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;

    #[test]
    fn random_pure_is_deterministic_and_normalized() {
        let a = random_pure(5, 42);
        let b = random_pure(5, 42);
        assert_eq!(a, b);
        assert!((a.amplitudes().norm() - 1.0).abs() < 1e-12);
        let one = random_pure(1, 3);
        assert!((one.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_first_moment_on_qubits() {
        let mut r = rng(11);
        let n = 10_000;
        let mean: f64 =
            (0..n).map(|_| random_pure_dims(&mut r, &[2]).amplitudes()[0].norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut r = rng(5);
        for d in 1..6 {
            assert!(unitarity_defect(&random_unitary(&mut r, d)) < 1e-12);
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(s.len(), 1000);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }
}
