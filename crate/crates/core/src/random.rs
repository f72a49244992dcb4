//! Seeded random generators for matrices, projections and unitaries.
//!
//! All randomness in the crate flows through [`seeded`] so identical seeds
//! give identical output on every platform.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, support_pos, CMatrix, HermitianMatrix, ProjectionMatrix, UnitaryMatrix, C64, SUPPORT_EPS};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a stream index (splitmix64 finalizer).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix with i.i.d. standard complex normal entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, |_, _| complex_normal(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianMatrix {
    HermitianMatrix::symmetrized(&random_matrix(rng, dim))
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phases of
/// `diag(R)` divided out.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> UnitaryMatrix {
    let g: DMatrix<C64> = random_matrix(rng, dim).into_inner();
    let qr = g.qr();
    let (q, r) = qr.unpack();
    let mut q = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    UnitaryMatrix::new(CMatrix::new(q).expect("square")).expect("QR factor is unitary")
}

/// Positive spectral projection of a shifted random Hermitian matrix; the
/// shift spreads the rank over `0..=dim`.
pub fn random_projection<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ProjectionMatrix {
    let h = random_hermitian(rng, dim);
    let shift: f64 = rng.random_range(-1.5..1.5);
    let shifted = &*h - &CMatrix::identity(dim).scale_re(shift);
    let h = HermitianMatrix::symmetrized(&shifted);
    support_pos(&h, SUPPORT_EPS).expect("eigensolver on small random matrix")
}

/// Uniform phase `e^{iθ}`.
pub fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let t: f64 = rng.random();
    crate::linalg::phase(t)
}
