//! Seeded random instances used by randomized checks and sweeps.

use nalgebra::ComplexField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::fix_phase;
use crate::scalar::{c, CMat, CVec, Real, C};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(T::lit(re), T::lit(im))
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn ginibre<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat<T> {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unit vector.
pub fn pure_vector<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec<T> {
    let mut v = CVec::from_fn(d, |_, _| gaussian(rng)).normalize();
    fix_phase(&mut v);
    v
}

/// Random full-rank density matrix `G G† / Tr(G G†)`.
pub fn density_matrix<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat<T> {
    let g = ginibre::<T, R>(d, d, rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Haar-random unitary via QR with the phase of R's diagonal absorbed.
pub fn unitary<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat<T> {
    let qr = ginibre::<T, R>(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let z = r[(j, j)];
        let m = z.modulus();
        if m > T::zero() {
            let ph = z / c(m, T::zero());
            let mut col = q.column_mut(j);
            col *= ph;
        }
    }
    q
}

/// Random Hermitian matrix with Gaussian entries.
pub fn hermitian<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat<T> {
    let g = ginibre::<T, R>(d, d, rng);
    (&g + g.adjoint()) * c(T::lit(0.5), T::zero())
}
