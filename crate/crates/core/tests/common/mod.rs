//! Brute-force reference implementations for the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use nalgebra::Complex;

pub type Complex64 = Complex<f64>;

pub type M = DMatrix<Complex64>;
pub type V = DVector<Complex64>;

/// Bit of `site` in `index` for an `n`-qubit chain, site 0 most significant.
fn bit(index: usize, site: usize, n: usize) -> usize {
    (index >> (n - 1 - site)) & 1
}

/// `ρ_K[i, j] = Σ_r ψ(i, r) ψ̄(j, r)` by enumerating every basis index.
pub fn partial_trace_pure(psi: &V, keep: &[usize], n: usize) -> M {
    let dk = 1 << keep.len();
    let mut rho = M::zeros(dk, dk);
    let label = |idx: usize| keep.iter().fold(0, |acc, &s| (acc << 1) | bit(idx, s, n));
    let rest = |idx: usize| (0..n).filter(|s| !keep.contains(s)).fold(0, |acc, s| (acc << 1) | bit(idx, s, n));
    let dim = 1 << n;
    for a in 0..dim {
        for b in 0..dim {
            if rest(a) == rest(b) {
                rho[(label(a), label(b))] += psi[a] * psi[b].conj();
            }
        }
    }
    rho
}

/// `op` acting on `sites` (in the listed order) of `n` qubits, identity
/// elsewhere, as a full `2ⁿ × 2ⁿ` matrix built entry by entry.
pub fn embed(op: &M, sites: &[usize], n: usize) -> M {
    let dim = 1 << n;
    let label = |idx: usize| sites.iter().fold(0, |acc, &s| (acc << 1) | bit(idx, s, n));
    let rest_mask: usize = (0..n).filter(|s| !sites.contains(s)).map(|s| 1 << (n - 1 - s)).sum();
    let mut out = M::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            if a & rest_mask == b & rest_mask {
                out[(a, b)] = op[(label(a), label(b))];
            }
        }
    }
    out
}

/// `Σ |λ|` of a Hermitian matrix from its eigenvalues.
pub fn trace_norm_hermitian(m: &M) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigen().eigenvalues.iter().map(|x| x.abs()).sum()
}

/// Eigenvalues of `M†M` (squared singular values), descending.
pub fn gram_eigenvalues(m: &M) -> Vec<f64> {
    let g = m.adjoint() * m;
    let mut s: Vec<f64> = g.symmetric_eigen().eigenvalues.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

pub fn max_abs_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Ground energy and gap of `H = −Σ Z_i Z_{i+1} − g Σ X_i` on an open
/// chain from the Majorana form `H = (i/4) Σ K_ab γ_a γ_b`: the mode
/// energies are the singular values of `K` (each appearing twice).
pub fn free_fermion_tfim(n: usize, g: f64) -> (f64, f64) {
    let mut k = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        k[(2 * j, 2 * j + 1)] = 2.0 * g;
        k[(2 * j + 1, 2 * j)] = -2.0 * g;
        if j + 1 < n {
            k[(2 * j + 1, 2 * j + 2)] = 2.0;
            k[(2 * j + 2, 2 * j + 1)] = -2.0;
        }
    }
    let mut s: Vec<f64> = (k.transpose() * &k).symmetric_eigen().eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let e0 = -0.25 * s.iter().sum::<f64>();
    (e0, s[0])
}

pub fn random_state(n: usize, seed: u64) -> V {
    let mut rng = sre_core::random::rng(seed);
    sre_core::random::pure_vector::<f64, _>(1 << n, &mut rng)
}
