//! Ground state, spectral gap and the finite-volume gap condition.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{build_hamiltonian, Hamiltonian, Interaction};
use crate::random;
use crate::scalar::{cr, CMat, CVec, Real};
use crate::state::{LocalOperator, PureState, SiteSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Residual target relative to the norm bound.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Gap below `degeneracy_rel · ‖H‖` flags the ground space as degenerate.
    pub degeneracy_rel: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 500, seed: 0, degeneracy_rel: 1e-8 }
    }
}

#[derive(Clone, Debug)]
pub struct GroundStateResult<T: Real> {
    pub psi: PureState<T>,
    pub energy0: T,
    pub energy1: T,
    pub gap: T,
    /// `‖(H − E₀)ψ‖`.
    pub residual: T,
    /// Set when `gap < degeneracy_rel · ‖H‖`.
    pub degenerate: bool,
    pub degeneracy_tol: T,
    pub first_excited: CVec<T>,
    pub method: Method,
    pub iterations: usize,
}

/// `‖H‖_∞`, which bounds the spectral norm of a Hermitian matrix.
fn row_sum_bound<T: Real>(h: &Hamiltonian<T>) -> T {
    match h {
        Hamiltonian::Dense(m) => (0..m.nrows())
            .map(|i| m.row(i).iter().fold(T::zero(), |acc, z| acc + z.modulus()))
            .fold(T::zero(), |a, b| a.max(b)),
        Hamiltonian::Sparse(s) => s.row_abs_sums().into_iter().fold(T::zero(), |a, b| a.max(b)),
    }
}

/// Two lowest eigenpairs of `h` on the chain `sites`.
pub fn solve<T: Real>(h: &Hamiltonian<T>, sites: &SiteSpec, opts: &SolveOptions) -> Result<GroundStateResult<T>> {
    if h.dim() != sites.total_dim() {
        return Err(Error::Dimension(format!("H has dimension {}, chain {}", h.dim(), sites.total_dim())));
    }
    if h.dim() < 2 {
        return Err(Error::InvalidArgument("need at least two levels to define a gap".into()));
    }
    let norm = row_sum_bound(h).max(T::lit(1e-300));
    let (e0, e1, mut v0, v1, method, iterations) = match h {
        Hamiltonian::Dense(m) => {
            let herm = linalg::hermiticity_error(m);
            if herm > T::lit(1e-10) * norm {
                return Err(Error::NotHermitian(herm.as_f64()));
            }
            let (vals, vecs) = linalg::eigh(m);
            (vals[0], vals[1], vecs.column(0).into_owned(), vecs.column(1).into_owned(), Method::Dense, 0)
        }
        Hamiltonian::Sparse(_) => {
            let tol = T::lit(opts.tol) * norm;
            let g = lanczos_lowest(h, &[], tol, opts.max_iter, opts.seed)?;
            // deflating the ground vector exposes a degenerate partner
            let x = lanczos_lowest(h, std::slice::from_ref(&g.vector), tol, opts.max_iter, opts.seed.wrapping_add(1))?;
            (g.value, x.value, g.vector, x.vector, Method::Lanczos, g.iterations + x.iterations)
        }
    };
    linalg::fix_phase(&mut v0);
    let residual = (h.matvec(&v0) - &v0 * cr(e0)).norm();
    let gap = (e1 - e0).max(T::zero());
    let degeneracy_tol = T::lit(opts.degeneracy_rel) * norm;
    Ok(GroundStateResult {
        psi: PureState::normalized(v0, sites.clone())?,
        energy0: e0,
        energy1: e1,
        gap,
        residual,
        degenerate: gap < degeneracy_tol,
        degeneracy_tol,
        first_excited: v1,
        method,
        iterations,
    })
}

/// Builds `H` for the interaction and solves it.
pub fn solve_interaction<T: Real>(interaction: &Interaction<T>, opts: &SolveOptions) -> Result<GroundStateResult<T>> {
    solve(&build_hamiltonian(interaction)?, interaction.chain(), opts)
}

struct Eigenpair<T: Real> {
    value: T,
    vector: CVec<T>,
    iterations: usize,
}

fn orthogonalize<T: Real>(v: &mut CVec<T>, against: &[CVec<T>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for q in against {
            let p = q.dotc(v);
            *v -= q * p;
        }
    }
}

fn random_orthogonal<T: Real, R: Rng>(dim: usize, against: &[CVec<T>], rng: &mut R) -> Option<CVec<T>> {
    for _ in 0..8 {
        let mut v = random::pure_vector::<T, R>(dim, rng);
        orthogonalize(&mut v, against);
        let n = v.norm();
        if n > T::lit(1e-8) {
            return Some(v / cr(n));
        }
    }
    None
}

/// Lowest eigenpair of `h` restricted to the orthogonal complement of
/// `deflate`, by Lanczos with full reorthogonalization.
fn lanczos_lowest<T: Real>(
    h: &Hamiltonian<T>,
    deflate: &[CVec<T>],
    tol: T,
    max_iter: usize,
    seed: u64,
) -> Result<Eigenpair<T>> {
    let dim = h.dim();
    let limit = (dim - deflate.len()).min(max_iter);
    let mut rng = random::rng(seed);
    let mut basis: Vec<CVec<T>> = Vec::new();
    let mut alpha: Vec<T> = Vec::new();
    let mut beta: Vec<T> = Vec::new();
    let mut q = random_orthogonal(dim, deflate, &mut rng)
        .ok_or_else(|| Error::InvalidArgument("deflation exhausts the space".into()))?;
    let mut best = (T::zero(), T::max_value().unwrap_or_else(T::one), CVec::zeros(0));

    for j in 0..limit {
        basis.push(q.clone());
        let mut w = h.matvec(&q);
        orthogonalize(&mut w, deflate);
        let a = q.dotc(&w).re;
        alpha.push(a);
        orthogonalize(&mut w, &basis);
        let b = w.norm();

        let m = alpha.len();
        let check = j + 1 == limit || m % 5 == 0 || b <= tol;
        if check {
            let tri = DMatrix::<T>::from_fn(m, m, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    T::zero()
                }
            });
            let eig = SymmetricEigen::new(tri);
            let (imin, &theta) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.partial_cmp(y.1).expect("finite Ritz values"))
                .expect("nonempty tridiagonal");
            let s = eig.eigenvectors.column(imin);
            let res_est = (b * s[m - 1]).abs();
            if res_est <= tol || j + 1 == limit {
                let mut v = CVec::zeros(dim);
                for (k, qk) in basis.iter().enumerate() {
                    v += qk * cr(s[k]);
                }
                let v = v.normalize();
                let mut r = h.matvec(&v);
                orthogonalize(&mut r, deflate);
                let true_res = (r - &v * cr(theta)).norm();
                if true_res <= tol * T::lit(10.0) {
                    return Ok(Eigenpair { value: theta, vector: v, iterations: m });
                }
                best = (theta, true_res, v);
            }
        }

        if j + 1 == limit {
            break;
        }
        if b <= tol {
            // invariant subspace found before convergence: continue from a fresh direction
            let mut against = deflate.to_vec();
            against.extend(basis.iter().cloned());
            match random_orthogonal(dim, &against, &mut rng) {
                Some(v) => q = v,
                None => break,
            }
            beta.push(T::zero());
        } else {
            q = w / cr(b);
            beta.push(b);
        }
    }
    let (value, residual, vector) = best;
    if vector.is_empty() {
        return Err(Error::NoConvergence { iterations: alpha.len(), residual: f64::INFINITY });
    }
    if residual <= tol * T::lit(1e3) {
        return Ok(Eigenpair { value, vector, iterations: alpha.len() });
    }
    Err(Error::NoConvergence { iterations: alpha.len(), residual: residual.as_f64() })
}

#[derive(Clone, Debug, Serialize)]
pub struct GapCheckReport {
    pub samples: usize,
    pub used: usize,
    pub discarded: usize,
    pub min_ratio: Option<f64>,
    pub gap: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

/// Samples random local `A` with `ψ(A) = 0` on intervals of at most three
/// sites and checks `⟨Aψ|(H − E₀)|Aψ⟩ ≥ γ ‖Aψ‖²`.
pub fn gap_condition_check<T: Real>(
    result: &GroundStateResult<T>,
    interaction: &Interaction<T>,
    samples: usize,
    seed: u64,
) -> Result<GapCheckReport> {
    let gap = result.gap.as_f64();
    if result.degenerate {
        return Ok(GapCheckReport {
            samples,
            used: 0,
            discarded: 0,
            min_ratio: None,
            gap,
            passed: false,
            skipped: Some("ground space is degenerate; the gap inequality has no unique state to test".into()),
        });
    }
    let h = build_hamiltonian(interaction)?;
    let chain = interaction.chain();
    let psi = &result.psi;
    let mut rng = random::rng(seed);
    let (mut used, mut discarded) = (0, 0);
    let mut min_ratio: Option<f64> = None;
    for _ in 0..samples {
        let n = chain.len();
        let width = rng.gen_range(1..=3usize.min(n));
        let lo = rng.gen_range(0..=n - width);
        let sites: Vec<usize> = (lo..lo + width).collect();
        let d = chain.dim_of(&sites);
        let m: CMat<T> = random::ginibre(d, d, &mut rng);
        let a = LocalOperator::new(sites, m)?;
        let mean = psi.expectation(&a)?;
        let a_psi = psi.apply(&a)? - psi.amplitudes() * mean;
        let norm2 = a_psi.norm_squared();
        if norm2 < T::lit(1e-24) {
            discarded += 1;
            continue;
        }
        let num = a_psi.dotc(&h.matvec(&a_psi)).re - result.energy0 * norm2;
        let ratio = (num / norm2).as_f64();
        min_ratio = Some(min_ratio.map_or(ratio, |r| r.min(ratio)));
        used += 1;
    }
    Ok(GapCheckReport {
        samples,
        used,
        discarded,
        min_ratio,
        gap,
        passed: min_ratio.map_or(true, |r| r >= gap - 1e-9),
        skipped: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ops, preset_product, preset_tfim, Boundary};

    #[test]
    fn single_qubit_field() {
        let h = Hamiltonian::Dense(ops::pauli_x::<f64>() * cr(-3.0));
        let r = solve(&h, &SiteSpec::qubits(1), &SolveOptions::default()).unwrap();
        assert!((r.energy0 + 3.0).abs() < 1e-12 && (r.energy1 - 3.0).abs() < 1e-12);
        assert!((r.gap - 6.0).abs() < 1e-12);
        assert!((r.psi.amplitudes() - ops::ket_plus::<f64>()).norm() < 1e-12);
    }

    #[test]
    fn product_model() {
        let r = solve_interaction(&preset_product::<f64>(4).unwrap(), &SolveOptions::default()).unwrap();
        assert!((r.energy0 + 4.0).abs() < 1e-12 && (r.gap - 2.0).abs() < 1e-12);
        assert!(!r.degenerate);
    }

    #[test]
    fn lanczos_matches_dense() {
        let int = preset_tfim::<f64>(8, 1.5, Boundary::Open).unwrap();
        let dense = solve_interaction(&int, &SolveOptions::default()).unwrap();
        let sparse = Hamiltonian::Sparse(crate::model::build_sparse(&int).unwrap());
        let lz = solve(&sparse, int.chain(), &SolveOptions::default()).unwrap();
        assert_eq!(lz.method, Method::Lanczos);
        assert!((lz.energy0 - dense.energy0).abs() < 1e-9);
        assert!((lz.gap - dense.gap).abs() < 1e-8);
        assert!(lz.psi.overlap(&dense.psi) > 1.0 - 1e-9);
    }

    #[test]
    fn lanczos_sees_degenerate_pair() {
        // g = 0 Ising: |0…0⟩ and |1…1⟩ are degenerate
        let int = preset_tfim::<f64>(6, 0.0, Boundary::Open).unwrap();
        let sparse = Hamiltonian::Sparse(crate::model::build_sparse(&int).unwrap());
        let r = solve(&sparse, int.chain(), &SolveOptions::default()).unwrap();
        assert!(r.degenerate);
    }

    #[test]
    fn product_gap_check() {
        let int = preset_product::<f64>(4).unwrap();
        let r = solve_interaction(&int, &SolveOptions::default()).unwrap();
        let rep = gap_condition_check(&r, &int, 50, 3).unwrap();
        assert!(rep.passed && rep.min_ratio.unwrap() >= 2.0 - 1e-9);
    }
}
