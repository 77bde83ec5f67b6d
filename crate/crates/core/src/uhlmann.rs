//! Fidelity, purification alignment and channel construction.
//!
//! Vectors on `A ⊗ B` are handled through their `dA × dB` coefficient
//! matrices, so `A` and `B` may be any site subsets of a chain (see
//! [`Split`](crate::linalg::Split)).

use nalgebra::ComplexField;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Split};
use crate::scalar::{cr, CMat, CVec, Real};
use crate::state::DensityOperator;

/// `F(ρ, σ) = (Tr|√ρ √σ|)²`, clamped to `[0, 1]`.
pub fn fidelity_matrices<T: Real>(rho: &CMat<T>, sigma: &CMat<T>) -> T {
    let s = linalg::psd_sqrt(rho) * linalg::psd_sqrt(sigma);
    let root = linalg::singular_values(&s).into_iter().fold(T::zero(), |a, x| a + x);
    (root * root).min(T::one()).max(T::zero())
}

pub fn fidelity<T: Real>(rho: &DensityOperator<T>, sigma: &DensityOperator<T>) -> Result<T> {
    if rho.sites() != sigma.sites() || rho.dims() != sigma.dims() {
        return Err(Error::InvalidArgument("fidelity needs operators on the same sites".into()));
    }
    Ok(fidelity_matrices(rho.matrix(), sigma.matrix()))
}

#[derive(Clone, Debug, Serialize)]
pub struct FuchsVanDeGraaf {
    /// `1 − √F`.
    pub lower: f64,
    /// `½‖ρ − σ‖₁`.
    pub middle: f64,
    /// `√(1 − F)`.
    pub upper: f64,
    pub pass: bool,
}

pub fn fuchs_vdgraaf_check<T: Real>(rho: &CMat<T>, sigma: &CMat<T>) -> FuchsVanDeGraaf {
    let f = fidelity_matrices(rho, sigma).as_f64();
    let lower = 1.0 - f.sqrt();
    let middle = 0.5 * linalg::trace_norm(&(rho - sigma)).as_f64();
    let upper = (1.0 - f).max(0.0).sqrt();
    FuchsVanDeGraaf { lower, middle, upper, pass: lower <= middle + 1e-9 && middle <= upper + 1e-9 }
}

#[derive(Clone, Debug)]
pub struct Alignment<T: Real> {
    /// Unitary on `A`.
    pub unitary: CMat<T>,
    /// `⟨η|(U⊗1)ξ⟩`, real and nonnegative by construction.
    pub overlap: T,
    /// `‖(U⊗1)ξ − η‖`.
    pub residual: T,
    /// The contraction over `B` was rank deficient and the unitary was
    /// completed on its kernel.
    pub completed: bool,
}

/// Unitary `U` on `A` maximizing `|⟨η|(U⊗1)ξ⟩|` for coefficient matrices
/// `ξ, η` of shape `dA × dB`.
///
/// With `X = Ξ H†` and polar decomposition `X = Q P`, `U = Q†` gives
/// `⟨η|(U⊗1)ξ⟩ = Tr P = ‖X‖₁`, the Uhlmann optimum.
pub fn align_matrices<T: Real>(xi: &CMat<T>, eta: &CMat<T>) -> Result<Alignment<T>> {
    if xi.shape() != eta.shape() {
        return Err(Error::Dimension(format!("{:?} vs {:?} coefficient matrices", xi.shape(), eta.shape())));
    }
    let (unitary, completed) = if xi.nrows() > 2 * xi.ncols() { reduced_alignment(xi, eta) } else { full_alignment(xi, eta) };
    let rotated = &unitary * xi;
    let overlap = eta.iter().zip(rotated.iter()).fold(cr(T::zero()), |acc, (e, r)| acc + e.conj() * r);
    let residual = (&rotated - eta).norm();
    Ok(Alignment { unitary, overlap: overlap.re, residual, completed })
}

fn full_alignment<T: Real>(xi: &CMat<T>, eta: &CMat<T>) -> (CMat<T>, bool) {
    let (q, completed) = linalg::polar_factor(&(xi * eta.adjoint()));
    (q.adjoint(), completed)
}

/// Same optimum when `dA ≫ dB`: align inside `S = span(Ξ, H)` and act as
/// the identity on `S^⊥`.
fn reduced_alignment<T: Real>(xi: &CMat<T>, eta: &CMat<T>) -> (CMat<T>, bool) {
    let d = xi.nrows();
    let (u, s, _) = linalg::svd(&stack_columns(xi, eta));
    let cutoff = T::lit(1e-12) * s.first().copied().unwrap_or_else(T::one).max(T::lit(1e-300));
    let rank = s.iter().filter(|&&x| x > cutoff).count();
    let basis = u.columns(0, rank).into_owned();
    let (xi_s, eta_s) = (basis.adjoint() * xi, basis.adjoint() * eta);
    let (u_s, completed) = full_alignment(&xi_s, &eta_s);
    let shift = u_s - linalg::identity::<T>(rank);
    (linalg::identity::<T>(d) + &basis * shift * basis.adjoint(), completed)
}

fn stack_columns<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let mut m = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    m.columns_mut(0, a.ncols()).copy_from(a);
    m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    m
}

/// [`align_matrices`] for vectors, with `A` the kept factor of `split`.
pub fn align_purifications<T: Real>(xi: &CVec<T>, eta: &CVec<T>, split: &Split) -> Result<Alignment<T>> {
    if xi.len() != split.total() || eta.len() != split.total() {
        return Err(Error::Dimension("vector does not match the bipartition".into()));
    }
    align_matrices(&split.matricize(xi), &split.matricize(eta))
}

/// Channel `Φ(ρ) = Σ_j M_j ρ M_j†` on `A` with `Σ_j M_j† M_j = 1`.
#[derive(Clone, Debug)]
pub struct KrausMap<T: Real> {
    pub kraus: Vec<CMat<T>>,
    /// `ν_j = ⟨ξ|M_j† M_j|ξ⟩`, descending.
    pub gram_eigenvalues: Vec<T>,
}

impl<T: Real> KrausMap<T> {
    pub fn dim(&self) -> usize {
        self.kraus.first().map_or(0, |m| m.nrows())
    }

    /// `max |Σ M_j† M_j − 1|`.
    pub fn completeness_error(&self) -> T {
        let d = self.dim();
        let sum = self.kraus.iter().fold(CMat::zeros(d, d), |acc, m| acc + m.adjoint() * m);
        linalg::max_abs_diff(&sum, &linalg::identity(d))
    }

    /// `(Φ ⊗ id)(ρ)` for `ρ` on `A ⊗ B`, `A` most significant.
    pub fn apply(&self, rho: &CMat<T>) -> CMat<T> {
        let d = self.dim();
        let db = rho.nrows() / d;
        let mut out = CMat::zeros(rho.nrows(), rho.ncols());
        for m in &self.kraus {
            let big = linalg::kron(m, &linalg::identity(db));
            out += &big * rho * big.adjoint();
        }
        out
    }

    /// Choi matrix `Σ_{kl} |k⟩⟨l| ⊗ Φ(|k⟩⟨l|)`.
    pub fn choi(&self) -> CMat<T> {
        let d = self.dim();
        let mut out = CMat::zeros(d * d, d * d);
        for k in 0..d {
            for l in 0..d {
                let mut e = CMat::zeros(d, d);
                e[(k, l)] = cr(T::one());
                let img = self.kraus.iter().fold(CMat::zeros(d, d), |acc, m| acc + m * &e * m.adjoint());
                for i in 0..d {
                    for j in 0..d {
                        out[(k * d + i, l * d + j)] = img[(i, j)];
                    }
                }
            }
        }
        out
    }

    /// `max |⟨ξ|M̂_i† M̂_j|ξ⟩ − δ_ij ν_j|` for `ξ` on `A ⊗ B`.
    pub fn gram_error(&self, xi: &CVec<T>) -> T {
        let d = self.dim();
        let db = xi.len() / d;
        let xm = CMat::from_fn(d, db, |a, b| xi[a * db + b]);
        let images: Vec<CMat<T>> = self.kraus.iter().map(|m| m * &xm).collect();
        let mut worst = T::zero();
        for (i, a) in images.iter().enumerate() {
            for (j, b) in images.iter().enumerate() {
                let g = a.iter().zip(b.iter()).fold(cr(T::zero()), |acc, (x, y)| acc + x.conj() * y);
                let target = if i == j { self.gram_eigenvalues[i] } else { T::zero() };
                worst = worst.max((g - cr(target)).modulus());
            }
        }
        worst
    }
}

/// Canonical purification `Σ_k √p_k |e_k⟩ ⊗ |v_k⟩` of `σ` on an environment
/// of dimension `env_dim` (environment most significant).
pub fn purify<T: Real>(sigma: &CMat<T>, env_dim: usize) -> Result<CVec<T>> {
    let (vals, vecs) = linalg::eigh(&linalg::hermitian_part(sigma));
    let d = sigma.nrows();
    let cutoff = T::lit(1e-14);
    let support: Vec<usize> = (0..d).rev().filter(|&k| vals[k] > cutoff).collect();
    if support.len() > env_dim {
        return Err(Error::EnvironmentTooSmall { env_dim, rank: support.len() });
    }
    let mut out = CVec::zeros(env_dim * d);
    for (e, &k) in support.iter().enumerate() {
        let w = cr(vals[k].sqrt());
        for i in 0..d {
            out[e * d + i] = vecs[(i, k)] * w;
        }
    }
    let n = out.norm();
    Ok(out / cr(n))
}

/// Builds the channel on `A` from the alignment of `e₁ ⊗ ξ` with a
/// purification of `σ` over `A′ ⊗ A`, then rotates the Kraus operators so
/// that they are orthogonal on `ξ`.
///
/// `xi` and `sigma` live on `A ⊗ B` with `A` most significant and
/// `dim A = da`.
pub fn build_cptp<T: Real>(xi: &CVec<T>, sigma: &CMat<T>, da: usize, env_dim: usize) -> Result<KrausMap<T>> {
    let total = xi.len();
    if sigma.nrows() != total || total % da != 0 || env_dim == 0 {
        return Err(Error::Dimension("ξ, σ and dim A are inconsistent".into()));
    }
    let db = total / da;
    let eta = purify(sigma, env_dim)?;
    // e₁ ⊗ ξ on A′ ⊗ A ⊗ B
    let mut lifted = CVec::zeros(env_dim * total);
    lifted.rows_mut(0, total).copy_from(xi);
    let as_matrix = |v: &CVec<T>| CMat::from_fn(env_dim * da, db, |r, c| v[r * db + c]);
    let align = align_matrices(&as_matrix(&lifted), &as_matrix(&eta))?;
    let u = align.unitary;
    // M_j = ⟨e_j| U |e_1⟩ as a block of U
    let raw: Vec<CMat<T>> = (0..env_dim).map(|j| u.view((j * da, 0), (da, da)).into_owned()).collect();

    let xm = CMat::from_fn(da, db, |a, b| xi[a * db + b]);
    let images: Vec<CMat<T>> = raw.iter().map(|m| m * &xm).collect();
    let gram = CMat::from_fn(env_dim, env_dim, |i, j| {
        images[i].iter().zip(images[j].iter()).fold(cr(T::zero()), |acc, (x, y)| acc + x.conj() * y)
    });
    let (nu, w) = linalg::eigh(&linalg::hermitian_part(&gram));
    let order: Vec<usize> = (0..env_dim).rev().collect();
    let kraus: Vec<CMat<T>> = order
        .iter()
        .map(|&j| raw.iter().enumerate().fold(CMat::zeros(da, da), |acc, (i, m)| acc + m * w[(i, j)]))
        .collect();
    let gram_eigenvalues = order.iter().map(|&j| nu[j].max(T::zero())).collect();
    Ok(KrausMap { kraus, gram_eigenvalues })
}

#[derive(Clone, Debug)]
pub struct ProductOverlap<T: Real> {
    /// `(U|φ′⟩) ⊗ |φ⟩` in the ordering of the split.
    pub product: CVec<T>,
    pub overlap: T,
    pub completed: bool,
}

/// Product vector `a ⊗ φ` with the largest overlap with `ξ`, obtained by
/// aligning `φ′ ⊗ φ` (with `φ′ = |0⟩` on `A`) to `ξ`.
pub fn largest_overlap_product<T: Real>(xi: &CVec<T>, phi: &CVec<T>, split: &Split) -> Result<ProductOverlap<T>> {
    if phi.len() != split.rest_dim() || xi.len() != split.total() {
        return Err(Error::Dimension("φ must live on the B factor of the split".into()));
    }
    let mut seed = CMat::zeros(split.keep_dim(), split.rest_dim());
    for b in 0..split.rest_dim() {
        seed[(0, b)] = phi[b];
    }
    let target = split.matricize(xi);
    let align = align_matrices(&seed, &target)?;
    let product = split.unmatricize(&(&align.unitary * seed));
    let overlap = xi.dotc(&product).modulus();
    Ok(ProductOverlap { product, overlap, completed: align.completed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ops;
    use crate::random;

    fn pure(v: &CVec<f64>) -> CMat<f64> {
        v * v.adjoint()
    }

    #[test]
    fn fidelity_examples() {
        let zero = pure(&ops::ket0());
        let one = pure(&CVec::from_vec(vec![cr(0.0), cr(1.0)]));
        let plus = pure(&ops::ket_plus());
        assert!((fidelity_matrices(&zero, &zero) - 1.0).abs() < 1e-12);
        assert!(fidelity_matrices(&zero, &one).abs() < 1e-12);
        assert!((fidelity_matrices(&zero, &plus) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fvdg_pure_example() {
        let r = fuchs_vdgraaf_check(&pure(&ops::ket0()), &pure(&ops::ket_plus()));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r.lower - (1.0 - h)).abs() < 1e-12);
        assert!((r.middle - h).abs() < 1e-12 && (r.upper - h).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn align_identical_gives_identity() {
        let mut rng = random::rng(4);
        let xi = random::pure_vector::<f64, _>(12, &mut rng);
        let split = Split::new(&[3, 4], &[0]).unwrap();
        let a = align_purifications(&xi, &xi, &split).unwrap();
        assert!(linalg::max_abs_diff(&a.unitary, &linalg::identity(3)) < 1e-10);
        assert!(a.residual < 1e-12);
    }

    #[test]
    fn align_recovers_local_unitary() {
        let mut rng = random::rng(5);
        let xi = random::pure_vector::<f64, _>(16, &mut rng);
        let v = random::unitary::<f64, _>(4, &mut rng);
        let split = Split::new(&[4, 4], &[0]).unwrap();
        let eta = split.apply(&v, &xi);
        let a = align_purifications(&xi, &eta, &split).unwrap();
        assert!(a.residual < 1e-10);
    }

    #[test]
    fn reduced_alignment_matches_full() {
        let mut rng = random::rng(8);
        let xi = random::ginibre::<f64, _>(16, 3, &mut rng);
        let eta = random::ginibre::<f64, _>(16, 3, &mut rng);
        let (u, _) = reduced_alignment(&xi, &eta);
        let (v, _) = full_alignment(&xi, &eta);
        assert!(linalg::unitarity_error(&u) < 1e-12);
        let ov = |w: &CMat<f64>| (eta.adjoint() * w * &xi).trace();
        assert!((ov(&u) - ov(&v)).modulus() < 1e-12);
        assert!((ov(&u).re - linalg::trace_norm(&(&xi * eta.adjoint()))).abs() < 1e-12);
    }

    #[test]
    fn cptp_identity_case() {
        let mut rng = random::rng(6);
        let xi = random::pure_vector::<f64, _>(8, &mut rng);
        let k = build_cptp(&xi, &pure(&xi), 2, 2).unwrap();
        assert!(k.completeness_error() < 1e-12);
        assert!((k.gram_eigenvalues[0] - 1.0).abs() < 1e-10);
        assert!(linalg::trace_norm(&(k.apply(&pure(&xi)) - pure(&xi))) < 1e-10);
    }

    #[test]
    fn cptp_rejects_small_environment() {
        let mut rng = random::rng(7);
        let xi = random::pure_vector::<f64, _>(4, &mut rng);
        let sigma = random::density_matrix::<f64, _>(4, &mut rng);
        assert!(matches!(build_cptp(&xi, &sigma, 2, 2), Err(Error::EnvironmentTooSmall { .. })));
    }

    #[test]
    fn bell_product_overlap() {
        let a = cr(std::f64::consts::FRAC_1_SQRT_2);
        let bell = CVec::from_vec(vec![a, cr(0.0), cr(0.0), a]);
        let split = Split::new(&[2, 2], &[0]).unwrap();
        let p = largest_overlap_product(&bell, &ops::ket0(), &split).unwrap();
        assert!((p.overlap - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }
}
