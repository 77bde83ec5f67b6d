//! Dense and sparse complex linear algebra on tensor-product spaces.
//!
//! Basis indices are mixed-radix numbers with site 0 as the most
//! significant digit. [`Split`] precomputes the bijection between a full
//! index and a (kept, traced) index pair for an arbitrary subset of sites,
//! which is all partial traces, embeddings and local applications need.

use nalgebra::ComplexField;
use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{cr, CMat, CVec, Real, C};

/// Bipartition of a tensor-product basis into kept and traced factors.
#[derive(Clone, Debug)]
pub struct Split {
    keep_dim: usize,
    rest_dim: usize,
    /// `table[k * rest_dim + r]` is the full index of `|k⟩ ⊗ |r⟩`.
    table: Vec<usize>,
}

impl Split {
    /// `keep` lists positions into `dims` (sorted, distinct). Both the kept
    /// and the traced factors keep their original relative order.
    pub fn new(dims: &[usize], keep: &[usize]) -> Result<Self> {
        if keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("kept positions must be strictly increasing".into()));
        }
        if keep.last().is_some_and(|&p| p >= dims.len()) {
            return Err(Error::Dimension(format!("position {:?} outside {} factors", keep.last(), dims.len())));
        }
        let mut is_kept = vec![false; dims.len()];
        for &p in keep {
            is_kept[p] = true;
        }
        let total: usize = dims.iter().product();
        let keep_dim: usize = keep.iter().map(|&p| dims[p]).product();
        let rest_dim = total / keep_dim;

        let mut table = vec![0usize; total];
        let mut digits = vec![0usize; dims.len()];
        for full in 0..total {
            let (mut k, mut r) = (0usize, 0usize);
            for (pos, &d) in digits.iter().enumerate() {
                if is_kept[pos] {
                    k = k * dims[pos] + d;
                } else {
                    r = r * dims[pos] + d;
                }
            }
            table[k * rest_dim + r] = full;
            // increment mixed-radix counter, last digit fastest
            for pos in (0..dims.len()).rev() {
                digits[pos] += 1;
                if digits[pos] < dims[pos] {
                    break;
                }
                digits[pos] = 0;
            }
        }
        Ok(Self { keep_dim, rest_dim, table })
    }

    pub fn keep_dim(&self) -> usize {
        self.keep_dim
    }

    pub fn rest_dim(&self) -> usize {
        self.rest_dim
    }

    pub fn total(&self) -> usize {
        self.table.len()
    }

    #[inline]
    pub fn index(&self, k: usize, r: usize) -> usize {
        self.table[k * self.rest_dim + r]
    }

    /// Reshapes a vector into the `keep × rest` coefficient matrix.
    pub fn matricize<T: Real>(&self, v: &CVec<T>) -> CMat<T> {
        CMat::from_fn(self.keep_dim, self.rest_dim, |k, r| v[self.index(k, r)])
    }

    pub fn unmatricize<T: Real>(&self, m: &CMat<T>) -> CVec<T> {
        let mut v = CVec::zeros(self.total());
        for k in 0..self.keep_dim {
            for r in 0..self.rest_dim {
                v[self.index(k, r)] = m[(k, r)];
            }
        }
        v
    }

    /// Reduced density matrix of a pure vector on the kept factor.
    pub fn reduce_pure<T: Real>(&self, v: &CVec<T>) -> CMat<T> {
        let m = self.matricize(v);
        &m * m.adjoint()
    }

    /// Partial trace of a full operator over the traced factor.
    pub fn partial_trace<T: Real>(&self, op: &CMat<T>) -> CMat<T> {
        let mut out = CMat::zeros(self.keep_dim, self.keep_dim);
        for k in 0..self.keep_dim {
            for kp in 0..self.keep_dim {
                let mut acc = C::<T>::zero();
                for r in 0..self.rest_dim {
                    acc += op[(self.index(k, r), self.index(kp, r))];
                }
                out[(k, kp)] = acc;
            }
        }
        out
    }

    /// `(op ⊗ 1) v` with `op` acting on the kept factor.
    pub fn apply<T: Real>(&self, op: &CMat<T>, v: &CVec<T>) -> CVec<T> {
        self.unmatricize(&(op * self.matricize(v)))
    }

    /// `op ⊗ 1` as a full matrix.
    pub fn embed<T: Real>(&self, op: &CMat<T>) -> CMat<T> {
        let n = self.total();
        let mut out = CMat::zeros(n, n);
        for k in 0..self.keep_dim {
            for kp in 0..self.keep_dim {
                let val = op[(k, kp)];
                if val.is_zero() {
                    continue;
                }
                for r in 0..self.rest_dim {
                    out[(self.index(k, r), self.index(kp, r))] = val;
                }
            }
        }
        out
    }
}

pub fn kron<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}

pub fn kron_vec<T: Real>(a: &CVec<T>, b: &CVec<T>) -> CVec<T> {
    a.kronecker(b)
}

pub fn identity<T: Real>(d: usize) -> CMat<T> {
    CMat::identity(d, d)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh<T: Real>(m: &CMat<T>) -> Vec<T> {
    let mut v: Vec<T> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// Thin SVD `m = u diag(s) v_t` with singular values descending.
///
/// The LAPACK-free iteration occasionally returns an inconsistent
/// factorization on rank-deficient complex input, so every result is
/// checked and, failing that, recomputed from the Hermitian dilation.
pub fn svd<T: Real>(m: &CMat<T>) -> (CMat<T>, Vec<T>, CMat<T>) {
    if let Some(out) = checked_svd(m) {
        return out;
    }
    if let Some((u, s, v_t)) = checked_svd(&m.adjoint()) {
        return (v_t.adjoint(), s, u.adjoint());
    }
    dilation_svd(m)
}

fn raw_svd<T: Real>(m: &CMat<T>) -> (CMat<T>, Vec<T>, CMat<T>) {
    let dec = m.clone().svd(true, true);
    let u = dec.u.expect("u requested");
    let v_t = dec.v_t.expect("v_t requested");
    let s = dec.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal));
    let u_sorted = CMat::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let vt_sorted = CMat::from_fn(order.len(), v_t.ncols(), |r, c| v_t[(order[r], c)]);
    (u_sorted, order.iter().map(|&i| s[i]).collect(), vt_sorted)
}

fn svd_is_consistent<T: Real>(m: &CMat<T>, u: &CMat<T>, s: &[T], v_t: &CMat<T>) -> bool {
    let scale = m.norm().max(T::one());
    let tol = T::lit(1e-10);
    let mut us = u.clone();
    for (j, &x) in s.iter().enumerate() {
        us.column_mut(j).scale_mut(x);
    }
    let gram_u = u.adjoint() * u - identity::<T>(u.ncols());
    let gram_v = v_t * v_t.adjoint() - identity::<T>(v_t.nrows());
    max_abs(&(us * v_t - m)) <= tol * scale && max_abs(&gram_u) <= tol && max_abs(&gram_v) <= tol
}

fn checked_svd<T: Real>(m: &CMat<T>) -> Option<(CMat<T>, Vec<T>, CMat<T>)> {
    let (u, s, v_t) = raw_svd(m);
    svd_is_consistent(m, &u, &s, &v_t).then_some((u, s, v_t))
}

/// SVD from the eigenpairs `(s, [u; v]/√2)` of `[[0, m], [m†, 0]]`.
fn dilation_svd<T: Real>(m: &CMat<T>) -> (CMat<T>, Vec<T>, CMat<T>) {
    let (r, c) = m.shape();
    let k = r.min(c);
    let mut h = CMat::zeros(r + c, r + c);
    h.view_mut((0, r), (r, c)).copy_from(m);
    h.view_mut((r, 0), (c, r)).copy_from(&m.adjoint());
    let (vals, vecs) = eigh(&h);
    let top = vals.last().copied().unwrap_or_else(T::zero).max(T::lit(1e-300));
    let cutoff = T::lit(1e-12) * top;
    let sqrt2 = cr(T::lit(2.0).sqrt());
    let mut us = Vec::new();
    let mut vs = Vec::new();
    let mut s = Vec::new();
    for i in (0..vals.len()).rev().take(k) {
        if vals[i] <= cutoff {
            break;
        }
        us.push(vecs.column(i).rows(0, r).into_owned() * sqrt2);
        vs.push(vecs.column(i).rows(r, c).into_owned() * sqrt2);
        s.push(vals[i]);
    }
    let u = complete_columns(us, r, k);
    let v = complete_columns(vs, c, k);
    s.resize(k, T::zero());
    (u, s, v.adjoint())
}

/// Gram–Schmidt: orthonormalizes `cols` and extends them with standard
/// basis vectors to `k` orthonormal columns of length `d`.
fn complete_columns<T: Real>(cols: Vec<CVec<T>>, d: usize, k: usize) -> CMat<T> {
    let mut out: Vec<CVec<T>> = Vec::with_capacity(k);
    let candidates = cols.into_iter().chain((0..d).map(|e| {
        let mut v = CVec::<T>::zeros(d);
        v[e] = cr(T::one());
        v
    }));
    for mut v in candidates {
        if out.len() == k {
            break;
        }
        for _ in 0..2 {
            for q in &out {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let n = v.norm();
        if n > T::lit(1e-6) {
            out.push(v / cr(n));
        }
    }
    CMat::from_columns(&out)
}

pub fn singular_values<T: Real>(m: &CMat<T>) -> Vec<T> {
    let mut s: Vec<T> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Largest singular value. Large inputs go through the smaller Gram
/// matrix, whose eigenvalues are several times cheaper than an SVD.
pub fn spectral_norm<T: Real>(m: &CMat<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    if m.nrows().min(m.ncols()) <= 64 {
        return singular_values(m).first().copied().unwrap_or_else(T::zero);
    }
    let gram = if m.nrows() <= m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
    let top = eigvalsh(&hermitian_part(&gram)).last().copied().unwrap_or_else(T::zero);
    top.max(T::zero()).sqrt()
}

/// Schatten 1-norm. Hermitian inputs go through the eigenvalue route.
pub fn trace_norm<T: Real>(m: &CMat<T>) -> T {
    if m.is_square() && hermiticity_error(m) <= T::lit(1e-12) * (T::one() + max_abs(m)) {
        eigvalsh(&hermitian_part(m)).into_iter().fold(T::zero(), |acc, x| acc + x.abs())
    } else {
        singular_values(m).into_iter().fold(T::zero(), |acc, x| acc + x)
    }
}

pub fn max_abs<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

pub fn max_abs_diff<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    max_abs(&(a - b))
}

pub fn hermiticity_error<T: Real>(m: &CMat<T>) -> T {
    if !m.is_square() {
        return T::max_value().unwrap_or_else(T::one);
    }
    max_abs(&(m - m.adjoint()))
}

pub fn hermitian_part<T: Real>(m: &CMat<T>) -> CMat<T> {
    (m + m.adjoint()) * cr(T::lit(0.5))
}

pub fn unitarity_error<T: Real>(m: &CMat<T>) -> T {
    if !m.is_square() {
        return T::max_value().unwrap_or_else(T::one);
    }
    max_abs(&(m.adjoint() * m - CMat::identity(m.nrows(), m.ncols())))
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function<T: Real>(m: &CMat<T>, f: impl Fn(T) -> T) -> CMat<T> {
    let (vals, vecs) = eigh(m);
    let diag = CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.into_iter().map(|x| cr(f(x)))));
    &vecs * diag * vecs.adjoint()
}

/// Square root of a positive semidefinite matrix (negative round-off clamped).
pub fn psd_sqrt<T: Real>(m: &CMat<T>) -> CMat<T> {
    hermitian_function(&hermitian_part(m), |x| x.max(T::zero()).sqrt())
}

/// Unitary factor `Q` of the polar decomposition `m = Q P`.
///
/// On the numerical kernel the factor is completed by the polar factor of
/// the overlap between the left and right null spaces, so that a positive
/// semidefinite `m` always yields the identity. The flag reports whether a
/// completion was needed.
pub fn polar_factor<T: Real>(m: &CMat<T>) -> (CMat<T>, bool) {
    let d = m.nrows();
    assert!(m.is_square(), "polar factor needs a square matrix");
    if d == 0 {
        return (CMat::zeros(0, 0), false);
    }
    let (u, s, v_t) = svd(m);
    let v = v_t.adjoint();
    let cutoff = T::lit(1e-12) * s[0].max(T::lit(1e-300));
    let rank = s.iter().filter(|&&x| x > cutoff).count();
    let mut q = u.columns(0, rank) * v.columns(0, rank).adjoint();
    if rank < d {
        let w0 = u.columns(rank, d - rank).into_owned();
        let v0 = v.columns(rank, d - rank).into_owned();
        let overlap = w0.adjoint() * &v0;
        let (a, _, b_t) = svd(&overlap);
        q += &w0 * (a * b_t) * v0.adjoint();
    }
    (q, rank < d)
}

/// Orthonormal basis (as columns) whose first column is the unit vector `a`.
pub fn basis_with_first<T: Real>(a: &CVec<T>) -> CMat<T> {
    let d = a.len();
    let mut cols: Vec<CVec<T>> = Vec::with_capacity(d);
    cols.push(a.normalize());
    for e in 0..d {
        if cols.len() == d {
            break;
        }
        let mut v = CVec::<T>::zeros(d);
        v[e] = cr(T::one());
        // twice is enough
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let n = v.norm();
        if n > T::lit(1e-6) {
            cols.push(v / cr(n));
        }
    }
    CMat::from_columns(&cols)
}

/// Deterministic unitary with `V a = b` for unit vectors `a`, `b`.
pub fn unitary_mapping<T: Real>(a: &CVec<T>, b: &CVec<T>) -> Result<CMat<T>> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("cannot map a {}-vector onto a {}-vector", a.len(), b.len())));
    }
    Ok(basis_with_first(b) * basis_with_first(a).adjoint())
}

/// Multiplies `v` by a phase so that its first entry of modulus above
/// `1e-12` is real and positive.
pub fn fix_phase<T: Real>(v: &mut CVec<T>) {
    let tol = T::lit(1e-12);
    if let Some(z) = v.iter().copied().find(|z| z.modulus() > tol) {
        let ph = z.conj() / cr(z.modulus());
        *v *= ph;
    }
}

/// Inner product `⟨a|b⟩` (conjugate-linear in the first slot).
pub fn inner<T: Real>(a: &CVec<T>, b: &CVec<T>) -> C<T> {
    a.dotc(b)
}

/// Compressed sparse row matrix, used for Hamiltonians above the dense limit.
#[derive(Clone, Debug)]
pub struct Csr<T: Real> {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C<T>>,
}

impl<T: Real> Csr<T> {
    /// Builds the matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, C<T>)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<C<T>> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        Self { n, indptr, indices, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &CVec<T>) -> CVec<T> {
        let mut y = CVec::zeros(self.n);
        for r in 0..self.n {
            let mut acc = C::<T>::zero();
            for idx in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[idx] * x[self.indices[idx]];
            }
            y[r] = acc;
        }
        y
    }

    /// `Σ_c |m_rc|` for every row.
    pub fn row_abs_sums(&self) -> Vec<T> {
        (0..self.n)
            .map(|r| (self.indptr[r]..self.indptr[r + 1]).fold(T::zero(), |acc, i| acc + self.values[i].modulus()))
            .collect()
    }

    pub fn to_dense(&self) -> CMat<T> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for idx in self.indptr[r]..self.indptr[r + 1] {
                m[(r, self.indices[idx])] += self.values[idx];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn pauli_x() -> CMat<f64> {
        CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
    }

    #[test]
    fn dilation_svd_is_a_valid_factorization() {
        let mut rng = crate::random::rng(3);
        for (r, c_) in [(5, 3), (3, 5), (4, 4)] {
            let m = crate::random::ginibre::<f64, _>(r, c_, &mut rng);
            let (u, s, v_t) = dilation_svd(&m);
            assert!(svd_is_consistent(&m, &u, &s, &v_t));
            let reference = singular_values(&m);
            for (a, b) in s.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        // rank one with a large kernel
        let a = crate::random::pure_vector::<f64, _>(6, &mut rng);
        let b = crate::random::pure_vector::<f64, _>(6, &mut rng);
        let m = &a * b.adjoint();
        let (u, s, v_t) = dilation_svd(&m);
        assert!(svd_is_consistent(&m, &u, &s, &v_t));
        assert!((s[0] - 1.0).abs() < 1e-12 && s[1] == 0.0);
    }

    #[test]
    fn inconsistent_factorization_is_detected() {
        let m = pauli_x();
        let id = identity::<f64>(2);
        assert!(!svd_is_consistent(&m, &id, &[1.0, 1.0], &id));
        assert!(svd_is_consistent(&m, &id, &[1.0, 1.0], &m));
    }

    #[test]
    fn split_reorders_digits() {
        // dims (2,3,2); keep site 1
        let s = Split::new(&[2, 3, 2], &[1]).unwrap();
        assert_eq!(s.keep_dim(), 3);
        assert_eq!(s.rest_dim(), 4);
        // |a b c⟩ has full index a*6 + b*2 + c; kept b, rest (a,c) -> a*2 + c
        for a in 0..2 {
            for b in 0..3 {
                for cc in 0..2 {
                    assert_eq!(s.index(b, a * 2 + cc), a * 6 + b * 2 + cc);
                }
            }
        }
    }

    #[test]
    fn split_rejects_unsorted_positions() {
        assert!(Split::new(&[2, 2, 2], &[2, 0]).is_err());
        assert!(Split::new(&[2, 2], &[3]).is_err());
    }

    #[test]
    fn embed_matches_kron() {
        let x = pauli_x();
        let s = Split::new(&[2, 2], &[0]).unwrap();
        assert!(max_abs_diff(&s.embed(&x), &kron(&x, &identity(2))) < 1e-15);
        let s = Split::new(&[2, 2], &[1]).unwrap();
        assert!(max_abs_diff(&s.embed(&x), &kron(&identity(2), &x)) < 1e-15);
    }

    #[test]
    fn polar_of_psd_is_identity() {
        let a = CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(0.0)]);
        let (q, deficient) = polar_factor(&a);
        assert!(deficient);
        assert!(max_abs_diff(&q, &identity(2)) < 1e-12);
    }

    #[test]
    fn polar_factor_is_unitary() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.5, 0.0), c(-1.0, 0.3), c(0.0, 1.0)]);
        let (q, deficient) = polar_factor(&m);
        assert!(!deficient);
        assert!(unitarity_error(&q) < 1e-12);
        let p = q.adjoint() * &m;
        assert!(hermiticity_error(&p) < 1e-12);
        assert!(eigvalsh(&p).iter().all(|&x| x > 0.0));
    }

    #[test]
    fn unitary_mapping_sends_a_to_b() {
        let a = CVec::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8), cr(0.0)]);
        let b = CVec::from_vec(vec![cr(0.0), cr(0.0), c(0.0, 1.0)]);
        let v = unitary_mapping(&a, &b).unwrap();
        assert!(unitarity_error(&v) < 1e-12);
        assert!((&v * &a - &b).norm() < 1e-12);
        assert!(max_abs_diff(&unitary_mapping(&a, &a).unwrap(), &identity(3)) < 1e-12);
    }

    #[test]
    fn csr_sums_duplicates() {
        let m = Csr::<f64>::from_triplets(2, vec![(0, 1, cr(1.0)), (1, 0, cr(2.0)), (0, 1, cr(0.5))]);
        assert_eq!(m.nnz(), 2);
        let y = m.matvec(&CVec::from_vec(vec![cr(1.0), cr(1.0)]));
        assert!((y[0] - cr(1.5)).modulus() < 1e-15);
        assert!((y[1] - cr(2.0)).modulus() < 1e-15);
    }

    #[test]
    fn trace_norm_routes_agree() {
        let h = CMat::from_row_slice(2, 2, &[cr(1.0), c(0.0, 1.0), c(0.0, -1.0), cr(-2.0)]);
        let via_svd: f64 = singular_values(&h).iter().sum();
        assert!((trace_norm(&h) - via_svd).abs() < 1e-12);
    }
}
