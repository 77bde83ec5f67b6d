//! Pure states, density operators and local operators on a chain.

use nalgebra::ComplexField;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Interval, Region};
use crate::linalg::{self, Split};
use crate::scalar::{cr, CMat, CVec, Real, C};

/// Per-site Hilbert-space dimensions of a chain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteSpec {
    dims: Vec<usize>,
}

impl SiteSpec {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument("a chain needs at least one site".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidArgument(format!("site dimension {d} < 2")));
        }
        Ok(Self { dims })
    }

    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn qubits(n: usize) -> Self {
        Self::uniform(n, 2).expect("n ≥ 1 qubits")
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, site: usize) -> usize {
        self.dims[site]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn dim_of(&self, sites: &[usize]) -> usize {
        sites.iter().map(|&s| self.dims[s]).product()
    }

    /// The sub-chain on an interval, re-indexed from 0.
    pub fn slice(&self, interval: &Interval) -> Result<SiteSpec> {
        let (lo, hi) = interval
            .bounds()
            .ok_or_else(|| Error::InvalidArgument("cannot slice a chain to the empty interval".into()))?;
        SiteSpec::new(self.dims[lo..=hi].to_vec())
    }

    pub fn split(&self, keep: &[usize]) -> Result<Split> {
        if let Some(&s) = keep.iter().find(|&&s| s >= self.len()) {
            return Err(Error::Dimension(format!("site {s} outside a chain of {} sites", self.len())));
        }
        Split::new(&self.dims, keep)
    }
}

/// Normalized state vector on a chain.
#[derive(Clone, Debug)]
pub struct PureState<T: Real> {
    amplitudes: CVec<T>,
    sites: SiteSpec,
}

impl<T: Real> PureState<T> {
    /// Wraps a vector that must already have unit norm (to 1e-10).
    pub fn new(amplitudes: CVec<T>, sites: SiteSpec) -> Result<Self> {
        if amplitudes.len() != sites.total_dim() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a space of dimension {}",
                amplitudes.len(),
                sites.total_dim()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - T::one()).abs() > T::lit(1e-10) {
            return Err(Error::InvalidArgument(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes, sites })
    }

    /// Normalizes the vector first; fails on a zero vector.
    pub fn normalized(amplitudes: CVec<T>, sites: SiteSpec) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm <= T::lit(1e-300) {
            return Err(Error::InvalidArgument("cannot normalize the zero vector".into()));
        }
        Self::new(amplitudes / cr(norm), sites)
    }

    pub fn basis(sites: SiteSpec, index: usize) -> Result<Self> {
        let mut v = CVec::zeros(sites.total_dim());
        if index >= v.len() {
            return Err(Error::Dimension(format!("basis index {index} out of range")));
        }
        v[index] = cr(T::one());
        Self::new(v, sites)
    }

    /// Tensor product of single-site (or block) vectors, left to right.
    pub fn product(factors: &[CVec<T>]) -> Result<Self> {
        let dims: Vec<usize> = factors.iter().map(|f| f.len()).collect();
        let mut v = CVec::from_element(1, cr(T::one()));
        for f in factors {
            v = v.kronecker(&f.normalize());
        }
        Self::new(v, SiteSpec::new(dims)?)
    }

    /// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
    pub fn ghz(n: usize) -> Result<Self> {
        let sites = SiteSpec::uniform(n, 2)?;
        let mut v = CVec::zeros(sites.total_dim());
        let a = cr(T::lit(std::f64::consts::FRAC_1_SQRT_2));
        v[0] = a;
        let last = v.len() - 1;
        v[last] = a;
        Self::new(v, sites)
    }

    pub fn amplitudes(&self) -> &CVec<T> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVec<T> {
        self.amplitudes
    }

    pub fn sites(&self) -> &SiteSpec {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn inner(&self, other: &PureState<T>) -> C<T> {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &PureState<T>) -> T {
        self.inner(other).modulus()
    }

    /// `|self⟩ ⊗ |other⟩` with `other`'s sites appended on the right.
    pub fn tensor(&self, other: &PureState<T>) -> PureState<T> {
        let mut dims = self.sites.dims().to_vec();
        dims.extend_from_slice(other.sites.dims());
        PureState {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            sites: SiteSpec { dims },
        }
    }

    /// Applies a local operator; the result is not renormalized.
    pub fn apply(&self, op: &LocalOperator<T>) -> Result<CVec<T>> {
        let split = self.sites.split(op.sites())?;
        if split.keep_dim() != op.matrix().nrows() {
            return Err(Error::Dimension("operator does not match its support".into()));
        }
        Ok(split.apply(op.matrix(), &self.amplitudes))
    }

    /// Applies a unitary and keeps the result as a state.
    pub fn evolve(&self, unitary: &LocalOperator<T>) -> Result<PureState<T>> {
        PureState::normalized(self.apply(unitary)?, self.sites.clone())
    }

    pub fn expectation(&self, op: &LocalOperator<T>) -> Result<C<T>> {
        Ok(self.amplitudes.dotc(&self.apply(op)?))
    }

    pub fn density(&self) -> DensityOperator<T> {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator {
            matrix: m,
            sites: (0..self.len()).collect(),
            dims: self.sites.dims().to_vec(),
            chain_len: self.len(),
        }
    }

    /// Reduced density operator on `sites` (partial trace over the rest).
    pub fn restrict_sites(&self, sites: &[usize]) -> Result<DensityOperator<T>> {
        let split = self.sites.split(sites)?;
        Ok(DensityOperator {
            matrix: split.reduce_pure(&self.amplitudes),
            sites: sites.to_vec(),
            dims: sites.iter().map(|&s| self.sites.dim(s)).collect(),
            chain_len: self.len(),
        })
    }

    pub fn restrict(&self, region: &Region) -> Result<DensityOperator<T>> {
        if region.chain_len() != self.len() {
            return Err(Error::Dimension("region and state live on different chains".into()));
        }
        self.restrict_sites(&region.sites())
    }

    /// Coefficient matrix for the bipartition `sites | rest`.
    pub fn matricize(&self, sites: &[usize]) -> Result<CMat<T>> {
        Ok(self.sites.split(sites)?.matricize(&self.amplitudes))
    }
}

/// Positive unit-trace operator on a subset of chain sites.
#[derive(Clone, Debug)]
pub struct DensityOperator<T: Real> {
    matrix: CMat<T>,
    sites: Vec<usize>,
    dims: Vec<usize>,
    chain_len: usize,
}

impl<T: Real> DensityOperator<T> {
    /// Validates Hermiticity, unit trace and positivity (to 1e-10).
    pub fn new(matrix: CMat<T>, sites: Vec<usize>, dims: Vec<usize>, chain_len: usize) -> Result<Self> {
        let rho = Self::unchecked(matrix, sites, dims, chain_len)?;
        rho.validate(T::lit(1e-10))?;
        Ok(rho)
    }

    /// Shape checks only; used for operators known positive by construction.
    pub fn unchecked(matrix: CMat<T>, sites: Vec<usize>, dims: Vec<usize>, chain_len: usize) -> Result<Self> {
        if sites.len() != dims.len() || sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("density operator sites must be sorted and match dims".into()));
        }
        if sites.last().is_some_and(|&s| s >= chain_len) {
            return Err(Error::Dimension("density operator site outside the chain".into()));
        }
        let d: usize = dims.iter().product();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension(format!("matrix is {}x{}, sites need {d}", matrix.nrows(), matrix.ncols())));
        }
        Ok(Self { matrix, sites, dims, chain_len })
    }

    /// Density operator on a whole chain (all sites).
    pub fn on_chain(matrix: CMat<T>, sites: &SiteSpec) -> Result<Self> {
        Self::new(matrix, (0..sites.len()).collect(), sites.dims().to_vec(), sites.len())
    }

    /// Pure density operator `|v⟩⟨v|` of a unit vector on the given sites.
    pub fn pure_on(vector: &CVec<T>, sites: Vec<usize>, dims: Vec<usize>, chain_len: usize) -> Result<Self> {
        let m = vector * vector.adjoint();
        Self::unchecked(m, sites, dims, chain_len)
    }

    pub fn validate(&self, tol: T) -> Result<()> {
        let herm = linalg::hermiticity_error(&self.matrix);
        if herm > tol {
            return Err(Error::NotHermitian(herm.as_f64()));
        }
        let tr = self.matrix.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidArgument(format!("trace {} + {}i differs from 1", tr.re, tr.im)));
        }
        let min = linalg::eigvalsh(&self.matrix).first().copied().unwrap_or_else(T::zero);
        if min < -tol {
            return Err(Error::InvalidArgument(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat<T> {
        self.matrix
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn chain_len(&self) -> usize {
        self.chain_len
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn support(&self) -> Region {
        Region::from_sites(self.chain_len, &self.sites).expect("sites inside chain")
    }

    pub fn trace(&self) -> C<T> {
        self.matrix.trace()
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        linalg::eigvalsh(&self.matrix)
    }

    /// Partial trace down to `keep` (a subset of this operator's sites).
    pub fn restrict_sites(&self, keep: &[usize]) -> Result<DensityOperator<T>> {
        let positions = keep
            .iter()
            .map(|s| {
                self.sites
                    .binary_search(s)
                    .map_err(|_| Error::InvalidArgument(format!("site {s} is not in the operator's support")))
            })
            .collect::<Result<Vec<_>>>()?;
        let split = Split::new(&self.dims, &positions)?;
        Ok(DensityOperator {
            matrix: split.partial_trace(&self.matrix),
            sites: keep.to_vec(),
            dims: positions.iter().map(|&p| self.dims[p]).collect(),
            chain_len: self.chain_len,
        })
    }

    pub fn restrict(&self, region: &Region) -> Result<DensityOperator<T>> {
        self.restrict_sites(&region.sites())
    }

    /// `self ⊗ other` on the (disjoint) union of supports, sites sorted.
    pub fn tensor(&self, other: &DensityOperator<T>) -> Result<DensityOperator<T>> {
        if self.chain_len != other.chain_len {
            return Err(Error::Dimension("density operators live on different chains".into()));
        }
        if self.sites.iter().any(|s| other.sites.contains(s)) {
            return Err(Error::InvalidArgument("tensor product needs disjoint supports".into()));
        }
        let raw = self.matrix.kronecker(&other.matrix);
        let mut joint: Vec<(usize, usize)> = self
            .sites
            .iter()
            .zip(&self.dims)
            .chain(other.sites.iter().zip(&other.dims))
            .map(|(&s, &d)| (s, d))
            .collect();
        let raw_dims: Vec<usize> = joint.iter().map(|p| p.1).collect();
        joint.sort_unstable();
        let sites: Vec<usize> = joint.iter().map(|p| p.0).collect();
        let dims: Vec<usize> = joint.iter().map(|p| p.1).collect();
        let order: Vec<usize> = sites
            .iter()
            .map(|s| self.sites.iter().chain(&other.sites).position(|t| t == s).expect("site present"))
            .collect();
        let matrix = if order.iter().enumerate().all(|(i, &p)| i == p) {
            raw
        } else {
            let perm = permutation(&raw_dims, &order);
            CMat::from_fn(raw.nrows(), raw.ncols(), |r, c| raw[(perm[r], perm[c])])
        };
        Ok(DensityOperator { matrix, sites, dims, chain_len: self.chain_len })
    }

    /// `⟨A⟩ = Tr(ρ A)` for `A` supported inside this operator's sites.
    pub fn expectation(&self, op: &LocalOperator<T>) -> Result<C<T>> {
        let positions = op
            .sites()
            .iter()
            .map(|s| {
                self.sites
                    .binary_search(s)
                    .map_err(|_| Error::InvalidArgument(format!("site {s} is not in the operator's support")))
            })
            .collect::<Result<Vec<_>>>()?;
        let split = Split::new(&self.dims, &positions)?;
        Ok((&self.matrix * split.embed(op.matrix())).trace())
    }
}

/// For a tensor whose factor `i` has dimension `raw_dims[i]`, returns the map
/// from an index in the permuted order (factor `order[j]` at slot `j`) to
/// the raw index.
fn permutation(raw_dims: &[usize], order: &[usize]) -> Vec<usize> {
    let total: usize = raw_dims.iter().product();
    let new_dims: Vec<usize> = order.iter().map(|&i| raw_dims[i]).collect();
    let mut raw_strides = vec![1usize; raw_dims.len()];
    for i in (0..raw_dims.len().saturating_sub(1)).rev() {
        raw_strides[i] = raw_strides[i + 1] * raw_dims[i + 1];
    }
    let mut out = vec![0usize; total];
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut rem = idx;
        let mut raw = 0;
        for j in (0..new_dims.len()).rev() {
            let digit = rem % new_dims[j];
            rem /= new_dims[j];
            raw += digit * raw_strides[order[j]];
        }
        *slot = raw;
    }
    out
}

/// Operator acting on a sorted list of chain sites.
#[derive(Clone, Debug)]
pub struct LocalOperator<T: Real> {
    sites: Vec<usize>,
    matrix: CMat<T>,
}

impl<T: Real> LocalOperator<T> {
    pub fn new(sites: Vec<usize>, matrix: CMat<T>) -> Result<Self> {
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("operator sites must be strictly increasing".into()));
        }
        if !matrix.is_square() {
            return Err(Error::Dimension("operator matrix must be square".into()));
        }
        Ok(Self { sites, matrix })
    }

    /// Checks the matrix size against the chain's site dimensions.
    pub fn checked(sites: Vec<usize>, matrix: CMat<T>, chain: &SiteSpec) -> Result<Self> {
        if let Some(&s) = sites.iter().find(|&&s| s >= chain.len()) {
            return Err(Error::Dimension(format!("site {s} outside a chain of {} sites", chain.len())));
        }
        let d = chain.dim_of(&sites);
        if matrix.nrows() != d {
            return Err(Error::Dimension(format!("{}x{} matrix on sites of total dimension {d}", matrix.nrows(), matrix.ncols())));
        }
        Self::new(sites, matrix)
    }

    pub fn on_interval(interval: &Interval, matrix: CMat<T>) -> Result<Self> {
        Self::new(interval.sites(), matrix)
    }

    pub fn single(site: usize, matrix: CMat<T>) -> Self {
        Self { sites: vec![site], matrix }
    }

    /// The scalar `1` (empty support).
    pub fn scalar(value: C<T>) -> Self {
        Self { sites: Vec::new(), matrix: CMat::from_element(1, 1, value) }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat<T> {
        self.matrix
    }

    pub fn support(&self, chain_len: usize) -> Region {
        Region::from_sites(chain_len, &self.sites).expect("sites inside chain")
    }

    /// Interval hull of the support (`None` for scalars).
    pub fn hull(&self) -> Option<(usize, usize)> {
        Some((*self.sites.first()?, *self.sites.last()?))
    }

    /// `self ⊗ 1` on a larger sorted site set containing this support.
    pub fn embed_into(&self, target: &[usize], chain: &SiteSpec) -> Result<LocalOperator<T>> {
        if target == self.sites.as_slice() {
            return Ok(self.clone());
        }
        let positions = self
            .sites
            .iter()
            .map(|s| {
                target
                    .binary_search(s)
                    .map_err(|_| Error::InvalidArgument(format!("site {s} missing from embedding target")))
            })
            .collect::<Result<Vec<_>>>()?;
        let dims: Vec<usize> = target.iter().map(|&s| chain.dim(s)).collect();
        let split = Split::new(&dims, &positions)?;
        LocalOperator::new(target.to_vec(), split.embed(&self.matrix))
    }

    pub fn adjoint(&self) -> LocalOperator<T> {
        LocalOperator { sites: self.sites.clone(), matrix: self.matrix.adjoint() }
    }

    /// Product `self · other`, embedded on the union of supports.
    pub fn compose(&self, other: &LocalOperator<T>, chain: &SiteSpec) -> Result<LocalOperator<T>> {
        let union = union_sites(&self.sites, &other.sites);
        let a = self.embed_into(&union, chain)?;
        let b = other.embed_into(&union, chain)?;
        LocalOperator::new(union, a.matrix * b.matrix)
    }

    /// `self - other` on the union of supports.
    pub fn sub(&self, other: &LocalOperator<T>, chain: &SiteSpec) -> Result<LocalOperator<T>> {
        let union = union_sites(&self.sites, &other.sites);
        let a = self.embed_into(&union, chain)?;
        let b = other.embed_into(&union, chain)?;
        LocalOperator::new(union, a.matrix - b.matrix)
    }

    /// Commutator `[self, other]` on the union of supports.
    pub fn commutator(&self, other: &LocalOperator<T>, chain: &SiteSpec) -> Result<LocalOperator<T>> {
        let union = union_sites(&self.sites, &other.sites);
        let a = self.embed_into(&union, chain)?;
        let b = other.embed_into(&union, chain)?;
        LocalOperator::new(union, &a.matrix * &b.matrix - &b.matrix * &a.matrix)
    }

    /// `U† A U` (Heisenberg picture of `A = self` under the unitary `u`).
    pub fn conjugate_by(&self, u: &LocalOperator<T>, chain: &SiteSpec) -> Result<LocalOperator<T>> {
        let union = union_sites(&self.sites, &u.sites);
        let a = self.embed_into(&union, chain)?;
        let uu = u.embed_into(&union, chain)?;
        LocalOperator::new(union, uu.matrix.adjoint() * a.matrix * uu.matrix)
    }

    pub fn norm(&self) -> T {
        linalg::spectral_norm(&self.matrix)
    }

    /// Spectral norm of `self - other` on the union of supports.
    pub fn distance(&self, other: &LocalOperator<T>, chain: &SiteSpec) -> Result<T> {
        Ok(self.sub(other, chain)?.norm())
    }
}

/// Sorted union of two sorted site lists.
pub fn union_sites(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn ket0() -> CVec<f64> {
        CVec::from_vec(vec![cr(1.0), cr(0.0)])
    }

    fn ket1() -> CVec<f64> {
        CVec::from_vec(vec![cr(0.0), cr(1.0)])
    }

    fn bell() -> PureState<f64> {
        let a = cr(std::f64::consts::FRAC_1_SQRT_2);
        PureState::new(CVec::from_vec(vec![a, cr(0.0), cr(0.0), a]), SiteSpec::qubits(2)).unwrap()
    }

    #[test]
    fn restrict_product_and_bell() {
        let psi = PureState::product(&[ket0(), ket0()]).unwrap();
        let r = psi.restrict_sites(&[0]).unwrap();
        assert!(linalg::max_abs_diff(r.matrix(), &(ket0() * ket0().adjoint())) < 1e-15);

        let r = bell().restrict_sites(&[0]).unwrap();
        assert!(linalg::max_abs_diff(r.matrix(), &(linalg::identity::<f64>(2) * cr(0.5))) < 1e-15);
    }

    #[test]
    fn restrict_to_nothing_is_scalar_one() {
        let r = bell().restrict_sites(&[]).unwrap();
        assert_eq!(r.dim(), 1);
        assert!((r.matrix()[(0, 0)] - cr(1.0)).modulus() < 1e-15);
    }

    #[test]
    fn tensor_reorders_interleaved_sites() {
        // |0⟩ on site 1, |1⟩ on sites 0 and 2 → |1 0 1⟩
        let a = DensityOperator::pure_on(&ket0(), vec![1], vec![2], 3).unwrap();
        let b = DensityOperator::pure_on(&ket1().kronecker(&ket1()), vec![0, 2], vec![2, 2], 3).unwrap();
        let t = a.tensor(&b).unwrap();
        assert_eq!(t.sites(), &[0, 1, 2]);
        let expected = PureState::product(&[ket1(), ket0(), ket1()]).unwrap().density();
        assert!(linalg::max_abs_diff(t.matrix(), expected.matrix()) < 1e-15);
    }

    #[test]
    fn tensor_rejects_overlap() {
        let a = DensityOperator::pure_on(&ket0(), vec![1], vec![2], 3).unwrap();
        assert!(a.tensor(&a).is_err());
    }

    #[test]
    fn new_rejects_unnormalized() {
        let v = CVec::from_vec(vec![cr(1.0), cr(1.0)]);
        assert!(PureState::new(v.clone(), SiteSpec::qubits(1)).is_err());
        assert!(PureState::normalized(v, SiteSpec::qubits(1)).is_ok());
    }

    #[test]
    fn density_validation() {
        let bad = CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(1.0)]);
        assert!(DensityOperator::new(bad, vec![0], vec![2], 1).is_err());
        let nonherm = CMat::from_row_slice(2, 2, &[cr(0.5), c(0.0, 0.1), c(0.0, 0.1), cr(0.5)]);
        assert!(matches!(DensityOperator::new(nonherm, vec![0], vec![2], 1), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn local_operator_expectation_and_embedding() {
        let chain = SiteSpec::qubits(3);
        let z = CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]);
        let psi = PureState::product(&[ket0(), ket1(), ket0()]).unwrap();
        let z1 = LocalOperator::single(1, z.clone());
        assert!((psi.expectation(&z1).unwrap() - cr(-1.0)).modulus() < 1e-15);
        let big = z1.embed_into(&[0, 1, 2], &chain).unwrap();
        assert!((psi.expectation(&big).unwrap() - cr(-1.0)).modulus() < 1e-15);
        let rho = psi.density();
        assert!((rho.expectation(&z1).unwrap() - cr(-1.0)).modulus() < 1e-15);
    }

    #[test]
    fn commutator_of_disjoint_supports_vanishes() {
        let chain = SiteSpec::qubits(3);
        let x = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]);
        let a = LocalOperator::single(0, x.clone());
        let b = LocalOperator::single(2, x);
        assert!(a.commutator(&b, &chain).unwrap().norm() < 1e-15);
    }
}
