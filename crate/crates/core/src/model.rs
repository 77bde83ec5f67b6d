//! Finite-range interactions, Hamiltonian assembly and model presets.

use std::collections::BTreeMap;

use nalgebra::ComplexField;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Csr, Split};
use crate::scalar::{c, cr, CMat, CVec, Real, C};
use crate::state::{union_sites, LocalOperator, SiteSpec};

/// Total dimension up to which Hamiltonians are assembled densely.
pub const DENSE_LIMIT: usize = 1024;

/// Single-site operators.
pub mod ops {
    use super::*;

    pub fn pauli_x<T: Real>() -> CMat<T> {
        CMat::from_row_slice(2, 2, &[cr(T::zero()), cr(T::one()), cr(T::one()), cr(T::zero())])
    }

    pub fn pauli_y<T: Real>() -> CMat<T> {
        let z = cr(T::zero());
        CMat::from_row_slice(2, 2, &[z, c(T::zero(), -T::one()), c(T::zero(), T::one()), z])
    }

    pub fn pauli_z<T: Real>() -> CMat<T> {
        CMat::from_row_slice(2, 2, &[cr(T::one()), cr(T::zero()), cr(T::zero()), cr(-T::one())])
    }

    /// Spin-1 matrices `(S^x, S^y, S^z)` in the basis `m = +1, 0, −1`.
    pub fn spin1<T: Real>() -> [CMat<T>; 3] {
        let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        let z = cr(T::zero());
        let sx = CMat::from_row_slice(3, 3, &[z, cr(s), z, cr(s), z, cr(s), z, cr(s), z]);
        let sy = CMat::from_row_slice(
            3,
            3,
            &[z, c(T::zero(), -s), z, c(T::zero(), s), z, c(T::zero(), -s), z, c(T::zero(), s), z],
        );
        let sz = CMat::from_diagonal(&CVec::from_vec(vec![cr(T::one()), z, cr(-T::one())]));
        [sx, sy, sz]
    }

    /// `|+⟩ = (|0⟩ + |1⟩)/√2`.
    pub fn ket_plus<T: Real>() -> CVec<T> {
        let a = cr(T::lit(std::f64::consts::FRAC_1_SQRT_2));
        CVec::from_vec(vec![a, a])
    }

    pub fn ket0<T: Real>() -> CVec<T> {
        CVec::from_vec(vec![cr(T::one()), cr(T::zero())])
    }
}

/// One Hermitian term `Φ_I` on a sorted list of sites.
#[derive(Clone, Debug)]
pub struct InteractionTerm<T: Real> {
    op: LocalOperator<T>,
}

impl<T: Real> InteractionTerm<T> {
    pub fn new(sites: Vec<usize>, matrix: CMat<T>, chain: &SiteSpec) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidArgument("interaction term needs a nonempty support".into()));
        }
        let herm = linalg::hermiticity_error(&matrix);
        if herm > T::lit(1e-12) {
            return Err(Error::NotHermitian(herm.as_f64()));
        }
        Ok(Self { op: LocalOperator::checked(sites, matrix, chain)? })
    }

    pub fn sites(&self) -> &[usize] {
        self.op.sites()
    }

    pub fn matrix(&self) -> &CMat<T> {
        self.op.matrix()
    }

    pub fn operator(&self) -> &LocalOperator<T> {
        &self.op
    }

    pub fn norm(&self) -> T {
        self.op.norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Constants `(C, c)` with `‖Φ_I‖ ≤ C e^{−c|I|}` for every term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayConstants {
    pub prefactor: f64,
    pub rate: f64,
}

/// A collection of terms on a fixed chain.
#[derive(Clone, Debug)]
pub struct Interaction<T: Real> {
    chain: SiteSpec,
    terms: Vec<InteractionTerm<T>>,
    boundary: Boundary,
    declared_range: Option<usize>,
    decay: Option<DecayConstants>,
}

impl<T: Real> Interaction<T> {
    pub fn new(chain: SiteSpec, boundary: Boundary) -> Self {
        Self { chain, terms: Vec::new(), boundary, declared_range: None, decay: None }
    }

    /// Declares a finite range; fails if an existing term is wider.
    pub fn with_range(mut self, range: usize) -> Result<Self> {
        self.declared_range = Some(range);
        for t in &self.terms {
            self.check_range(t)?;
        }
        Ok(self)
    }

    /// Declares decay constants; fails if a term violates them.
    pub fn with_decay(mut self, decay: DecayConstants) -> Result<Self> {
        self.decay = Some(decay);
        let excess = self.decay_certificate().unwrap_or(0.0);
        if excess > decay.prefactor * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "max ‖Φ_I‖ e^(c|I|) = {excess} exceeds declared prefactor {}",
                decay.prefactor
            )));
        }
        Ok(self)
    }

    pub fn push(&mut self, sites: Vec<usize>, matrix: CMat<T>) -> Result<()> {
        let term = InteractionTerm::new(sites, matrix, &self.chain)?;
        self.check_range(&term)?;
        self.terms.push(term);
        Ok(())
    }

    fn check_range(&self, term: &InteractionTerm<T>) -> Result<()> {
        if let Some(r) = self.declared_range {
            let d = self.diameter(term.sites());
            if d > r {
                return Err(Error::InvalidArgument(format!("term of diameter {d} exceeds declared range {r}")));
            }
        }
        Ok(())
    }

    /// `|I|` for a support: the interval hull length, measured around the
    /// ring on periodic chains.
    pub fn diameter(&self, sites: &[usize]) -> usize {
        let (Some(&lo), Some(&hi)) = (sites.first(), sites.last()) else {
            return 0;
        };
        let linear = hi - lo + 1;
        match self.boundary {
            Boundary::Open => linear,
            Boundary::Periodic => {
                let n = self.chain.len();
                let wrap_gap = lo + n - hi;
                let max_gap = sites.windows(2).map(|w| w[1] - w[0]).chain([wrap_gap]).max().unwrap_or(n);
                n + 1 - max_gap
            }
        }
    }

    pub fn chain(&self) -> &SiteSpec {
        &self.chain
    }

    pub fn terms(&self) -> &[InteractionTerm<T>] {
        &self.terms
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn declared_range(&self) -> Option<usize> {
        self.declared_range
    }

    pub fn decay(&self) -> Option<DecayConstants> {
        self.decay
    }

    /// `max_I ‖Φ_I‖ e^{c|I|}` for the stored rate `c`.
    pub fn decay_certificate(&self) -> Option<f64> {
        let rate = self.decay?.rate;
        Some(
            self.terms
                .iter()
                .map(|t| t.norm().as_f64() * (rate * self.diameter(t.sites()) as f64).exp())
                .fold(0.0, f64::max),
        )
    }

    /// `Σ_I ‖Φ_I‖`, an upper bound on `‖H‖`.
    pub fn norm_bound(&self) -> T {
        self.terms.iter().fold(T::zero(), |acc, t| acc + t.norm())
    }

    /// Sets decay constants with rate `c = 1` and the tightest prefactor.
    fn certify(mut self) -> Self {
        self.decay = Some(DecayConstants { prefactor: 0.0, rate: 1.0 });
        let prefactor = self.decay_certificate().unwrap_or(0.0);
        self.decay = Some(DecayConstants { prefactor, rate: 1.0 });
        self
    }
}

/// Transverse-field Ising chain `Σ −Z_x Z_{x+1} − g Σ X_x`.
pub fn preset_tfim<T: Real>(n: usize, g: T, boundary: Boundary) -> Result<Interaction<T>> {
    if n == 0 || g < T::zero() {
        return Err(Error::InvalidArgument("tfim needs N ≥ 1 and g ≥ 0".into()));
    }
    let chain = SiteSpec::qubits(n);
    let zz = -linalg::kron(&ops::pauli_z::<T>(), &ops::pauli_z());
    let mut h = Interaction::new(chain, boundary);
    for x in 0..n.saturating_sub(1) {
        h.push(vec![x, x + 1], zz.clone())?;
    }
    // on two sites the wrap bond would duplicate the open bond
    if boundary == Boundary::Periodic && n >= 3 {
        h.push(vec![0, n - 1], zz.clone())?;
    }
    if g > T::zero() {
        let field = ops::pauli_x::<T>() * cr(-g);
        for x in 0..n {
            h.push(vec![x], field.clone())?;
        }
    }
    Ok(h.with_range(2)?.certify())
}

/// Default strength of the AKLT edge-pinning fields.
pub const AKLT_PINNING: f64 = 1.0;

/// Spin-1 AKLT chain `Σ S_x·S_{x+1} + (1/3)(S_x·S_{x+1})²`, optionally with
/// fields `−h S^z` on both end sites that select one of the four edge states.
pub fn preset_aklt<T: Real>(n: usize, pinning: bool) -> Result<Interaction<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument("aklt needs N ≥ 2".into()));
    }
    let chain = SiteSpec::uniform(n, 3)?;
    let [sx, sy, sz] = ops::spin1::<T>();
    let dot = linalg::kron(&sx, &sx) + linalg::kron(&sy, &sy) + linalg::kron(&sz, &sz);
    let bond = &dot + &dot * &dot * cr(T::lit(1.0 / 3.0));
    let bond = linalg::hermitian_part(&bond);
    let mut h = Interaction::new(chain, Boundary::Open);
    for x in 0..n - 1 {
        h.push(vec![x, x + 1], bond.clone())?;
    }
    if pinning {
        let field = &sz * cr(-T::lit(AKLT_PINNING));
        h.push(vec![0], field.clone())?;
        h.push(vec![n - 1], field)?;
    }
    Ok(h.with_range(2)?.certify())
}

/// Uncoupled fields `Σ −Z_x`; ground state all-|0⟩, gap 2.
pub fn preset_product<T: Real>(n: usize) -> Result<Interaction<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("product model needs N ≥ 1".into()));
    }
    let mut h = Interaction::new(SiteSpec::qubits(n), Boundary::Open);
    for x in 0..n {
        h.push(vec![x], -ops::pauli_z::<T>())?;
    }
    Ok(h.with_range(1)?.certify())
}

/// Assembled Hamiltonian.
#[derive(Clone, Debug)]
pub enum Hamiltonian<T: Real> {
    Dense(CMat<T>),
    Sparse(Csr<T>),
}

impl<T: Real> Hamiltonian<T> {
    pub fn dim(&self) -> usize {
        match self {
            Hamiltonian::Dense(m) => m.nrows(),
            Hamiltonian::Sparse(s) => s.dim(),
        }
    }

    pub fn matvec(&self, v: &CVec<T>) -> CVec<T> {
        match self {
            Hamiltonian::Dense(m) => m * v,
            Hamiltonian::Sparse(s) => s.matvec(v),
        }
    }

    pub fn to_dense(&self) -> CMat<T> {
        match self {
            Hamiltonian::Dense(m) => m.clone(),
            Hamiltonian::Sparse(s) => s.to_dense(),
        }
    }

    pub fn expectation(&self, v: &CVec<T>) -> T {
        v.dotc(&self.matvec(v)).re
    }
}

/// `H = Σ_I Φ_I ⊗ 1`, dense up to [`DENSE_LIMIT`], sparse above.
pub fn build_hamiltonian<T: Real>(interaction: &Interaction<T>) -> Result<Hamiltonian<T>> {
    if interaction.chain().total_dim() <= DENSE_LIMIT {
        build_dense(interaction).map(Hamiltonian::Dense)
    } else {
        build_sparse(interaction).map(Hamiltonian::Sparse)
    }
}

pub fn build_dense<T: Real>(interaction: &Interaction<T>) -> Result<CMat<T>> {
    let chain = interaction.chain();
    let n = chain.total_dim();
    let mut h = CMat::zeros(n, n);
    for term in interaction.terms() {
        let split = chain.split(term.sites())?;
        let m = term.matrix();
        for k in 0..split.keep_dim() {
            for kp in 0..split.keep_dim() {
                let val = m[(k, kp)];
                if val == C::new(T::zero(), T::zero()) {
                    continue;
                }
                for r in 0..split.rest_dim() {
                    h[(split.index(k, r), split.index(kp, r))] += val;
                }
            }
        }
    }
    Ok(h)
}

pub fn build_sparse<T: Real>(interaction: &Interaction<T>) -> Result<Csr<T>> {
    let chain = interaction.chain();
    let n = chain.total_dim();
    let mut triplets = Vec::new();
    for term in interaction.terms() {
        let split: Split = chain.split(term.sites())?;
        let m = term.matrix();
        for k in 0..split.keep_dim() {
            for kp in 0..split.keep_dim() {
                let val = m[(k, kp)];
                if val.modulus() == T::zero() {
                    continue;
                }
                for r in 0..split.rest_dim() {
                    triplets.push((split.index(k, r), split.index(kp, r), val));
                }
            }
        }
    }
    Ok(Csr::from_triplets(n, triplets))
}

/// `δ_Φ(A) = Σ_{I ∩ X ≠ ∅} i[Φ_I, A]` on the union of the contributing supports.
pub fn apply_derivation<T: Real>(interaction: &Interaction<T>, a: &LocalOperator<T>) -> Result<LocalOperator<T>> {
    let chain = interaction.chain();
    let touching: Vec<&InteractionTerm<T>> = interaction
        .terms()
        .iter()
        .filter(|t| t.sites().iter().any(|s| a.sites().contains(s)))
        .collect();
    let support = touching.iter().fold(a.sites().to_vec(), |acc, t| union_sites(&acc, t.sites()));
    let d = chain.dim_of(&support);
    let mut out = LocalOperator::new(support.clone(), CMat::zeros(d, d))?;
    let i = c(T::zero(), T::one());
    for t in touching {
        let comm = t.operator().commutator(a, chain)?.embed_into(&support, chain)?;
        out = LocalOperator::new(support.clone(), out.into_matrix() + comm.into_matrix() * i)?;
    }
    Ok(out)
}

/// JSON model description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// `tfim`, `aklt`, `product` or `custom`.
    pub model: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
    #[serde(default)]
    pub pinning: bool,
    /// Site dimensions for custom models (default: qubits).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<CustomTerm>,
}

fn default_boundary() -> Boundary {
    Boundary::Open
}

/// A custom term: support sites and a row-major list of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomTerm {
    pub support: Vec<usize>,
    pub matrix: Vec<[f64; 2]>,
}

impl ModelSpec {
    pub fn build<T: Real>(&self) -> Result<Interaction<T>> {
        let param = |name: &str| {
            self.params
                .get(name)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("model '{}' needs parameter '{name}'", self.model)))
        };
        match self.model.as_str() {
            "tfim" => preset_tfim(self.n, T::lit(param("g")?), self.boundary),
            "aklt" => preset_aklt(self.n, self.pinning),
            "product" => preset_product(self.n),
            "custom" => {
                let dims = self.dims.clone().unwrap_or_else(|| vec![2; self.n]);
                if dims.len() != self.n {
                    return Err(Error::InvalidArgument(format!("{} dims for N = {}", dims.len(), self.n)));
                }
                let mut h = Interaction::new(SiteSpec::new(dims)?, self.boundary);
                for term in &self.terms {
                    let d = (term.matrix.len() as f64).sqrt().round() as usize;
                    if d * d != term.matrix.len() {
                        return Err(Error::Dimension(format!("{} matrix entries is not a square", term.matrix.len())));
                    }
                    let entries: Vec<C<T>> = term.matrix.iter().map(|[re, im]| c(T::lit(*re), T::lit(*im))).collect();
                    h.push(term.support.clone(), CMat::from_row_slice(d, d, &entries))?;
                }
                let range = h.terms().iter().map(|t| h.diameter(t.sites())).max().unwrap_or(1);
                Ok(h.with_range(range)?.certify())
            }
            other => Err(Error::InvalidArgument(format!("unknown model '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(m: &CMat<f64>) -> Vec<f64> {
        (0..m.nrows()).map(|i| m[(i, i)].re).collect()
    }

    #[test]
    fn single_zz_bond() {
        let mut h = Interaction::new(SiteSpec::qubits(2), Boundary::Open);
        h.push(vec![0, 1], -linalg::kron(&ops::pauli_z::<f64>(), &ops::pauli_z())).unwrap();
        let m = build_dense(&h).unwrap();
        assert_eq!(diag(&m), vec![-1.0, 1.0, 1.0, -1.0]);
        assert!(linalg::max_abs(&(m.clone() - CMat::from_diagonal(&m.diagonal()))) == 0.0);
    }

    #[test]
    fn empty_interaction_is_zero() {
        let h = Interaction::<f64>::new(SiteSpec::qubits(3), Boundary::Open);
        assert_eq!(linalg::max_abs(&build_dense(&h).unwrap()), 0.0);
    }

    #[test]
    fn term_validation() {
        let chain = SiteSpec::qubits(2);
        let bad = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(0.0), cr(0.0)]);
        assert!(matches!(InteractionTerm::<f64>::new(vec![0], bad, &chain), Err(Error::NotHermitian(_))));
        assert!(InteractionTerm::<f64>::new(vec![0, 1], ops::pauli_x(), &chain).is_err());
        assert!(InteractionTerm::<f64>::new(vec![2], ops::pauli_x(), &chain).is_err());
    }

    #[test]
    fn sparse_matches_dense() {
        let h = preset_tfim::<f64>(5, 1.3, Boundary::Periodic).unwrap();
        let d = build_dense(&h).unwrap();
        let s = build_sparse(&h).unwrap().to_dense();
        assert!(linalg::max_abs_diff(&d, &s) < 1e-14);
    }

    #[test]
    fn periodic_diameter_wraps() {
        let h = preset_tfim::<f64>(6, 1.0, Boundary::Periodic).unwrap();
        assert_eq!(h.diameter(&[0, 5]), 2);
        assert_eq!(h.diameter(&[1, 2]), 2);
        assert_eq!(h.terms().len(), 12);
    }

    #[test]
    fn presets_respect_range_and_certificate() {
        for h in [
            preset_tfim::<f64>(6, 2.0, Boundary::Open).unwrap(),
            preset_aklt::<f64>(4, true).unwrap(),
            preset_product::<f64>(3).unwrap(),
        ] {
            let range = h.declared_range().unwrap();
            assert!(h.terms().iter().all(|t| h.diameter(t.sites()) <= range));
            assert!(h.decay_certificate().unwrap() <= h.decay().unwrap().prefactor * (1.0 + 1e-12));
        }
    }

    #[test]
    fn aklt_bond_is_shifted_projector() {
        // S·S + (S·S)²/3 = 2 P_2 − 2/3 on two spin-1 sites
        let h = preset_aklt::<f64>(2, false).unwrap();
        let ev = linalg::eigvalsh(h.terms()[0].matrix());
        let low = ev.iter().filter(|&&e| (e + 2.0 / 3.0).abs() < 1e-12).count();
        let high = ev.iter().filter(|&&e| (e - 4.0 / 3.0).abs() < 1e-12).count();
        assert_eq!((low, high), (4, 5));
    }

    #[test]
    fn derivation_of_identity_vanishes() {
        let h = preset_tfim::<f64>(4, 1.0, Boundary::Open).unwrap();
        let a = LocalOperator::new(vec![1], linalg::identity(2)).unwrap();
        assert!(apply_derivation(&h, &a).unwrap().norm() < 1e-14);
    }

    #[test]
    fn model_spec_roundtrip() {
        let json = r#"{"model":"tfim","N":4,"params":{"g":2.0},"boundary":"open","pinning":false}"#;
        let spec: ModelSpec = serde_json::from_str(json).unwrap();
        let h = spec.build::<f64>().unwrap();
        assert_eq!(h.terms().len(), 7);
        let custom = r#"{"model":"custom","N":2,"terms":[{"support":[0],"matrix":[[0,0],[1,0],[1,0],[0,0]]}]}"#;
        let spec: ModelSpec = serde_json::from_str(custom).unwrap();
        assert_eq!(spec.build::<f64>().unwrap().terms().len(), 1);
        let missing = r#"{"model":"tfim","N":4}"#;
        assert!(serde_json::from_str::<ModelSpec>(missing).unwrap().build::<f64>().is_err());
    }
}
