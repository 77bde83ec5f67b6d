//! Schmidt decompositions, tails, truncations and off-diagonal functionals.

use serde::Serialize;

use crate::analysis::{fit_power_law, PowerFit};
use crate::error::{Error, Result};
use crate::geometry::{Interval, Region};
use crate::linalg::{self, Split};
use crate::scalar::{cr, CMat, CVec, Real};
use crate::state::PureState;

/// Singular values below this fraction of the largest are treated as zero.
const RANK_CUTOFF: f64 = 1e-13;

/// Default cap on the number of Schmidt vectors used by
/// [`schmidt_functional_check`].
pub const FUNCTIONAL_RANK_CAP: usize = 16;

/// Schmidt decomposition `ψ = Σ_j √λ_j |l_j⟩ ⊗ |r_j⟩` across a bipartition.
#[derive(Clone, Debug)]
pub struct SchmidtData<T: Real> {
    /// Descending, strictly positive, summing to 1.
    pub lambdas: Vec<T>,
    /// Left vectors as columns.
    pub left: CMat<T>,
    /// Right vectors as columns.
    pub right: CMat<T>,
    pub left_sites: Vec<usize>,
    /// `Some(x)` when the bipartition is `≤ x | > x`.
    pub cut: Option<usize>,
    split: Split,
    dims: Vec<usize>,
}

impl<T: Real> SchmidtData<T> {
    pub fn rank(&self) -> usize {
        self.lambdas.len()
    }

    /// `λ_j` with 1-based `j`; zero beyond the rank.
    pub fn lambda(&self, j: usize) -> T {
        j.checked_sub(1).and_then(|i| self.lambdas.get(i)).copied().unwrap_or_else(T::zero)
    }

    pub fn left_vector(&self, j: usize) -> CVec<T> {
        self.left.column(j).into_owned()
    }

    pub fn right_vector(&self, j: usize) -> CVec<T> {
        self.right.column(j).into_owned()
    }

    /// `Σ_{j < k} √λ_j |l_j⟩⊗|r_j⟩` for the first `k` terms (unnormalized).
    pub fn partial_sum(&self, k: usize) -> CVec<T> {
        let k = k.min(self.rank());
        let mut m = CMat::zeros(self.split.keep_dim(), self.split.rest_dim());
        for j in 0..k {
            m += self.left.column(j) * self.right.column(j).transpose() * cr(self.lambdas[j].sqrt());
        }
        self.split.unmatricize(&m)
    }

    pub fn reconstruct(&self) -> CVec<T> {
        self.partial_sum(self.rank())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
}

/// Schmidt decomposition across the cut `≤ x | > x`.
pub fn schmidt<T: Real>(psi: &PureState<T>, cut: usize) -> Result<SchmidtData<T>> {
    if cut + 1 >= psi.len() {
        return Err(Error::InvalidArgument(format!("cut {cut} needs 0 ≤ x < N−1 = {}", psi.len() - 1)));
    }
    let sites: Vec<usize> = (0..=cut).collect();
    let mut data = schmidt_bipartition(psi, &sites)?;
    data.cut = Some(cut);
    Ok(data)
}

/// Schmidt decomposition between `sites` and the remaining sites.
pub fn schmidt_bipartition<T: Real>(psi: &PureState<T>, sites: &[usize]) -> Result<SchmidtData<T>> {
    let split = psi.sites().split(sites)?;
    let m = split.matricize(psi.amplitudes());
    let (u, s, v_t) = linalg::svd(&m);
    let cutoff = T::lit(RANK_CUTOFF) * s.first().copied().unwrap_or_else(T::one);
    let rank = s.iter().filter(|&&x| x > cutoff).count().max(1);
    let lambdas: Vec<T> = s[..rank].iter().map(|&x| x * x).collect();
    Ok(SchmidtData {
        lambdas,
        left: u.columns(0, rank).into_owned(),
        right: v_t.rows(0, rank).transpose(),
        left_sites: sites.to_vec(),
        cut: None,
        split,
        dims: psi.sites().dims().to_vec(),
    })
}

/// `Σ_{j ≥ k*} λ_j` (1-based); zero beyond the rank.
pub fn schmidt_tail<T: Real>(data: &SchmidtData<T>, k_star: usize) -> Result<T> {
    if k_star == 0 {
        return Err(Error::InvalidArgument("k* must be at least 1".into()));
    }
    Ok(data.lambdas.iter().skip(k_star - 1).fold(T::zero(), |acc, &x| acc + x))
}

/// Fits `tail(k) ≈ C k^{−α}` across the given `k*` values.
pub fn schmidt_tail_exponent<T: Real>(data: &SchmidtData<T>, k_stars: &[usize]) -> Result<PowerFit> {
    let points = k_stars
        .iter()
        .map(|&k| Ok((k as f64, schmidt_tail(data, k)?.as_f64())))
        .collect::<Result<Vec<_>>>()?;
    fit_power_law(&points)
}

#[derive(Clone, Debug)]
pub struct Truncation<T: Real> {
    pub state: PureState<T>,
    /// `𝔫² = Σ_{j ≤ k*} λ_j`.
    pub kept_weight: T,
    /// `‖ψ − ψ^{[k*]}‖²` computed from the vectors.
    pub distance_sq: T,
    /// The same quantity from `Σ_{j≤k*}(1−1/𝔫)²λ_j + Σ_{j>k*}λ_j`.
    pub distance_sq_identity: T,
}

/// Normalized truncation to the `k*` largest Schmidt terms.
pub fn truncate<T: Real>(psi: &PureState<T>, data: &SchmidtData<T>, k_star: usize) -> Result<Truncation<T>> {
    if k_star == 0 {
        return Err(Error::InvalidArgument("k* must be at least 1".into()));
    }
    if k_star >= data.rank() {
        return Ok(Truncation {
            state: psi.clone(),
            kept_weight: T::one(),
            distance_sq: T::zero(),
            distance_sq_identity: T::zero(),
        });
    }
    let kept: T = data.lambdas[..k_star].iter().fold(T::zero(), |a, &x| a + x);
    let norm = kept.sqrt();
    let v = data.partial_sum(k_star) / cr(norm);
    let distance_sq = (psi.amplitudes() - &v).norm_squared();
    let factor = (T::one() - T::one() / norm).powi(2);
    let identity = data.lambdas[..k_star].iter().fold(T::zero(), |a, &x| a + factor * x)
        + data.lambdas[k_star..].iter().fold(T::zero(), |a, &x| a + x);
    Ok(Truncation {
        state: PureState::normalized(v, psi.sites().clone())?,
        kept_weight: kept,
        distance_sq,
        distance_sq_identity: identity,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctionalEntry {
    pub m: usize,
    pub n: usize,
    pub lambda_m: f64,
    pub lambda_n: f64,
    /// `‖ℑ_{m,n}|_{I_{−ℓ}} − δ_{mn} ψ|_{I_{−ℓ}}‖₁`.
    pub inner: f64,
    /// Same on the complement side, restricted to `(I^c)_{−ℓ}`.
    pub outer: f64,
    pub inner_rescaled: f64,
    pub outer_rescaled: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctionalReport {
    pub interval: (usize, usize),
    pub ell: usize,
    pub rank: usize,
    pub cap: usize,
    /// Set when the Schmidt rank exceeded the cap.
    pub truncated: bool,
    pub entries: Vec<FunctionalEntry>,
}

impl FunctionalReport {
    pub fn max_rescaled(&self) -> f64 {
        self.entries.iter().map(|e| e.inner_rescaled.max(e.outer_rescaled)).fold(0.0, f64::max)
    }
}

/// Compares restricted Schmidt functionals of the bipartition `I | I^c`
/// with the restricted state, for all pairs up to the rank cap.
pub fn schmidt_functional_check<T: Real>(
    psi: &PureState<T>,
    interval: &Interval,
    ell: usize,
    cap: usize,
) -> Result<FunctionalReport> {
    let (lo, hi) = interval
        .bounds()
        .ok_or_else(|| Error::InvalidArgument("interval must be nonempty".into()))?;
    let inner_region = interval.fatten(-(ell as i64));
    if inner_region.is_empty() {
        return Err(Error::InvalidArgument(format!("{interval} shrunk by {ell} is empty")));
    }
    let outer_region: Region = interval.fatten(ell as i64).complement();
    let i_sites = interval.sites();
    let c_sites = interval.complement().sites();
    if c_sites.is_empty() {
        return Err(Error::InvalidArgument("interval covers the whole chain".into()));
    }
    let data = schmidt_bipartition(psi, &i_sites)?;
    let rank = data.rank();
    let used = rank.min(cap);

    let dims = psi.sites().dims();
    let positions = |sub: &[usize], within: &[usize]| -> Vec<usize> {
        sub.iter().map(|s| within.iter().position(|t| t == s).expect("nested region")).collect()
    };
    let i_dims: Vec<usize> = i_sites.iter().map(|&s| dims[s]).collect();
    let c_dims: Vec<usize> = c_sites.iter().map(|&s| dims[s]).collect();
    let inner_sites = inner_region.sites();
    let outer_sites = outer_region.sites();
    let inner_split = Split::new(&i_dims, &positions(&inner_sites, &i_sites))?;
    let outer_split = Split::new(&c_dims, &positions(&outer_sites, &c_sites))?;

    let rho_inner = psi.restrict_sites(&inner_sites)?.into_matrix();
    let rho_outer = psi.restrict_sites(&outer_sites)?.into_matrix();
    let left: Vec<CMat<T>> = (0..used).map(|j| inner_split.matricize(&data.left_vector(j))).collect();
    let right: Vec<CMat<T>> = (0..used).map(|j| outer_split.matricize(&data.right_vector(j))).collect();

    let mut entries = Vec::with_capacity(used * used);
    for m in 0..used {
        for k in 0..used {
            let delta = if m == k { T::one() } else { T::zero() };
            let fi = &left[m] * left[k].adjoint() - &rho_inner * cr(delta);
            let fo = &right[m] * right[k].adjoint() - &rho_outer * cr(delta);
            let inner = linalg::trace_norm(&fi).as_f64();
            let outer = linalg::trace_norm(&fo).as_f64();
            let scale = (data.lambdas[m] * data.lambdas[k]).sqrt().as_f64();
            entries.push(FunctionalEntry {
                m: m + 1,
                n: k + 1,
                lambda_m: data.lambdas[m].as_f64(),
                lambda_n: data.lambdas[k].as_f64(),
                inner,
                outer,
                inner_rescaled: scale * inner,
                outer_rescaled: scale * outer,
            });
        }
    }
    Ok(FunctionalReport { interval: (lo, hi), ell, rank, cap, truncated: rank > cap, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::CVec;
    use crate::state::SiteSpec;

    fn bell() -> PureState<f64> {
        let a = cr(std::f64::consts::FRAC_1_SQRT_2);
        PureState::new(CVec::from_vec(vec![a, cr(0.0), cr(0.0), a]), SiteSpec::qubits(2)).unwrap()
    }

    #[test]
    fn product_state_has_rank_one() {
        let psi = PureState::<f64>::basis(SiteSpec::qubits(4), 5).unwrap();
        for x in 0..3 {
            let d = schmidt(&psi, x).unwrap();
            assert_eq!(d.rank(), 1);
            assert!((d.lambdas[0] - 1.0).abs() < 1e-14);
            assert_eq!(schmidt_tail(&d, 2).unwrap(), 0.0);
        }
    }

    #[test]
    fn bell_pair() {
        let d = schmidt(&bell(), 0).unwrap();
        assert_eq!(d.rank(), 2);
        assert!(d.lambdas.iter().all(|&l| (l - 0.5).abs() < 1e-14));
        assert!((schmidt_tail(&d, 2).unwrap() - 0.5).abs() < 1e-14);
        assert!((d.reconstruct() - bell().amplitudes()).norm() < 1e-14);
    }

    #[test]
    fn bell_truncation_distance() {
        let psi = bell();
        let d = schmidt(&psi, 0).unwrap();
        let t = truncate(&psi, &d, 1).unwrap();
        let expected = (1.0 - 2f64.sqrt()).powi(2) / 2.0 + 0.5;
        assert!((t.distance_sq - expected).abs() < 1e-14);
        assert!((t.distance_sq_identity - expected).abs() < 1e-14);
        assert!((expected - 0.585786437626905).abs() < 1e-12);
    }

    #[test]
    fn cut_out_of_range() {
        assert!(schmidt(&bell(), 1).is_err());
    }

    #[test]
    fn functional_check_rejects_empty_shrink() {
        let psi = PureState::<f64>::basis(SiteSpec::qubits(4), 0).unwrap();
        let i = Interval::new(1, 2, 4).unwrap();
        assert!(schmidt_functional_check(&psi, &i, 1, 16).is_err());
    }
}
