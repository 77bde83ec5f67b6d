//! Correlation curves, conditional expectations, tail profiles and decay fits.

use nalgebra::ComplexField;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Interval, Region};
use crate::linalg::{self, Split};
use crate::scalar::{cr, CMat, Real};
use crate::state::{DensityOperator, LocalOperator, PureState, SiteSpec};

/// Values at or below this are treated as numerical noise by the fits.
pub const FIT_FLOOR: f64 = 1e-13;

/// `value ≈ C e^{−c ℓ}` fitted by least squares on `log value`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub prefactor: f64,
    pub rate: f64,
    /// `None` when the data has no variance in `log value`.
    pub r_squared: Option<f64>,
    pub window: (f64, f64),
    pub points: usize,
    /// Set when `r_squared` is undefined.
    pub flagged: bool,
}

/// `value ≈ C k^{−α}` fitted on `log k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub prefactor: f64,
    pub exponent: f64,
    pub r_squared: Option<f64>,
    pub points: usize,
}

struct Line {
    intercept: f64,
    slope: f64,
    r_squared: Option<f64>,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Line {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r_squared = if syy > 1e-24 * (1.0 + my * my) && sxx > 0.0 {
        let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        Some((1.0 - ss_res / syy).clamp(0.0, 1.0))
    } else {
        None
    };
    Line { intercept, slope, r_squared }
}

fn usable(points: &[(f64, f64)], floor: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let kept: Vec<&(f64, f64)> = points.iter().filter(|p| p.1 > floor && p.1.is_finite()).collect();
    if kept.len() < 3 {
        return Err(Error::InsufficientDecayData(kept.len()));
    }
    Ok((kept.iter().map(|p| p.0).collect(), kept.iter().map(|p| p.1.ln()).collect()))
}

/// Exponential fit using points above [`FIT_FLOOR`].
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<DecayFit> {
    fit_exponential_with_floor(points, FIT_FLOOR)
}

pub fn fit_exponential_with_floor(points: &[(f64, f64)], floor: f64) -> Result<DecayFit> {
    let (xs, ys) = usable(points, floor)?;
    let line = least_squares(&xs, &ys);
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit {
        prefactor: line.intercept.exp(),
        rate: -line.slope,
        r_squared: line.r_squared,
        window: (lo, hi),
        points: xs.len(),
        flagged: line.r_squared.is_none(),
    })
}

/// Power-law fit using points above [`FIT_FLOOR`] and `k > 0`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerFit> {
    let positive: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 > 0.0).collect();
    let (xs, ys) = usable(&positive, FIT_FLOOR)?;
    let logx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let line = least_squares(&logx, &ys);
    Ok(PowerFit { prefactor: line.intercept.exp(), exponent: -line.slope, r_squared: line.r_squared, points: xs.len() })
}

/// `‖a − b‖₁` for density operators on the same sites.
pub fn trace_norm_distance<T: Real>(a: &DensityOperator<T>, b: &DensityOperator<T>) -> Result<T> {
    if a.sites() != b.sites() || a.dims() != b.dims() {
        return Err(Error::InvalidArgument(format!(
            "support mismatch: {:?} vs {:?}",
            a.sites(),
            b.sites()
        )));
    }
    Ok(linalg::trace_norm(&(a.matrix() - b.matrix())))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub parameter: f64,
    pub value: f64,
}

/// Connected correlators `|ψ(A_x B_y) − ψ(A_x)ψ(B_y)|` of single-site
/// observables (normalized to unit norm), maximized over all pairs at each
/// distance `|x − y| ≥ 1`.
pub fn clustering_curve<T: Real>(psi: &PureState<T>, observables: &[CMat<T>]) -> Result<Vec<CurvePoint>> {
    let n = psi.len();
    let normalized: Vec<CMat<T>> = observables
        .iter()
        .map(|a| {
            let s = linalg::spectral_norm(a);
            if s > T::zero() {
                a / cr(s)
            } else {
                a.clone()
            }
        })
        .collect();
    let mut best = vec![T::zero(); n];
    for x in 0..n {
        for y in x + 1..n {
            let rho = psi.restrict_sites(&[x, y])?;
            let rho_x = rho.restrict_sites(&[x])?;
            let rho_y = rho.restrict_sites(&[y])?;
            for a in &normalized {
                for b in &normalized {
                    if a.nrows() != psi.sites().dim(x) || b.nrows() != psi.sites().dim(y) {
                        return Err(Error::Dimension("observable does not match the site dimension".into()));
                    }
                    let ab = (rho.matrix() * linalg::kron(a, b)).trace();
                    let ea = (rho_x.matrix() * a).trace();
                    let eb = (rho_y.matrix() * b).trace();
                    let v = (ab - ea * eb).modulus();
                    best[y - x] = best[y - x].max(v);
                }
            }
        }
    }
    Ok((1..n).map(|d| CurvePoint { parameter: d as f64, value: best[d].as_f64() }).collect())
}

/// Regions used by the mutual-correlation distance at `(x, ℓ)`: everything
/// at or left of `x − ℓ` and everything at or right of `x + ℓ`.
pub fn outer_regions(n: usize, x: usize, ell: usize) -> (Interval, Interval) {
    let x = x as i64;
    let ell = ell as i64;
    (Interval::at_most(x - ell, n), Interval::at_least(x + ell, n))
}

#[derive(Clone, Debug, Serialize)]
pub struct MutualCorrelation {
    pub x: usize,
    pub points: Vec<CurvePoint>,
    /// `(ℓ, reason)` for skipped values.
    pub skipped: Vec<(usize, String)>,
}

/// Singular values of `ψ` reshaped across `sites | rest` below this
/// fraction of the largest are dropped when reducing supports.
pub const SUPPORT_CUTOFF: f64 = 1e-9;

/// `D(ℓ) = ‖ψ|_{L∪R} − ψ|_L ⊗ ψ|_R‖₁` with `L = (≤ x−ℓ)`, `R = (≥ x+ℓ)`.
pub fn mutual_correlation_curve<T: Real>(psi: &PureState<T>, x: usize, ells: &[usize]) -> Result<MutualCorrelation> {
    let n = psi.len();
    if x >= n {
        return Err(Error::Geometry(format!("site {x} outside a chain of {n} sites")));
    }
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for &ell in ells {
        let (l, r) = outer_regions(n, x, ell);
        if l.is_empty() || r.is_empty() {
            skipped.push((ell, "an outer region is empty".to_string()));
            continue;
        }
        let d = split_distance(psi, &l.sites(), &r.sites(), T::lit(SUPPORT_CUTOFF))?;
        points.push(CurvePoint { parameter: ell as f64, value: d.as_f64() });
    }
    Ok(MutualCorrelation { x, points, skipped })
}

/// Orthonormal basis (columns) of the numerical support of `ψ|_sites`.
fn support_basis<T: Real>(psi: &PureState<T>, sites: &[usize], cutoff: T) -> Result<CMat<T>> {
    let m = psi.matricize(sites)?;
    let (u, s, _) = linalg::svd(&m);
    let top = s.first().copied().unwrap_or_else(T::zero);
    let rank = s.iter().filter(|&&v| v > cutoff * top).count().max(1);
    Ok(u.columns(0, rank).into_owned())
}

/// `‖ψ|_{L∪R} − ψ|_L ⊗ ψ|_R‖₁` for disjoint `L < R`, evaluated on the
/// product of the two numerical supports. Both operators live there, so
/// the distance is unchanged up to the discarded weight.
pub fn split_distance<T: Real>(psi: &PureState<T>, left: &[usize], right: &[usize], cutoff: T) -> Result<T> {
    if left.last().zip(right.first()).is_some_and(|(a, b)| a >= b) {
        return Err(Error::InvalidArgument("left region must lie strictly left of the right region".into()));
    }
    let pl = support_basis(psi, left, cutoff)?;
    let pr = support_basis(psi, right, cutoff)?;
    let (kl, kr) = (pl.ncols(), pr.ncols());
    let mut outer: Vec<usize> = left.to_vec();
    outer.extend_from_slice(right);
    let split = psi.sites().split(&outer)?;
    let dr = pr.nrows();
    let m = split.matricize(psi.amplitudes());
    let pl_adj = pl.adjoint();
    let pr_conj = pr.map(|z| z.conj());
    let mut rho = CMat::zeros(kl * kr, kl * kr);
    for mid in 0..split.rest_dim() {
        let slice = CMat::from_fn(pl.nrows(), dr, |a, b| m[(a * dr + b, mid)]);
        let v = &pl_adj * slice * &pr_conj;
        let flat = CMat::from_fn(kl * kr, 1, |i, _| v[(i / kr, i % kr)]);
        rho += &flat * flat.adjoint();
    }
    let rho_l = pl.adjoint() * psi.restrict_sites(left)?.matrix() * &pl;
    let rho_r = pr.adjoint() * psi.restrict_sites(right)?.matrix() * &pr;
    Ok(linalg::trace_norm(&(rho - linalg::kron(&rho_l, &rho_r))))
}

/// Reference implementation of [`split_distance`] on the full `L ∪ R` space.
pub fn split_distance_dense<T: Real>(psi: &PureState<T>, left: &[usize], right: &[usize]) -> Result<T> {
    let mut outer: Vec<usize> = left.to_vec();
    outer.extend_from_slice(right);
    outer.sort_unstable();
    let joint = psi.restrict_sites(&outer)?;
    let product = psi.restrict_sites(left)?.tensor(&psi.restrict_sites(right)?)?;
    trace_norm_distance(&joint, &product)
}

/// `E_X(A) = Tr_{S∖X}(A) / dim(S∖X)` on `S ∩ X`, for `A` supported on `S`.
pub fn conditional_expectation<T: Real>(
    a: &LocalOperator<T>,
    region: &Region,
    chain: &SiteSpec,
) -> Result<LocalOperator<T>> {
    let keep_positions: Vec<usize> =
        a.sites().iter().enumerate().filter(|(_, s)| region.contains(**s)).map(|(i, _)| i).collect();
    if keep_positions.len() == a.sites().len() {
        return Ok(a.clone());
    }
    let dims: Vec<usize> = a.sites().iter().map(|&s| chain.dim(s)).collect();
    let split = Split::new(&dims, &keep_positions)?;
    let reduced = split.partial_trace(a.matrix()) / cr(T::from_usize_lossy(split.rest_dim()));
    LocalOperator::new(keep_positions.iter().map(|&i| a.sites()[i]).collect(), reduced)
}

#[derive(Clone, Debug, Serialize)]
pub struct TailProfile {
    pub anchor: usize,
    /// `t(n) = ‖A − E_{[x−n, x+n]}(A)‖` for `n = 0..`.
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<DecayFit>,
    /// Largest increase `t(n+1) − t(n)` (nonpositive for a monotone profile).
    pub max_increase: f64,
}

impl TailProfile {
    pub fn is_nonincreasing(&self, tol: f64) -> bool {
        self.max_increase <= tol
    }
}

/// Tail profile of `A` around `x`, up to the radius whose ball covers the
/// support of `A` (where the value is exactly zero).
pub fn tail_profile<T: Real>(a: &LocalOperator<T>, x: usize, chain: &SiteSpec) -> Result<TailProfile> {
    let n = chain.len();
    if x >= n {
        return Err(Error::Geometry(format!("anchor {x} outside a chain of {n} sites")));
    }
    let radius = match a.hull() {
        Some((lo, hi)) => (x.max(hi) - x).max(x - x.min(lo)),
        None => 0,
    };
    let mut values = Vec::with_capacity(radius + 1);
    for r in 0..=radius {
        let ball = Region::from(Interval::ball(x, r, n));
        let e = conditional_expectation(a, &ball, chain)?;
        values.push(a.distance(&e, chain)?.as_f64());
    }
    let max_increase = values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let points: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
    Ok(TailProfile {
        anchor: x,
        fit: fit_exponential(&points).ok(),
        max_increase: if values.len() < 2 { 0.0 } else { max_increase },
        values,
    })
}
