//! Cutting unitaries, half-state steps and the disentangling circuit.
//!
//! Vectors are transformed by unitaries acting on them directly: a cut at
//! `x` is a unitary `U` with `U|ψ⟩ ≈ |ψ_{≤x}⟩⊗|ψ_{>x}⟩`. The Heisenberg
//! action of a layer `L` on an observable is `A ↦ L† A L`.

use nalgebra::ComplexField;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, fit_exponential, DecayFit, TailProfile};
use crate::error::{Error, Result};
use crate::geometry::{Interval, Region};
use crate::linalg;
use crate::scalar::{cr, CMat, CVec, Real};
use crate::schmidt;
use crate::state::{LocalOperator, PureState, SiteSpec};
use crate::uhlmann;

pub const DEFAULT_ELL0: usize = 2;
pub const CUT_TOL: f64 = 1e-6;
pub const STEP_TOL: f64 = 1e-4;
pub const COMPOSITION_FLOOR: f64 = 1e-10;
/// Top-eigenvalue split below which a factor counts as degenerate.
/// Largest support (in sites) the pipeline grows a ball alignment to.
pub const MAX_SUPPORT: usize = 10;
pub const DEGENERACY_SPLIT: f64 = 1e-10;
const UNITARITY_TOL: f64 = 1e-9;
/// Largest region whose reduced state enters the closeness profile.
const CLOSENESS_MAX_SITES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisentangleOptions {
    pub ell0: usize,
    pub cut_tol: f64,
    pub step_tol: f64,
    pub max_support: usize,
}

impl Default for DisentangleOptions {
    fn default() -> Self {
        Self { ell0: DEFAULT_ELL0, cut_tol: CUT_TOL, step_tol: STEP_TOL, max_support: MAX_SUPPORT }
    }
}

/// Unitary on a contiguous support with a measured tail around its anchor.
#[derive(Clone, Debug)]
pub struct AnchoredUnitary<T: Real> {
    support: Interval,
    matrix: CMat<T>,
    anchor: usize,
    tail: TailProfile,
}

impl<T: Real> AnchoredUnitary<T> {
    pub fn new(support: Interval, matrix: CMat<T>, anchor: usize, chain: &SiteSpec) -> Result<Self> {
        let sites = support.sites();
        if chain.dim_of(&sites) != matrix.nrows() || !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "{}×{} matrix on a support of dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                chain.dim_of(&sites)
            )));
        }
        let err = linalg::unitarity_error(&matrix).as_f64();
        if err > UNITARITY_TOL {
            return Err(Error::InvalidArgument(format!("layer is not unitary (error {err:e})")));
        }
        let tail = analysis::tail_profile(&LocalOperator::new(sites, matrix.clone())?, anchor, chain)?;
        Ok(Self { support, matrix, anchor, tail })
    }

    pub fn identity(support: Interval, anchor: usize, chain: &SiteSpec) -> Result<Self> {
        let d = chain.dim_of(&support.sites());
        Self::new(support, linalg::identity(d), anchor, chain)
    }

    pub fn support(&self) -> &Interval {
        &self.support
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.matrix
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn tail(&self) -> &TailProfile {
        &self.tail
    }

    pub fn operator(&self) -> LocalOperator<T> {
        LocalOperator::new(self.support.sites(), self.matrix.clone()).expect("support sites are sorted")
    }

    /// `U|v⟩` for a vector on the whole chain.
    pub fn apply(&self, v: &CVec<T>, chain: &SiteSpec) -> Result<CVec<T>> {
        Ok(chain.split(&self.support.sites())?.apply(&self.matrix, v))
    }

    pub fn record(&self) -> LayerRecord {
        let (lo, hi) = self.support.bounds().unwrap_or((self.anchor, self.anchor));
        LayerRecord {
            anchor: self.anchor,
            support: [lo, hi],
            // row-major
            matrix: (0..self.matrix.nrows())
                .flat_map(|i| (0..self.matrix.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| [self.matrix[(i, j)].re.as_f64(), self.matrix[(i, j)].im.as_f64()])
                .collect(),
        }
    }
}

/// Serialized layer: row-major `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LayerRecord {
    pub anchor: usize,
    pub support: [usize; 2],
    pub matrix: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidateDiagnostics {
    pub ell: usize,
    /// `Σ_j |λ_j(ℓ) − μ_j(ℓ)|` on `B_ℓ(x)`.
    pub hoffman_wielandt_sum: f64,
    /// `|λ₁(ℓ) − μ₁(ℓ)|`.
    pub hoffman_wielandt_first: f64,
    /// `‖ρ_B − ρ_{B,≤x} ⊗ ρ_{B,>x}‖₁`, which dominates the sum.
    pub trace_distance: f64,
    pub mu1_local: f64,
    /// `μ₁(ℓ) / dim H_B`.
    pub ky_fan_bound: f64,
    pub ky_fan_holds: bool,
}

#[derive(Clone, Debug)]
pub struct FactorizedCandidate<T: Real> {
    pub x: usize,
    /// Top eigenvector of `ρ_{≤x}`.
    pub left: CVec<T>,
    /// Top eigenvector of `ρ_{>x}`.
    pub right: CVec<T>,
    pub product: PureState<T>,
    pub mu1: T,
    /// A factor had a degenerate top eigenvalue and the tie-break was used.
    pub degenerate: bool,
    pub diagnostics: CandidateDiagnostics,
}

/// First standard basis vector with a nonzero projection onto the span of
/// `block`'s columns, projected and normalized.
fn tie_break<T: Real>(block: &CMat<T>) -> CVec<T> {
    let d = block.nrows();
    for k in 0..d {
        let coeffs: CVec<T> = block.row(k).adjoint();
        let p = block * coeffs;
        let n = p.norm();
        if n > T::lit(1e-6) {
            return p / cr(n);
        }
    }
    unreachable!("a nonempty block spans a nonzero subspace")
}

fn top_vector<T: Real>(vectors: &CMat<T>, lambdas: &[T]) -> (CVec<T>, bool) {
    let split = T::lit(DEGENERACY_SPLIT);
    let m = lambdas.iter().take_while(|&&l| lambdas[0] - l < split).count();
    if m > 1 {
        return (tie_break(&vectors.columns(0, m).into_owned()), true);
    }
    let mut v = vectors.column(0).into_owned();
    linalg::fix_phase(&mut v);
    (v, false)
}

/// Product of the top eigenvectors of `ρ_{≤x}` and `ρ_{>x}`, with the
/// Hoffman–Wielandt and Ky Fan diagnostics on `B_ℓ(x)`.
pub fn factorized_candidate<T: Real>(psi: &PureState<T>, x: usize, ell: usize) -> Result<FactorizedCandidate<T>> {
    let n = psi.len();
    let data = schmidt::schmidt(psi, x)?;
    let (left, dl) = top_vector(&data.left, &data.lambdas);
    let (right, dr) = top_vector(&data.right, &data.lambdas);
    let lambda1 = data.lambdas[0];
    let degenerate = dl || dr;
    let product = PureState::normalized(linalg::kron_vec(&left, &right), psi.sites().clone())?;

    let lo = x.saturating_sub(ell);
    let hi = (x + ell).min(n - 1);
    let lb: Vec<usize> = (lo..=x).collect();
    let rb: Vec<usize> = (x + 1..=hi).collect();
    let both: Vec<usize> = (lo..=hi).collect();
    let rho = psi.restrict_sites(&both)?;
    let factors = psi.restrict_sites(&lb)?.tensor(&psi.restrict_sites(&rb)?)?;
    let mut lam = rho.eigenvalues();
    let mut mu = factors.eigenvalues();
    lam.sort_by(|a, b| b.partial_cmp(a).unwrap());
    mu.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let hw_sum = lam.iter().zip(&mu).map(|(a, b)| (*a - *b).abs().as_f64()).sum();
    let mu1_local = mu[0].as_f64();
    let ky_fan_bound = mu1_local / rho.dim() as f64;
    let trace_distance = linalg::trace_norm(&(rho.matrix() - factors.matrix())).as_f64();
    let mu1 = lambda1 * lambda1;
    let diagnostics = CandidateDiagnostics {
        ell,
        hoffman_wielandt_sum: hw_sum,
        hoffman_wielandt_first: (lam[0] - mu[0]).abs().as_f64(),
        trace_distance,
        mu1_local,
        ky_fan_bound,
        ky_fan_holds: mu1.as_f64() >= ky_fan_bound - 1e-12,
    };
    Ok(FactorizedCandidate { x, left, right, product, mu1, degenerate, diagnostics })
}

/// `(r, ‖ψ|_C − η|_C‖₁)` for `C` the complement of `B_r(x)`, for every
/// radius whose complement is nonempty and has at most eight sites.
pub fn closeness_profile<T: Real>(psi: &PureState<T>, eta: &PureState<T>, x: usize) -> Result<Vec<(usize, f64)>> {
    let n = psi.len();
    let mut out = Vec::new();
    for r in 0..n {
        let outside = Interval::ball(x, r, n).complement();
        if outside.is_empty() {
            break;
        }
        if outside.len() > CLOSENESS_MAX_SITES {
            continue;
        }
        let d = analysis::trace_norm_distance(&psi.restrict(&outside)?, &eta.restrict(&outside)?)?;
        out.push((r, d.as_f64()));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct CutResult<T: Real> {
    pub x: usize,
    pub candidate: FactorizedCandidate<T>,
    pub unitary: AnchoredUnitary<T>,
    /// `|⟨ψ_{≤x}⊗ψ_{>x}|U|ψ⟩|`.
    pub fidelity: T,
    pub radius: usize,
    /// Achieved overlap per ball radius tried.
    pub overlaps: Vec<(usize, f64)>,
    /// The final ball covers the whole chain.
    pub saturated: bool,
}

impl<T: Real> CutResult<T> {
    pub fn product_state(&self) -> &PureState<T> {
        &self.candidate.product
    }

    pub fn mu1(&self) -> T {
        self.candidate.mu1
    }
}

/// Composed ball alignment: the result of [`align_on_balls`].
struct BallAlignment<T: Real> {
    support: Interval,
    unitary: CMat<T>,
    overlap: T,
    overlaps: Vec<(usize, f64)>,
}

/// Aligns `xi` with `eta` on balls `A_n = B_{n·ℓ₀}(center) ∩ window` for
/// `n = 1, 2, …`, each step acting on the output of the previous one, until
/// the overlap reaches `1 − tol` or the ball fills the window. Returns the
/// composed unitary on the last ball. A ball larger than `max_sites` is an
/// error.
fn align_on_balls<T: Real>(
    xi: &CVec<T>,
    eta: &CVec<T>,
    chain: &SiteSpec,
    center: usize,
    window: &Interval,
    ell0: usize,
    tol: f64,
    max_sites: usize,
) -> Result<BallAlignment<T>> {
    let n = chain.len();
    let mut overlaps: Vec<(usize, f64)> = Vec::new();
    let mut current = xi.clone();
    let mut total: Option<LocalOperator<T>> = None;
    for step in 1.. {
        let radius = step * ell0;
        let ball = Interval::ball(center, radius, n).intersect(window);
        if ball.len() > max_sites {
            let best = overlaps.last().map_or(0.0, |p| p.1);
            return Err(Error::SupportCap { sites: ball.len(), cap: max_sites, best });
        }
        let split = chain.split(&ball.sites())?;
        let al = uhlmann::align_purifications(&current, eta, &split)?;
        current = split.apply(&al.unitary, &current);
        let increment = LocalOperator::new(ball.sites(), al.unitary)?;
        total = Some(match total {
            None => increment,
            Some(t) => increment.compose(&t, chain)?,
        });
        let overlap = al.overlap.as_f64();
        overlaps.push((radius, overlap));
        if overlap >= 1.0 - tol || window.is_subset_of(&ball) {
            if overlap < 1.0 - tol {
                return Err(Error::Unreachable { best: overlap });
            }
            let unitary = total.expect("at least one step").into_matrix();
            return Ok(BallAlignment { support: ball, unitary, overlap: al.overlap, overlaps });
        }
    }
    unreachable!()
}

/// Unitary `U`, anchored at `x`, with `U|ψ⟩ ≈ |ψ_{≤x}⟩⊗|ψ_{>x}⟩`.
///
/// Composes Uhlmann alignments of `ψ` with the factorized candidate on the
/// balls `A_n = B_{n·ℓ₀}(x)`.
pub fn cutting_unitary<T: Real>(psi: &PureState<T>, x: usize, ell0: usize, tol: f64) -> Result<CutResult<T>> {
    cutting_unitary_capped(psi, x, ell0, tol, usize::MAX)
}

/// [`cutting_unitary`] with balls of at most `max_sites` sites.
pub fn cutting_unitary_capped<T: Real>(
    psi: &PureState<T>,
    x: usize,
    ell0: usize,
    tol: f64,
    max_sites: usize,
) -> Result<CutResult<T>> {
    if ell0 == 0 {
        return Err(Error::InvalidArgument("ℓ₀ must be positive".into()));
    }
    let chain = psi.sites();
    let n = chain.len();
    let candidate = factorized_candidate(psi, x, ell0)?;
    let whole = Interval::whole(n);
    let al = align_on_balls(psi.amplitudes(), candidate.product.amplitudes(), chain, x, &whole, ell0, tol, max_sites)?;
    let saturated = al.support == whole;
    let radius = al.overlaps.last().map(|p| p.0).unwrap_or(0);
    let unitary = AnchoredUnitary::new(al.support, al.unitary, x, chain)?;
    Ok(CutResult { x, candidate, unitary, fidelity: al.overlap, radius, overlaps: al.overlaps, saturated })
}

#[derive(Clone, Debug)]
pub struct Approximant<T: Real> {
    pub unitary: LocalOperator<T>,
    /// `‖U − u‖`.
    pub distance: f64,
    /// `‖E_{B_n}(U) − u‖`.
    pub polar_deficiency: f64,
    /// `t(n) = ‖U − E_{B_n}(U)‖`.
    pub tail: f64,
}

/// Unitary on `B_n(anchor)` close to `U`: the conditional expectation
/// followed by the polar factor.
pub fn local_approximant<T: Real>(u: &AnchoredUnitary<T>, n: usize, chain: &SiteSpec) -> Result<Approximant<T>> {
    let op = u.operator();
    let ball = Region::from(Interval::ball(u.anchor(), n, chain.len()));
    let e = analysis::conditional_expectation(&op, &ball, chain)?;
    let (q, completed) = linalg::polar_factor(e.matrix());
    if completed {
        return Err(Error::SingularPolar(format!("E_B(U) is singular at radius {n}")));
    }
    let approx = LocalOperator::new(e.sites().to_vec(), q)?;
    Ok(Approximant {
        distance: op.distance(&approx, chain)?.as_f64(),
        polar_deficiency: e.distance(&approx, chain)?.as_f64(),
        tail: op.distance(&e, chain)?.as_f64(),
        unitary: approx,
    })
}

/// Product vector `⊗_{s ∈ sites} φ_s`.
pub fn product_vector<T: Real>(phi: &[CVec<T>], sites: impl IntoIterator<Item = usize>) -> CVec<T> {
    sites.into_iter().fold(CVec::from_element(1, cr(T::one())), |acc, s| linalg::kron_vec(&acc, &phi[s]))
}

/// `φ_{≤x} ⊗ s_{(x,x+ℓ]} ⊗ ψ_{>x+ℓ}`.
#[derive(Clone, Debug)]
pub struct OmegaState<T: Real> {
    pub state: PureState<T>,
    /// `s` on `(x, x+ℓ]`.
    pub block: CVec<T>,
    /// `ψ_{>x+ℓ}`, absent when `x + ℓ` reaches the chain end.
    pub remainder: Option<CVec<T>>,
    /// Top Schmidt weight across `x` of `u|ψ_{≤x+ℓ}⟩`.
    pub overlap: f64,
    pub x: usize,
    pub ell: usize,
}

/// Block end `min(x + ℓ, N − 1)`.
fn block_end(x: usize, ell: usize, n: usize) -> usize {
    (x + ell).min(n - 1)
}

/// Builds `ω_x` from `u|ψ_{≤x+ℓ}⟩ ⊗ |ψ_{>x+ℓ}⟩`, with `u` the local
/// approximant of the cut at `x` on `B_ℓ(x)`.
pub fn omega_state<T: Real>(
    psi: &PureState<T>,
    cut: &CutResult<T>,
    ell: usize,
    phi: &[CVec<T>],
) -> Result<OmegaState<T>> {
    let chain = psi.sites();
    let n = chain.len();
    let x = cut.x;
    check_phi(phi, chain)?;
    let y = block_end(x, ell, n);
    let (head, remainder) = if y + 1 < n {
        let data = schmidt::schmidt(psi, y)?;
        let (l, _) = top_vector(&data.left, &data.lambdas);
        let (r, _) = top_vector(&data.right, &data.lambdas);
        (l, Some(r))
    } else {
        (psi.amplitudes().clone(), None)
    };
    let head_sites = SiteSpec::new(chain.dims()[..=y].to_vec())?;
    let approx = local_approximant(&cut.unitary, ell, chain)?;
    let u = approx.unitary.clone();
    if u.sites().iter().any(|&s| s > y) {
        return Err(Error::Geometry(format!("approximant reaches past site {y}")));
    }
    let head = PureState::normalized(head, head_sites.clone())?;
    let moved = PureState::normalized(head.apply(&u)?, head_sites)?;
    let data = schmidt::schmidt_bipartition(&moved, &(0..=x).collect::<Vec<_>>())?;
    let overlap = data.lambdas[0].as_f64();
    if overlap < 0.5 {
        return Err(Error::TruncationRegime(overlap));
    }
    let (block, _) = top_vector(&data.right, &data.lambdas);
    let mut amps = linalg::kron_vec(&product_vector(phi, 0..=x), &block);
    if let Some(r) = &remainder {
        amps = linalg::kron_vec(&amps, r);
    }
    let state = PureState::normalized(amps, chain.clone())?;
    Ok(OmegaState { state, block, remainder, overlap, x, ell })
}

fn check_phi<T: Real>(phi: &[CVec<T>], chain: &SiteSpec) -> Result<()> {
    if phi.len() != chain.len() || phi.iter().enumerate().any(|(s, v)| v.len() != chain.dim(s)) {
        return Err(Error::Dimension("reference product does not match the chain".into()));
    }
    if phi.iter().any(|v| (v.norm().as_f64() - 1.0).abs() > 1e-10) {
        return Err(Error::InvalidArgument("reference product factors must be unit vectors".into()));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct StepResult<T: Real> {
    pub x: usize,
    pub ell: usize,
    /// Block rotation on `(x, x+ℓ]`.
    pub v: AnchoredUnitary<T>,
    /// Alignment of `ψ̂_{>x}` with `ω_x`, supported on `> x`.
    pub w: AnchoredUnitary<T>,
    pub next: PureState<T>,
    pub omega_overlap: f64,
    /// `⟨ω_x|W|ψ̂_{>x}⟩`.
    pub w_overlap: f64,
    pub w_radius: usize,
    /// `|⟨ψ̂_{>x+ℓ}|V W|ψ̂_{>x}⟩|`.
    pub fidelity: f64,
    /// `1 − λ₁` across `x + ℓ` of `V W|ψ̂_{>x}⟩` (against `φ` at the chain end).
    pub product_defect: f64,
    /// Trace-norm change of the restriction to `≤ x`.
    pub left_change: f64,
}

/// One step `φ_{≤x}⊗ψ_{>x} → φ_{≤x+ℓ}⊗ψ_{>x+ℓ}`.
pub fn half_state_step<T: Real>(
    psi: &PureState<T>,
    psi_hat: &PureState<T>,
    cut: &CutResult<T>,
    ell: usize,
    phi: &[CVec<T>],
    opts: &DisentangleOptions,
) -> Result<StepResult<T>> {
    let chain = psi.sites();
    let n = chain.len();
    let x = cut.x;
    let y = block_end(x, ell, n);
    let omega = omega_state(psi, cut, ell, phi)?;

    let right = Interval::new(x + 1, n - 1, n)?;
    let al = align_on_balls(psi_hat.amplitudes(), omega.state.amplitudes(), chain, y, &right, opts.ell0, opts.cut_tol, opts.max_support)?;
    let w = AnchoredUnitary::new(al.support, al.unitary, y, chain)?;

    let block = Interval::new(x + 1, y, n)?;
    let target = product_vector(phi, x + 1..=y);
    let v = AnchoredUnitary::new(block, linalg::unitary_mapping(&omega.block, &target)?, y, chain)?;

    let out = v.apply(&w.apply(psi_hat.amplitudes(), chain)?, chain)?;
    let out = PureState::normalized(out, chain.clone())?;
    let mut next = product_vector(phi, 0..=y);
    if let Some(r) = &omega.remainder {
        next = linalg::kron_vec(&next, r);
    }
    let next = PureState::normalized(next, chain.clone())?;
    let fidelity = out.overlap(&next).as_f64();
    let product_defect = if y + 1 < n {
        1.0 - schmidt::schmidt(&out, y)?.lambdas[0].as_f64()
    } else {
        1.0 - fidelity * fidelity
    };
    let left: Vec<usize> = (0..=x).collect();
    let left_change = linalg::trace_norm(&(out.restrict_sites(&left)?.matrix() - psi_hat.restrict_sites(&left)?.matrix())).as_f64();
    if product_defect > opts.step_tol {
        return Err(Error::ProductTest { index: x, infidelity: product_defect, tol: opts.step_tol });
    }
    Ok(StepResult {
        x,
        ell,
        v,
        w,
        next,
        omega_overlap: omega.overlap,
        w_overlap: al.overlap.as_f64(),
        w_radius: al.overlaps.last().map(|p| p.0).unwrap_or(0),
        fidelity,
        product_defect,
        left_change,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerRole {
    Cut,
    Rotation,
    W,
    V,
}

/// Layers in the order they act on vectors (first entry acts first).
#[derive(Clone, Debug)]
pub struct Circuit<T: Real> {
    pub layers: Vec<(LayerRole, AnchoredUnitary<T>)>,
    pub spacing: usize,
}

#[derive(Serialize)]
struct CircuitLayerJson<'a> {
    role: LayerRole,
    #[serde(flatten)]
    layer: &'a LayerRecord,
}

impl<T: Real> Circuit<T> {
    pub fn apply(&self, v: &CVec<T>, chain: &SiteSpec) -> Result<CVec<T>> {
        self.layers.iter().try_fold(v.clone(), |acc, (_, l)| l.apply(&acc, chain))
    }

    pub fn family(&self, role: LayerRole) -> impl Iterator<Item = &AnchoredUnitary<T>> {
        self.layers.iter().filter(move |(r, _)| *r == role).map(|(_, l)| l)
    }

    pub fn records(&self) -> Vec<LayerRecord> {
        self.layers.iter().map(|(_, l)| l.record()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let records = self.records();
        let layers: Vec<CircuitLayerJson> =
            self.layers.iter().zip(&records).map(|((role, _), layer)| CircuitLayerJson { role: *role, layer }).collect();
        Ok(serde_json::to_string(&layers)?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub x: usize,
    pub fidelity: f64,
    pub omega_overlap: f64,
    pub w_overlap: f64,
    pub w_radius: usize,
    pub product_defect: f64,
    pub left_change: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_fit: Option<DecayFit>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DisentangleReport {
    pub ell: usize,
    pub ell0: usize,
    pub cut_fidelity: f64,
    pub cut_radius: usize,
    pub per_step: Vec<StepRecord>,
    /// `|⟨φ|G|ψ⟩|` for the assembled circuit `G`.
    pub final_product_fidelity: f64,
    /// `‖G_interleaved ψ − G_reordered ψ‖`.
    pub reorder_error: f64,
    /// Every `V` commutes with every later `W` by disjoint supports.
    pub commutation_audit: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<serde_json::Value>,
}

/// Unitary on one site mapping `from` to `to`.
fn site_rotation<T: Real>(site: usize, from: &CVec<T>, to: &CVec<T>, chain: &SiteSpec) -> Result<AnchoredUnitary<T>> {
    let n = chain.len();
    AnchoredUnitary::new(Interval::site(site, n)?, linalg::unitary_mapping(from, to)?, site, chain)
}

/// Circuit `G` with `G|ψ⟩ ≈ |φ⟩`: the cut at `0`, the rotation of the
/// left factor, then half-state steps at `x = 0, ℓ, 2ℓ, …`, reordered so
/// that every `W` acts before every `V`.
pub fn disentangle<T: Real>(
    psi: &PureState<T>,
    ell: usize,
    phi: &[CVec<T>],
    opts: &DisentangleOptions,
) -> Result<(Circuit<T>, DisentangleReport)> {
    let chain = psi.sites();
    let n = chain.len();
    if ell < 2 {
        return Err(Error::InvalidArgument(format!("spacing ℓ = {ell} must be at least 2")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("disentangling needs at least two sites".into()));
    }
    check_phi(phi, chain)?;
    let wrap = |index: usize| move |e: Error| Error::Step { index, source: Box::new(e) };

    let first = cutting_unitary_capped(psi, 0, opts.ell0, opts.cut_tol, opts.max_support).map_err(wrap(0))?;
    let rotation = site_rotation(0, &first.candidate.left, &phi[0], chain)?;
    let mut psi_hat =
        PureState::normalized(linalg::kron_vec(&phi[0], &first.candidate.right), chain.clone())?;

    let mut steps = Vec::new();
    let mut x = 0;
    let mut cut = first.clone();
    while x + 1 < n {
        let index = steps.len() + 1;
        if x > 0 {
            cut = cutting_unitary_capped(psi, x, opts.ell0, opts.cut_tol, opts.max_support).map_err(wrap(index))?;
        }
        let step = half_state_step(psi, &psi_hat, &cut, ell, phi, opts).map_err(wrap(index))?;
        psi_hat = step.next.clone();
        x = block_end(x, ell, n);
        steps.push(step);
    }

    let mut interleaved = vec![(LayerRole::Cut, first.unitary.clone()), (LayerRole::Rotation, rotation.clone())];
    for s in &steps {
        interleaved.push((LayerRole::W, s.w.clone()));
        interleaved.push((LayerRole::V, s.v.clone()));
    }
    let mut layers = vec![(LayerRole::Cut, first.unitary.clone()), (LayerRole::Rotation, rotation)];
    layers.extend(steps.iter().map(|s| (LayerRole::W, s.w.clone())));
    layers.extend(steps.iter().map(|s| (LayerRole::V, s.v.clone())));
    let commutation_audit = steps.iter().enumerate().all(|(j, sj)| {
        steps[j + 1..].iter().all(|si| sj.v.support().intersect(si.w.support()).is_empty())
    });

    let circuit = Circuit { layers, spacing: ell };
    let a = Circuit { layers: interleaved, spacing: ell }.apply(psi.amplitudes(), chain)?;
    let b = circuit.apply(psi.amplitudes(), chain)?;
    let reorder_error = (&a - &b).norm().as_f64();
    let reference = product_vector(phi, 0..n);
    let final_product_fidelity = linalg::inner(&reference, &b).modulus().as_f64().min(1.0);

    let report = DisentangleReport {
        ell,
        ell0: opts.ell0,
        cut_fidelity: first.fidelity.as_f64(),
        cut_radius: first.radius,
        per_step: steps
            .iter()
            .map(|s| StepRecord {
                x: s.x,
                fidelity: s.fidelity,
                omega_overlap: s.omega_overlap,
                w_overlap: s.w_overlap,
                w_radius: s.w_radius,
                product_defect: s.product_defect,
                left_change: s.left_change,
                tail_fit: s.w.tail().fit.clone(),
            })
            .collect(),
        final_product_fidelity,
        reorder_error,
        commutation_audit,
        model: None,
    };
    Ok((circuit, report))
}

/// Reference products used by the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    Zero,
    Plus,
}

impl Reference {
    pub fn factors<T: Real>(self, chain: &SiteSpec) -> Vec<CVec<T>> {
        (0..chain.len())
            .map(|s| {
                let d = chain.dim(s);
                match self {
                    Reference::Zero => {
                        let mut v = CVec::zeros(d);
                        v[0] = cr(T::one());
                        v
                    }
                    Reference::Plus => CVec::from_element(d, cr(T::one() / T::from_usize_lossy(d).sqrt())),
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CompositionReport {
    /// `‖α_M(A) − α_{M−1}(A)‖` for `M = 1, …`.
    pub differences: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<DecayFit>,
    /// First `M` from which every difference is below the floor.
    pub converged_at: Option<usize>,
}

/// `α_M = Ad_{L_0} ∘ … ∘ Ad_{L_{M−1}}` on `probe`, `Ad_L(A) = L† A L`.
pub fn heisenberg<T: Real>(layers: &[LocalOperator<T>], probe: &LocalOperator<T>, chain: &SiteSpec) -> Result<LocalOperator<T>> {
    layers.iter().rev().try_fold(probe.clone(), |acc, l| acc.conjugate_by(l, chain))
}

fn check_spacing<T: Real>(layers: &[AnchoredUnitary<T>], spacing: usize, n: usize) -> Result<()> {
    for w in layers.windows(2) {
        let (a, b) = (w[0].anchor(), w[1].anchor());
        let at_end = |s: usize| s == 0 || s + 1 == n;
        if a.abs_diff(b) < spacing && !(at_end(a) || at_end(b)) {
            return Err(Error::Spacing(format!("anchors {a} and {b} are closer than {spacing}")));
        }
    }
    Ok(())
}

/// Prefix differences of the nested composition of `layers` on `probe`.
pub fn compose_anchored<T: Real>(
    layers: &[AnchoredUnitary<T>],
    spacing: usize,
    probe: &LocalOperator<T>,
    chain: &SiteSpec,
) -> Result<CompositionReport> {
    check_spacing(layers, spacing, chain.len())?;
    // the outer layers act isometrically, so α_M(A) − α_{M−1}(A) has the
    // norm of L_{M−1}† A L_{M−1} − A
    let differences: Vec<f64> = layers
        .iter()
        .map(|l| probe.conjugate_by(&l.operator(), chain).and_then(|c| c.distance(probe, chain)).map(|d| d.as_f64()))
        .collect::<Result<_>>()?;
    let converged_at = (0..=differences.len())
        .find(|&m| differences[m..].iter().all(|&d| d < COMPOSITION_FLOOR))
        .map(|m| m + 1);
    let points: Vec<(f64, f64)> = differences.iter().enumerate().map(|(i, &d)| ((i + 1) as f64, d)).collect();
    Ok(CompositionReport { fit: fit_exponential(&points).ok(), differences, converged_at })
}

#[derive(Clone, Debug, Serialize)]
pub struct SwapDemo {
    pub spacing: usize,
    /// `max_M ‖δ_0 ∘ … ∘ δ_M(A_M) − A_0‖`.
    pub transport_error: f64,
    /// `‖δ_0 ∘ … ∘ δ_M(A_M) − A_M‖` per `M`.
    pub displacement: Vec<f64>,
    /// Prefix differences for a probe at site `0`.
    pub differences: Vec<f64>,
}

fn swap_gate<T: Real>(d: usize) -> CMat<T> {
    let mut m = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + j, j * d + i)] = cr(T::one());
        }
    }
    m
}

/// Layers `δ_k` of the swap chain with spacing `ℓ`: for `ℓ = 1`, `δ_k`
/// swaps sites `k−1, k` (`δ_0` is the identity at the left edge); for
/// `ℓ ≥ 2`, `δ_k` swaps sites `kℓ, kℓ+1`.
pub fn swap_layers<T: Real>(spacing: usize, chain: &SiteSpec) -> Result<Vec<AnchoredUnitary<T>>> {
    let n = chain.len();
    let d = chain.dim(0);
    if chain.dims().iter().any(|&e| e != d) {
        return Err(Error::Dimension("swap chain needs equal site dimensions".into()));
    }
    let mut out = Vec::new();
    if spacing == 1 {
        out.push(AnchoredUnitary::identity(Interval::site(0, n)?, 0, chain)?);
        for k in 1..n {
            out.push(AnchoredUnitary::new(Interval::new(k - 1, k, n)?, swap_gate(d), k, chain)?);
        }
    } else {
        let mut k = 0;
        while k + 1 < n {
            out.push(AnchoredUnitary::new(Interval::new(k, k + 1, n)?, swap_gate(d), k, chain)?);
            k += spacing;
        }
    }
    Ok(out)
}

/// The swap example with probe `A` (a single-site operator).
pub fn swap_demo<T: Real>(spacing: usize, a: &CMat<T>, chain: &SiteSpec) -> Result<SwapDemo> {
    let layers = swap_layers(spacing, chain)?;
    let ops: Vec<LocalOperator<T>> = layers.iter().map(|l| l.operator()).collect();
    let a0 = LocalOperator::single(0, a.clone());
    let mut transport_error = 0.0f64;
    let mut displacement = Vec::new();
    for m in 0..layers.len() {
        let site = if spacing == 1 { m } else { m * spacing };
        let am = LocalOperator::single(site, a.clone());
        let out = heisenberg(&ops[..=m], &am, chain)?;
        transport_error = transport_error.max(out.distance(&a0, chain)?.as_f64());
        displacement.push(out.distance(&am, chain)?.as_f64());
    }
    let report = compose_anchored(&layers, spacing, &a0, chain)?;
    Ok(SwapDemo { spacing, transport_error, displacement, differences: report.differences })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ops;

    #[test]
    fn tie_break_picks_first_basis_vector() {
        let bell = PureState::<f64>::normalized(
            CVec::from_vec(vec![cr(1.0), cr(0.0), cr(0.0), cr(1.0)]),
            SiteSpec::qubits(2),
        )
        .unwrap();
        let c = factorized_candidate(&bell, 0, 1).unwrap();
        assert!(c.degenerate);
        assert!((c.mu1 - 0.25).abs() < 1e-14);
        let expect = [1.0, 0.0, 0.0, 0.0];
        for (z, e) in c.product.amplitudes().iter().zip(expect) {
            assert!((z - cr(e)).norm() < 1e-12);
        }
    }

    #[test]
    fn product_candidate_is_the_state() {
        let psi = PureState::<f64>::product(&[ops::ket_plus(), ops::ket0(), ops::ket_plus()]).unwrap();
        let c = factorized_candidate(&psi, 1, 1).unwrap();
        assert!((c.mu1 - 1.0).abs() < 1e-12);
        assert!((c.product.overlap(&psi) - 1.0).abs() < 1e-12);
        assert!(!c.degenerate);
    }

    #[test]
    fn product_state_cut_is_identity() {
        let psi = PureState::<f64>::product(&vec![ops::ket_plus(); 4]).unwrap();
        let cut = cutting_unitary(&psi, 1, 1, CUT_TOL).unwrap();
        assert_eq!(cut.radius, 1);
        assert!((cut.fidelity - 1.0).abs() < 1e-12);
        let id = linalg::identity::<f64>(cut.unitary.matrix().nrows());
        assert!(linalg::max_abs_diff(cut.unitary.matrix(), &id) < 1e-10);
        assert!(cut.unitary.tail().values.iter().all(|&t| t < 1e-10));
    }

    #[test]
    fn swap_gate_swaps() {
        let s = swap_gate::<f64>(2);
        let v = CVec::from_vec(vec![cr(0.0), cr(1.0), cr(0.0), cr(0.0)]);
        let w = &s * v;
        assert_eq!(w[2], cr(1.0));
    }

    #[test]
    fn spacing_violation() {
        let chain = SiteSpec::qubits(6);
        let layers = swap_layers::<f64>(2, &chain).unwrap();
        let probe = LocalOperator::single(0, ops::pauli_x::<f64>());
        assert!(compose_anchored(&layers, 2, &probe, &chain).is_ok());
        assert!(matches!(compose_anchored(&layers, 3, &probe, &chain), Err(Error::Spacing(_))));
    }
}
