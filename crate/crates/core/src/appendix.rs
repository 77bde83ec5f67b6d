//! Randomized verification suites for the fidelity, filter and composition
//! toolkits. Every suite is a pure function of its seed.

use serde::{Deserialize, Serialize};

use crate::disentangler::swap_demo;
use crate::error::Result;
use crate::filter::{apply_filter, build_filter, duhamel_constant, eigenvector_stability_check, random_instance, spectral_projector};
use crate::linalg;
use crate::model::ops;
use crate::random;
use crate::scalar::{cr, CMat};
use crate::state::SiteSpec;
use crate::uhlmann::{align_matrices, build_cptp, fidelity_matrices, fuchs_vdgraaf_check};

pub const FVDG_TOL: f64 = 1e-9;
pub const UHLMANN_TOL: f64 = 1e-8;
pub const CPTP_TOL: f64 = 1e-9;
pub const SWAP_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppendixOptions {
    pub fvdg_pairs: usize,
    pub fvdg_dim: usize,
    pub uhlmann_pairs: usize,
    pub cptp_pairs: usize,
    pub rank_matrices: usize,
    pub rank_lambdas: Vec<f64>,
    pub lipschitz_pairs: usize,
    pub lipschitz_lambda: f64,
    pub stability_draws: usize,
    pub scaling_lambdas: Vec<f64>,
    pub swap_sites: usize,
}

impl Default for AppendixOptions {
    fn default() -> Self {
        Self {
            fvdg_pairs: 1000,
            fvdg_dim: 8,
            uhlmann_pairs: 200,
            cptp_pairs: 100,
            rank_matrices: 500,
            rank_lambdas: vec![0.1, 0.25, 0.5],
            lipschitz_pairs: 500,
            lipschitz_lambda: 0.3,
            stability_draws: 30,
            scaling_lambdas: vec![0.5, 0.25, 0.125],
            swap_sites: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FvdgSuite {
    pub pairs: usize,
    pub violations: usize,
    /// Largest excess of either inequality.
    pub worst_excess: f64,
    pub pass: bool,
}

pub fn fvdg_suite(seed: u64, pairs: usize, d: usize) -> FvdgSuite {
    let mut rng = random::rng(seed);
    let mut violations = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let rho = random::density_matrix::<f64, _>(d, &mut rng);
        let sigma = random::density_matrix::<f64, _>(d, &mut rng);
        let r = fuchs_vdgraaf_check(&rho, &sigma);
        let excess = (r.lower - r.middle).max(r.middle - r.upper);
        worst_excess = worst_excess.max(excess);
        if excess > FVDG_TOL {
            violations += 1;
        }
    }
    FvdgSuite { pairs, violations, worst_excess, pass: violations == 0 }
}

#[derive(Clone, Debug, Serialize)]
pub struct UhlmannSuite {
    pub pairs: usize,
    /// `max |⟨η|(U⊗1)ξ⟩² − F(ρ_B, σ_B)|`.
    pub max_equality_error: f64,
    /// Largest amount by which a random unitary beats the alignment.
    pub max_random_excess: f64,
    pub pass: bool,
}

/// Purifications on `A ⊗ B` with `dim A = dim B = 4`.
pub fn uhlmann_suite(seed: u64, pairs: usize) -> Result<UhlmannSuite> {
    let (da, db) = (4, 4);
    let mut rng = random::rng(seed);
    let mut max_equality_error = 0.0f64;
    let mut max_random_excess = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let xi = random::ginibre::<f64, _>(da, db, &mut rng).normalize();
        let eta = random::ginibre::<f64, _>(da, db, &mut rng).normalize();
        let rho_b = xi.transpose() * xi.conjugate();
        let sigma_b = eta.transpose() * eta.conjugate();
        let align = align_matrices(&xi, &eta)?;
        let f = fidelity_matrices(&rho_b, &sigma_b);
        max_equality_error = max_equality_error.max((align.overlap * align.overlap - f).abs());
        for _ in 0..3 {
            let u = random::unitary::<f64, _>(da, &mut rng);
            let rotated = u * &xi;
            let ov = eta.iter().zip(rotated.iter()).fold(cr(0.0), |acc, (e, r)| acc + e.conj() * r).norm();
            max_random_excess = max_random_excess.max(ov - align.overlap);
        }
    }
    Ok(UhlmannSuite {
        pairs,
        max_equality_error,
        max_random_excess,
        pass: max_equality_error <= UHLMANN_TOL && max_random_excess <= UHLMANN_TOL,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CptpSuite {
    pub pairs: usize,
    pub max_completeness_error: f64,
    pub max_gram_error: f64,
    pub pass: bool,
}

/// Channels on `A` (dim 2) built from random `ξ` and `σ` on `A ⊗ B` (dim 2 × 2).
pub fn cptp_suite(seed: u64, pairs: usize) -> Result<CptpSuite> {
    let (da, total) = (2, 4);
    let mut rng = random::rng(seed);
    let mut max_completeness_error = 0.0f64;
    let mut max_gram_error = 0.0f64;
    for _ in 0..pairs {
        let xi = random::pure_vector::<f64, _>(total, &mut rng);
        let sigma = random::density_matrix::<f64, _>(total, &mut rng);
        let map = build_cptp(&xi, &sigma, da, total)?;
        max_completeness_error = max_completeness_error.max(map.completeness_error());
        max_gram_error = max_gram_error.max(map.gram_error(&xi));
    }
    Ok(CptpSuite {
        pairs,
        max_completeness_error,
        max_gram_error,
        pass: max_completeness_error <= CPTP_TOL && max_gram_error <= CPTP_TOL,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RankEntry {
    pub lambda: f64,
    pub matrices: usize,
    pub bound: usize,
    pub max_rank: usize,
    pub pass: bool,
}

/// `rank P ≤ ⌊2/λ⌋` for `P` the spectral projector on `[λ/2, 1]`.
pub fn rank_suite(seed: u64, matrices: usize, lambdas: &[f64], d: usize) -> Vec<RankEntry> {
    let mut rng = random::rng(seed);
    lambdas
        .iter()
        .map(|&lambda| {
            let bound = (2.0 / lambda).floor() as usize;
            let max_rank = (0..matrices)
                .map(|_| spectral_projector(&random::density_matrix::<f64, _>(d, &mut rng), lambda).1)
                .max()
                .unwrap_or(0);
            RankEntry { lambda, matrices, bound, max_rank, pass: max_rank <= bound }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzSuite {
    pub lambda: f64,
    pub constant: f64,
    pub pairs: usize,
    pub violations: usize,
    /// `max ‖F(σ) − F(ω)‖₁ / ‖σ − ω‖₁`.
    pub max_ratio: f64,
    pub pass: bool,
}

/// Pairs at three separations: independent draws and small perturbations.
pub fn lipschitz_suite(seed: u64, pairs: usize, lambda: f64, d: usize) -> Result<LipschitzSuite> {
    let filter = build_filter(lambda)?;
    let constant = duhamel_constant(&filter)?;
    let mut rng = random::rng(seed);
    let mut violations = 0;
    let mut max_ratio = 0.0f64;
    for i in 0..pairs {
        let omega = random::density_matrix::<f64, _>(d, &mut rng);
        let tau = random::density_matrix::<f64, _>(d, &mut rng);
        let t = [1.0, 1e-1, 1e-3][i % 3];
        let sigma = &omega * cr(1.0 - t) + tau * cr(t);
        let lhs = linalg::trace_norm(&(apply_filter(&filter, &sigma) - apply_filter(&filter, &omega)));
        let dist = linalg::trace_norm(&(&sigma - &omega));
        if dist > 0.0 {
            max_ratio = max_ratio.max(lhs / dist);
        }
        if lhs > constant * dist + 1e-12 {
            violations += 1;
        }
    }
    Ok(LipschitzSuite { lambda, constant, pairs, violations, max_ratio, pass: violations == 0 })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingEntry {
    pub lambda: f64,
    pub constant: f64,
    /// `L(λ/2) / L(λ)`.
    pub ratio_to_half: f64,
}

pub fn duhamel_scaling(lambdas: &[f64]) -> Result<Vec<ScalingEntry>> {
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let constant = duhamel_constant(&build_filter(lambda)?)?;
        let half = duhamel_constant(&build_filter(lambda / 2.0)?)?;
        out.push(ScalingEntry { lambda, constant, ratio_to_half: half / constant });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilitySuite {
    pub draws: usize,
    pub route_failures: usize,
    pub rank_failures: usize,
    pub form_failures: usize,
    pub max_projection_defect: f64,
    pub pass: bool,
}

/// The calibration geometry (`d = 8`, three `λ`, three mixing weights).
pub fn stability_suite(seed: u64, draws: usize) -> Result<StabilitySuite> {
    let mut rng = random::rng(seed);
    let (mut route_failures, mut rank_failures, mut form_failures) = (0, 0, 0);
    let mut max_projection_defect = 0.0f64;
    let mut total = 0;
    for lambda in [0.1, 0.25, 0.5] {
        for t in [1e-3, 1e-2, 1e-1] {
            for _ in 0..draws {
                let (omega, eta) = random_instance(8, lambda, &mut rng);
                let tau = random::density_matrix::<f64, _>(8, &mut rng);
                let sigma = &omega * cr(1.0 - t) + tau * cr(t);
                let r = eigenvector_stability_check(&sigma, &omega, &eta, lambda)?;
                route_failures += usize::from(!r.route_pass);
                rank_failures += usize::from(!r.rank_pass);
                form_failures += usize::from(!r.form_pass);
                max_projection_defect = max_projection_defect.max(r.projection_defect);
                total += 1;
            }
        }
    }
    Ok(StabilitySuite {
        draws: total,
        route_failures,
        rank_failures,
        form_failures,
        max_projection_defect,
        pass: route_failures == 0 && rank_failures == 0,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SwapSuite {
    pub sites: usize,
    pub transport_error: f64,
    pub transport_detected: bool,
    /// `‖δ_0 ∘ … ∘ δ_M(A_M) − A_M‖` with spacing 1; stays of order one.
    pub spacing_one_displacement: Vec<f64>,
    pub spacing_one_differences: Vec<f64>,
    pub spacing_two_differences: Vec<f64>,
    pub decoupled_blocks: bool,
    pub pass: bool,
}

pub fn swap_suite(sites: usize) -> Result<SwapSuite> {
    let chain = SiteSpec::qubits(sites);
    let probe: CMat<f64> = ops::pauli_z();
    let one = swap_demo(1, &probe, &chain)?;
    let two = swap_demo(2, &probe, &chain)?;
    let transport_detected = one.transport_error <= SWAP_TOL;
    // only the first block touches site 0
    let decoupled_blocks = two.differences.iter().skip(1).all(|&d| d <= SWAP_TOL);
    Ok(SwapSuite {
        sites,
        transport_error: one.transport_error,
        transport_detected,
        spacing_one_displacement: one.displacement,
        spacing_one_differences: one.differences,
        spacing_two_differences: two.differences,
        decoupled_blocks,
        pass: transport_detected && decoupled_blocks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendixReport {
    pub seed: u64,
    pub fvdg: FvdgSuite,
    pub uhlmann: UhlmannSuite,
    pub cptp: CptpSuite,
    pub filter_rank: Vec<RankEntry>,
    pub filter_lipschitz: LipschitzSuite,
    pub duhamel_scaling: Vec<ScalingEntry>,
    pub eigenvector_stability: StabilitySuite,
    pub swap: SwapSuite,
}

impl AppendixReport {
    /// Names of the suites that did not pass.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.fvdg.pass {
            out.push("fuchs-van-de-graaf");
        }
        if !self.uhlmann.pass {
            out.push("uhlmann-optimality");
        }
        if !self.cptp.pass {
            out.push("cptp");
        }
        if !(self.filter_rank.iter().all(|r| r.pass) && self.filter_lipschitz.pass) {
            out.push("filter-lipschitz");
        }
        if !self.eigenvector_stability.pass {
            out.push("eigenvector-stability");
        }
        if !self.swap.pass {
            out.push("swap-composition");
        }
        out
    }
}

/// Runs every suite, each on its own stream derived from `seed`.
pub fn run_all(seed: u64, opts: &AppendixOptions) -> Result<AppendixReport> {
    let d = opts.fvdg_dim;
    Ok(AppendixReport {
        seed,
        fvdg: fvdg_suite(seed, opts.fvdg_pairs, d),
        uhlmann: uhlmann_suite(seed.wrapping_add(1), opts.uhlmann_pairs)?,
        cptp: cptp_suite(seed.wrapping_add(2), opts.cptp_pairs)?,
        filter_rank: rank_suite(seed.wrapping_add(3), opts.rank_matrices, &opts.rank_lambdas, d),
        filter_lipschitz: lipschitz_suite(seed.wrapping_add(4), opts.lipschitz_pairs, opts.lipschitz_lambda, d)?,
        duhamel_scaling: duhamel_scaling(&opts.scaling_lambdas)?,
        eigenvector_stability: stability_suite(seed.wrapping_add(5), opts.stability_draws)?,
        swap: swap_suite(opts.swap_sites)?,
    })
}
