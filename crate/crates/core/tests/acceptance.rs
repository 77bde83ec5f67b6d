//! Acceptance report: one PASS/FAIL line per criterion and a summary.
//! With `SRE_ACCEPTANCE_STRICT=1` a failing criterion makes the exit status
//! nonzero; by default the report is informational so that the remaining
//! test targets still run.

mod common;

use std::time::Instant;

use common::*;
use sre_core::analysis::{clustering_curve, fit_exponential, mutual_correlation_curve};
use sre_core::appendix;
use sre_core::disentangler::{
    compose_anchored, cutting_unitary, disentangle, Circuit, DisentangleOptions, LayerRole, Reference, CUT_TOL,
};
use sre_core::eigensolver::{solve_interaction, SolveOptions};
use sre_core::model::{ops, preset_product, preset_tfim, Boundary};
use sre_core::schmidt::{schmidt, schmidt_tail};
use sre_core::{linalg, random, Operator, SiteSpec, State};

struct Report {
    failed: Vec<&'static str>,
    total: usize,
}

impl Report {
    fn line(&mut self, name: &'static str, pass: bool, detail: String) {
        self.total += 1;
        if !pass {
            self.failed.push(name);
        }
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn ground(n: usize, g: f64) -> State {
    let h = preset_tfim::<f64>(n, g, Boundary::Open).unwrap();
    solve_interaction(&h, &SolveOptions::default()).unwrap().psi
}

fn fit_window(points: &[(f64, f64)], lo: f64, hi: f64) -> Option<sre_core::analysis::DecayFit> {
    let window: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 >= lo && p.0 <= hi).collect();
    fit_exponential(&window).ok()
}

fn clustering(r: &mut Report, psi12: &State, solve_secs: f64) {
    let t = Instant::now();
    let curve = clustering_curve(psi12, &[ops::pauli_z()]).unwrap();
    let points: Vec<(f64, f64)> = curve.iter().map(|p| (p.parameter, p.value)).collect();
    let fit = fit_window(&points, 2.0, 5.0);
    let ghz = clustering_curve(&State::ghz(12).unwrap(), &[ops::pauli_z()]).unwrap();
    let ghz_points: Vec<(f64, f64)> = ghz.iter().map(|p| (p.parameter, p.value)).collect();
    let ghz_rate = fit_window(&ghz_points, 2.0, 5.0).map_or(f64::NAN, |f| f.rate);
    let secs = t.elapsed().as_secs_f64() + solve_secs;
    let (c, r2) = fit.as_ref().map_or((f64::NAN, f64::NAN), |f| (f.rate, f.r_squared.unwrap_or(f64::NAN)));
    r.line(
        "clustering",
        c > 0.0 && r2 >= 0.95 && ghz_rate.abs() < 1e-9 && secs < 60.0,
        format!("TFIM N=12 g=2 c={c:.4} r²={r2:.5} on 2..5; GHZ c={ghz_rate:.1e}; {secs:.1}s including the solve"),
    );
}

fn schmidt_tail_check(r: &mut Report, psi12: &State) {
    let data = schmidt(psi12, 5).unwrap();
    let tails: Vec<f64> = (1..=8).map(|k| schmidt_tail(&data, k).unwrap()).collect();
    // oracle: eigenvalues of M M† for the 64 × 64 coefficient matrix
    let m = M::from_fn(64, 64, |i, j| psi12.amplitudes()[i * 64 + j]);
    let mut lam: Vec<f64> = (&m * m.adjoint()).symmetric_eigen().eigenvalues.iter().copied().collect();
    lam.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let oracle: Vec<f64> = (0..8).map(|k| lam[k..].iter().map(|x| x.max(0.0)).sum()).collect();
    let decreasing = tails.windows(2).all(|w| w[1] < w[0]);
    let agree = tails.iter().zip(&oracle).all(|(a, b)| (a - b).abs() <= 0.1 * b.abs() + 1e-15);
    r.line(
        "schmidt-tail",
        decreasing && tails[7] < 1e-3 && agree,
        format!("x=5 tails k=2,4,8: {:.3e} {:.3e} {:.3e}; oracle {:.3e} {:.3e} {:.3e}", tails[1], tails[3], tails[7], oracle[1], oracle[3], oracle[7]),
    );
}

fn mutual(r: &mut Report, psi12: &State) {
    let m = mutual_correlation_curve(psi12, 6, &[1, 2, 3, 4, 5]).unwrap();
    let d: Vec<f64> = m.points.iter().map(|p| p.value).collect();
    let monotone = d.windows(2).all(|w| w[1] <= w[0] + 1e-10);
    let ratio = d[3] / d[0];
    let ghz = mutual_correlation_curve(&State::ghz(12).unwrap(), 6, &[1, 2, 3, 4, 5]).unwrap();
    let ghz_ok = ghz.points.iter().all(|p| (p.value - 1.0).abs() < 1e-9);
    r.line(
        "mutual-correlation",
        monotone && ratio <= 0.2 && ghz_ok && d.len() == 5,
        format!("D(1..5)={:?}; D(4)/D(1)={ratio:.4}; GHZ all 1: {ghz_ok}", d.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>()),
    );
}

fn cutting(r: &mut Report) {
    let psi = ground(10, 2.0);
    let cut = cutting_unitary(&psi, 4, 1, CUT_TOL).unwrap();
    let tail = cut.unitary.tail();
    let r2 = tail.fit.as_ref().and_then(|f| f.r_squared).unwrap_or(f64::NAN);
    let critical = cutting_unitary(&ground(10, 1.0), 4, 1, CUT_TOL).unwrap();
    r.line(
        "cutting",
        cut.fidelity >= 1.0 - 1e-6 && !cut.saturated && cut.radius <= 4 && r2 >= 0.9 && critical.saturated,
        format!(
            "g=2 x=4 ℓ₀=1: fidelity {:.9}, radius {}, tail {:?}, r²={r2:.4}; g=1 saturated: {} (radius {})",
            cut.fidelity,
            cut.radius,
            tail.values.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>(),
            critical.saturated,
            critical.radius
        ),
    );
    let wide = cutting_unitary(&psi, 4, 2, CUT_TOL).unwrap();
    let wide_r2 = wide.unitary.tail().fit.as_ref().and_then(|f| f.r_squared).unwrap_or(f64::NAN);
    println!("     info: same cut with ℓ₀=2 reaches radius {} (r²={wide_r2:.4})", wide.radius);
}

fn disentangling(r: &mut Report, psi12: &State) -> Circuit<f64> {
    let t = Instant::now();
    let phi = Reference::Zero.factors(psi12.sites());
    let opts = DisentangleOptions::default();
    let mut fid = Vec::new();
    let mut kept = None;
    for ell in [2, 3, 4] {
        let (circuit, report) = disentangle(psi12, ell, &phi, &opts).unwrap();
        fid.push(report.final_product_fidelity);
        if ell == 3 {
            kept = Some(circuit);
        }
    }
    let product = solve_interaction(&preset_product::<f64>(8).unwrap(), &SolveOptions::default()).unwrap().psi;
    let (_, pr) = disentangle(&product, 3, &Reference::Zero.factors(product.sites()), &opts).unwrap();
    let secs = t.elapsed().as_secs_f64();
    r.line(
        "disentangling",
        fid[1] >= 0.99 && fid[2] >= fid[0] - 1e-9 && (pr.final_product_fidelity - 1.0).abs() <= 1e-9 && secs < 600.0,
        format!(
            "TFIM N=12 g=2 fidelity ℓ=2,3,4: {:.9} {:.9} {:.9}; product {:.12}; {secs:.1}s",
            fid[0], fid[1], fid[2], pr.final_product_fidelity
        ),
    );
    kept.unwrap()
}

fn appendix_a(r: &mut Report) {
    let f = appendix::fvdg_suite(0, 1000, 8);
    let u = appendix::uhlmann_suite(0, 200).unwrap();
    let c = appendix::cptp_suite(0, 100).unwrap();
    r.line(
        "appendix-a",
        f.pass && u.pass && c.pass,
        format!(
            "FvdG violations {}/1000; Uhlmann max error {:.1e}; CPTP completeness {:.1e}, Gram {:.1e}",
            f.violations, u.max_equality_error, c.max_completeness_error, c.max_gram_error
        ),
    );
}

fn appendix_b(r: &mut Report) {
    let ranks = appendix::rank_suite(0, 500, &[0.1, 0.25, 0.5], 8);
    let lip = appendix::lipschitz_suite(0, 500, 0.3, 8).unwrap();
    let scaling = appendix::duhamel_scaling(&[0.5, 0.25]).unwrap();
    let ratios: Vec<f64> = scaling.iter().map(|e| e.ratio_to_half).collect();
    let scaling_ok = ratios.iter().all(|q| (6.0..=10.0).contains(q));
    r.line(
        "appendix-b",
        ranks.iter().all(|e| e.pass) && lip.pass && scaling_ok,
        format!(
            "max rank {:?} vs bounds {:?}; Lipschitz violations {}/500 (L(0.3)={:.3}); L(λ/2)/L(λ) = {:?} (want [6, 10])",
            ranks.iter().map(|e| e.max_rank).collect::<Vec<_>>(),
            ranks.iter().map(|e| e.bound).collect::<Vec<_>>(),
            lip.violations,
            lip.constant,
            ratios.iter().map(|q| format!("{q:.3}")).collect::<Vec<_>>()
        ),
    );
}

fn appendix_c(r: &mut Report, circuit: &Circuit<f64>, psi12: &State) {
    let swap = appendix::swap_suite(8).unwrap();
    let chain = psi12.sites();
    let ws: Vec<_> = circuit.family(LayerRole::W).cloned().collect();
    let probe = Operator::single(6, ops::pauli_z());
    let comp = compose_anchored(&ws, circuit.spacing, &probe, chain).unwrap();
    let c = comp.fit.as_ref().map_or(f64::NAN, |f| f.rate);
    r.line(
        "appendix-c",
        swap.transport_error <= 1e-12 && swap.decoupled_blocks && c > 0.0,
        format!(
            "swap ℓ=1 transport error {:.1e}; ℓ=2 decoupled: {}; W prefix differences (probe Z₆) {:?}, fitted c = {c}",
            swap.transport_error,
            swap.decoupled_blocks,
            comp.differences.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>()
        ),
    );
}

fn oracle_equivalence(r: &mut Report) {
    let mut worst = 0.0f64;
    for n in 2..=6 {
        let amps = random_state(n, 100 + n as u64);
        let psi = State::new(amps.clone(), SiteSpec::qubits(n)).unwrap();
        let chain = SiteSpec::qubits(n);
        for keep in [vec![0], vec![n - 1], (0..n / 2).collect::<Vec<_>>(), vec![0, n - 1]] {
            let fast = psi.restrict_sites(&keep).unwrap();
            worst = worst.max(max_abs_diff(fast.matrix(), &partial_trace_pure(&amps, &keep, n)));
        }
        let mut rng = random::rng(n as u64);
        let d = 1 << n.min(5);
        let diff = random::density_matrix::<f64, _>(d, &mut rng) - random::density_matrix::<f64, _>(d, &mut rng);
        worst = worst.max((linalg::trace_norm(&diff) - trace_norm_hermitian(&diff)).abs());
        let m = random::ginibre::<f64, _>(d, d / 2, &mut rng);
        let s = linalg::singular_values(&m);
        for (a, b) in s.iter().zip(gram_eigenvalues(&m)) {
            worst = worst.max((a * a - b).abs());
        }
        let (ma, mb) = (random::ginibre::<f64, _>(2, 2, &mut rng), random::ginibre::<f64, _>(4, 4, &mut rng));
        let sb = vec![n - 2, n - 1];
        let comm = Operator::new(vec![n - 2], ma.clone())
            .unwrap()
            .commutator(&Operator::new(sb.clone(), mb.clone()).unwrap(), &chain)
            .unwrap();
        let (ea, eb) = (embed(&ma, &[n - 2], n), embed(&mb, &sb, n));
        worst = worst.max(max_abs_diff(&embed(comm.matrix(), comm.sites(), n), &(&ea * &eb - &eb * &ea)));
    }
    r.line("oracle-equivalence", worst <= 1e-10, format!("max deviation {worst:.2e} over N = 2..6"));
}

fn main() {
    let start = Instant::now();
    let mut r = Report { failed: Vec::new(), total: 0 };
    let psi12 = ground(12, 2.0);
    clustering(&mut r, &psi12, start.elapsed().as_secs_f64());
    schmidt_tail_check(&mut r, &psi12);
    mutual(&mut r, &psi12);
    cutting(&mut r);
    let circuit = disentangling(&mut r, &psi12);
    appendix_a(&mut r);
    appendix_b(&mut r);
    appendix_c(&mut r, &circuit, &psi12);
    oracle_equivalence(&mut r);
    println!(
        "acceptance: {}/{} criteria pass in {:.1}s{}",
        r.total - r.failed.len(),
        r.total,
        start.elapsed().as_secs_f64(),
        if r.failed.is_empty() { String::new() } else { format!("; failing: {}", r.failed.join(", ")) }
    );
    if !r.failed.is_empty() && std::env::var("SRE_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
