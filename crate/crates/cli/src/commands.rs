use serde_json::{json, Value};
use sre_core::analysis::{clustering_curve, fit_exponential, CurvePoint};
use sre_core::disentangler::{closeness_profile, cutting_unitary, disentangle, local_approximant};
use sre_core::eigensolver::{gap_condition_check, solve_interaction};
use sre_core::model::ops;
use sre_core::schmidt::{schmidt, schmidt_functional_check, schmidt_tail, schmidt_tail_exponent, FUNCTIONAL_RANK_CAP};
use sre_core::{appendix, Error, Interaction, Interval, Matrix, State};

use crate::config::{RunConfig, StateChoice};
use crate::output::{Output, Row};
use crate::Failure;

fn step(e: Error) -> Failure {
    Failure::Step(e.to_string())
}

fn config(e: Error) -> Failure {
    Failure::Config(e.to_string())
}

fn build(cfg: &RunConfig) -> Result<Interaction, Failure> {
    cfg.model()?.build().map_err(config)
}

/// Exponential fit, or the flag `no decay data` when too few points are
/// above the noise floor.
fn fit_or_flag(points: &[(f64, f64)]) -> Value {
    match fit_exponential(points) {
        Ok(fit) => json!(fit),
        Err(Error::InsufficientDecayData(k)) => json!({ "flag": "no decay data", "usable_points": k }),
        Err(e) => json!({ "flag": e.to_string() }),
    }
}

fn rows(group: &str, points: impl IntoIterator<Item = (f64, f64)>) -> Vec<Row> {
    points.into_iter().map(|(parameter, value)| Row { parameter, value, group: group.to_string() }).collect()
}

fn pairs(points: &[CurvePoint]) -> Vec<(f64, f64)> {
    points.iter().map(|p| (p.parameter, p.value)).collect()
}

/// The configured state together with a solver summary when it came from
/// the eigensolver.
fn prepare_state(cfg: &RunConfig) -> Result<(State, Value), Failure> {
    let interaction = build(cfg)?;
    match cfg.state {
        StateChoice::Ghz => {
            let chain = interaction.chain();
            if chain.dims().iter().any(|&d| d != 2) {
                return Err(Failure::Config("the GHZ state needs a qubit chain".into()));
            }
            let psi = State::ghz(chain.len()).map_err(config)?;
            Ok((psi, json!({ "state": "ghz" })))
        }
        StateChoice::Ground => {
            let res = solve_interaction(&interaction, &cfg.solve_options()).map_err(|e| Failure::Solver(e.to_string()))?;
            if res.degenerate {
                return Err(Failure::Degenerate(format!(
                    "gap {:e} is below the degeneracy tolerance {:e}",
                    res.gap, res.degeneracy_tol
                )));
            }
            let summary = json!({ "state": "ground", "E0": res.energy0, "gap": res.gap, "residual": res.residual });
            Ok((res.psi, summary))
        }
    }
}

pub fn solve(cfg: &RunConfig, out: &Output) -> Result<(), Failure> {
    let spec = cfg.model()?;
    let interaction = build(cfg)?;
    let res = solve_interaction(&interaction, &cfg.solve_options()).map_err(|e| Failure::Solver(e.to_string()))?;
    let check = gap_condition_check(&res, &interaction, cfg.solver.gap_samples, cfg.seed())
        .map_err(|e| Failure::Solver(e.to_string()))?;
    out.report(&json!({
        "model": spec,
        "dim": res.psi.dim(),
        "method": res.method,
        "iterations": res.iterations,
        "E0": res.energy0,
        "E1": res.energy1,
        "gap": res.gap,
        "residual": res.residual,
        "degenerate": res.degenerate,
        "degeneracy_tol": res.degeneracy_tol,
        "gap_condition_min_ratio": check.min_ratio,
        "gap_condition": check,
    }))?;
    if res.degenerate {
        return Err(Failure::Degenerate(format!("gap {:e} is below {:e}", res.gap, res.degeneracy_tol)));
    }
    Ok(())
}

fn observable(name: &str, d: usize) -> Result<Matrix, Failure> {
    let index = match name {
        "x" => 0,
        "y" => 1,
        "z" => 2,
        other => return Err(Failure::Config(format!("unknown observable '{other}' (use x, y or z)"))),
    };
    match d {
        2 => Ok([ops::pauli_x(), ops::pauli_y(), ops::pauli_z()][index].clone()),
        3 => Ok(ops::spin1()[index].clone()),
        _ => Err(Failure::Config(format!("no named observables for site dimension {d}"))),
    }
}

pub fn analyze(cfg: &RunConfig, out: &Output) -> Result<(), Failure> {
    let (psi, state) = prepare_state(cfg)?;
    let n = psi.len();
    let a = &cfg.analysis;
    let dims = psi.sites().dims();
    if dims.iter().any(|&d| d != dims[0]) {
        return Err(Failure::Config("analysis needs equal site dimensions".into()));
    }
    let mut csv = Vec::new();

    let obs = a.observables.iter().map(|o| observable(o, dims[0])).collect::<Result<Vec<_>, _>>()?;
    let clustering = clustering_curve(&psi, &obs).map_err(step)?;
    csv.extend(rows("clustering", pairs(&clustering)));

    let x = a.mutual_x.unwrap_or(n / 2);
    if x >= n {
        return Err(Failure::Config(format!("analysis.mutual_x = {x} is outside the chain")));
    }
    let ells = a.ells.clone().unwrap_or_else(|| (1..=n / 2).collect());
    let mutual = sre_core::analysis::mutual_correlation_curve(&psi, x, &ells).map_err(step)?;
    csv.extend(rows("mutual_correlation", pairs(&mutual.points)));

    let cuts = a.cut_sites.clone().unwrap_or_else(|| vec![(n / 2).saturating_sub(1)]);
    let mut schmidt_tables = Vec::new();
    for &c in &cuts {
        if c + 1 >= n {
            return Err(Failure::Config(format!("cut site {c} needs a nonempty right half")));
        }
        let data = schmidt(&psi, c).map_err(step)?;
        let tails = a
            .k_stars
            .iter()
            .map(|&k| Ok((k as f64, schmidt_tail(&data, k)?)))
            .collect::<Result<Vec<_>, Error>>()
            .map_err(step)?;
        csv.extend(rows(&format!("schmidt_tail_x{c}"), tails.iter().copied()));
        csv.extend(rows(
            &format!("schmidt_spectrum_x{c}"),
            data.lambdas.iter().enumerate().map(|(j, &l)| ((j + 1) as f64, l)),
        ));
        let exponent = match schmidt_tail_exponent(&data, &a.k_stars) {
            Ok(fit) => json!(fit),
            Err(Error::InsufficientDecayData(k)) => json!({ "flag": "no decay data", "usable_points": k }),
            Err(e) => return Err(step(e)),
        };
        schmidt_tables.push(json!({
            "x": c,
            "rank": data.rank(),
            "spectrum": data.lambdas,
            "tails": tails.iter().map(|&(k, t)| json!({ "k": k as usize, "tail": t })).collect::<Vec<_>>(),
            "power_fit": exponent,
        }));
    }

    let mut functional = Vec::new();
    if let Some(f) = &a.functional {
        let interval = Interval::new(f.interval[0], f.interval[1], n).map_err(config)?;
        for &ell in &f.ells {
            let r = schmidt_functional_check(&psi, &interval, ell, FUNCTIONAL_RANK_CAP).map_err(step)?;
            csv.push(Row { parameter: ell as f64, value: r.max_rescaled(), group: "functional_max_rescaled".into() });
            functional.push(r);
        }
    }

    out.curves(&csv)?;
    out.report(&json!({
        "model": cfg.model,
        "state": state,
        "clustering": { "points": clustering, "fit": fit_or_flag(&pairs(&clustering)) },
        "mutual_correlation": {
            "x": mutual.x,
            "points": mutual.points,
            "skipped": mutual.skipped,
            "fit": fit_or_flag(&pairs(&mutual.points)),
        },
        "schmidt": schmidt_tables,
        "functional": functional,
    }))?;
    Ok(())
}

pub fn cut(cfg: &RunConfig, out: &Output) -> Result<(), Failure> {
    let (psi, state) = prepare_state(cfg)?;
    let n = psi.len();
    let chain = psi.sites();
    let x = cfg.cut.x.unwrap_or((n / 2).saturating_sub(1));
    if x + 1 >= n {
        return Err(Failure::Config(format!("cut.x = {x} needs a nonempty right half")));
    }
    let result = cutting_unitary(&psi, x, cfg.cut.ell0, cfg.cut.tol).map_err(step)?;
    let closeness = closeness_profile(&psi, result.product_state(), x).map_err(step)?;
    let mut approximants = Vec::new();
    for r in 0..=result.radius {
        approximants.push(match local_approximant(&result.unitary, r, chain) {
            Ok(a) => json!({
                "radius": r,
                "distance": a.distance,
                "polar_deficiency": a.polar_deficiency,
                "tail": a.tail,
            }),
            Err(e) => json!({ "radius": r, "error": e.to_string() }),
        });
    }
    let tail = result.unitary.tail();

    let mut csv = rows("tail", tail.values.iter().enumerate().map(|(i, &v)| (i as f64, v)));
    csv.extend(rows("overlap_defect", result.overlaps.iter().map(|&(r, o)| (r as f64, 1.0 - o))));
    csv.extend(rows("closeness", closeness.iter().map(|&(r, d)| (r as f64, d))));
    csv.extend(rows(
        "approximant_distance",
        approximants.iter().filter_map(|a| Some((a["radius"].as_f64()?, a["distance"].as_f64()?))),
    ));
    out.curves(&csv)?;
    out.report(&json!({
        "model": cfg.model,
        "state": state,
        "x": x,
        "ell0": cfg.cut.ell0,
        "tol": cfg.cut.tol,
        "fidelity": result.fidelity,
        "radius": result.radius,
        "saturated": result.saturated,
        "mu1": result.mu1(),
        "candidate_degenerate": result.candidate.degenerate,
        "diagnostics": result.candidate.diagnostics,
        "overlaps": result.overlaps,
        "tail": tail,
        "closeness": closeness,
        "approximants": approximants,
    }))?;
    Ok(())
}

pub fn disentangle_chain(cfg: &RunConfig, out: &Output) -> Result<(), Failure> {
    let (psi, state) = prepare_state(cfg)?;
    let d = &cfg.disentangle;
    let phi = d.reference.factors(psi.sites());
    let (circuit, mut report) = match disentangle(&psi, d.ell, &phi, &d.options()) {
        Ok(pair) => pair,
        Err(e) => {
            let (index, capped) = match &e {
                Error::Step { index, source } => (Some(*index), matches!(**source, Error::SupportCap { .. })),
                _ => (None, false),
            };
            out.report(&json!({
                "model": cfg.model,
                "state": state,
                "error": e.to_string(),
                "failed_step": index,
                "gapless_suspected": capped,
            }))?;
            return Err(step(e));
        }
    };
    report.model = cfg.model.as_ref().map(|m| json!(m));
    let n = psi.len();
    let pass = report.final_product_fidelity >= d.threshold;
    // a cut that needs the whole chain signals missing locality
    let saturated_cut = report.cut_radius + 1 >= n;
    let mut csv = rows("step_fidelity", report.per_step.iter().map(|s| (s.x as f64, s.fidelity)));
    csv.extend(rows("w_radius", report.per_step.iter().map(|s| (s.x as f64, s.w_radius as f64))));
    csv.extend(rows("product_defect", report.per_step.iter().map(|s| (s.x as f64, s.product_defect))));
    out.circuit(&circuit.to_json().map_err(step)?)?;
    out.curves(&csv)?;
    out.report(&json!({
        "state": state,
        "report": report,
        "reference": d.reference,
        "threshold": d.threshold,
        "pass": pass,
        "gapless_suspected": saturated_cut || !pass,
    }))?;
    if !pass {
        return Err(Failure::Step(format!(
            "final product fidelity {:.9} is below the threshold {}",
            report.final_product_fidelity, d.threshold
        )));
    }
    Ok(())
}

pub fn verify_appendix(cfg: &RunConfig, out: &Output) -> Result<(), Failure> {
    let report = appendix::run_all(cfg.seed(), &cfg.appendix).map_err(|e| Failure::Verification(e.to_string()))?;
    let failures = report.failures();
    let summary = vec![
        format!("transport detected: {}", report.swap.transport_detected),
        format!("decoupled blocks: {}", report.swap.decoupled_blocks),
    ];
    let mut csv = rows(
        "duhamel_constant",
        report.duhamel_scaling.iter().map(|e| (e.lambda, e.constant)),
    );
    csv.extend(rows(
        "swap_spacing1_displacement",
        report.swap.spacing_one_displacement.iter().enumerate().map(|(m, &v)| (m as f64, v)),
    ));
    csv.extend(rows(
        "swap_spacing2_differences",
        report.swap.spacing_two_differences.iter().enumerate().map(|(m, &v)| ((m + 1) as f64, v)),
    ));
    out.curves(&csv)?;
    out.report(&json!({
        "suites": report,
        "summary": summary,
        "failed_suites": failures,
        "pass": failures.is_empty(),
    }))?;
    if !failures.is_empty() {
        return Err(Failure::Verification(format!("failed suites: {}", failures.join(", "))));
    }
    Ok(())
}
