//! Verification suites: the per-realization lemma suite across problems,
//! algorithms and accuracy probabilities, the statistical expectation checks,
//! and the random cubic-subproblem exactness suite.

use rayon::prelude::*;

use crate::cubic::{solve_cubic, verify_step_conditions, CubicSubproblem};
use crate::error::Result;
use crate::harness::diagnostics::{
    check_arc_lemmas, check_ls_true_small_successful, diagnose_trace, ArcLemmaConstants,
    ProcessDiagnostics,
};
use crate::harness::montecarlo::{Algorithm, ExperimentSpec, RunResult};
use crate::linesearch::{DirectionVariant, LsConfig, StopRegime};
use crate::oracles::OracleConfig;
use crate::problems::{make_pseudo_huber, make_quadratic, make_rosenbrock};
use crate::rng::{gaussian_vector, stream_rng};
use crate::arc::ArcConfig;
use nalgebra::DMatrix;

#[derive(Debug, Default)]
pub struct SuiteReport {
    pub runs: usize,
    pub violations: Vec<String>,
}

impl SuiteReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// One lemma-suite entry: a named experiment plus whether its Lipschitz
/// constants are analytic (estimated constants demote the constant-dependent
/// per-trace checks to the process diagnostics only).
pub struct SuiteEntry {
    pub name: &'static str,
    pub spec: ExperimentSpec,
    pub analytic: bool,
}

fn ls_cfg(alpha0: f64, alpha_max: f64) -> LsConfig {
    LsConfig {
        gamma: 0.5,
        theta: 0.5,
        alpha_max,
        alpha0,
        max_iters: 2_000_000,
        direction: DirectionVariant::Steepest,
        redraw_on_failure: true,
        kappa_delta: 2.0,
        xi0: 1.0,
    }
}

fn arc_cfg() -> ArcConfig {
    ArcConfig {
        gamma: 0.5,
        theta: 0.25,
        sigma_min: 1.0,
        sigma0: 8.0,
        kappa_theta: 0.5,
        max_iters: 200_000,
        kappa_delta: 2.0,
        xi0: 1.0,
    }
}

fn base_spec(spec_parts: (Algorithm, Option<LsConfig>, Option<ArcConfig>, StopRegime, f64)) -> ExperimentSpec {
    let (algorithm, ls, arc, stop_regime, eps) = spec_parts;
    let objective = make_quadratic(4, 100.0, 7).unwrap();
    let x0 = objective.default_x0.clone();
    ExperimentSpec {
        objective,
        x0,
        algorithm,
        ls_cfg: ls,
        arc_cfg: arc,
        oracle: OracleConfig::default(),
        stop_regime,
        p_grid: vec![0.6, 0.8, 1.0],
        eps_grid: vec![eps],
        replications: 1,
        master_seed: 20_240_101,
        check_lemmas: true,
    }
}

/// The cross product of problems and algorithm families used by the
/// per-realization lemma suite.
pub fn lemma_suite_entries() -> Result<Vec<SuiteEntry>> {
    let mut entries = Vec::new();

    let quad_ls = base_spec((
        Algorithm::LsSteepest,
        Some(ls_cfg(0.015, 0.02)),
        None,
        StopRegime::Gap,
        1e-3,
    ));
    entries.push(SuiteEntry {
        name: "quadratic/ls",
        spec: quad_ls,
        analytic: true,
    });

    let mut ph_ls = base_spec((
        Algorithm::LsSteepest,
        Some(ls_cfg(0.6, 1.2)),
        None,
        StopRegime::Gap,
        1e-3,
    ));
    ph_ls.objective = make_pseudo_huber(2)?;
    ph_ls.x0 = ph_ls.objective.default_x0.clone();
    entries.push(SuiteEntry {
        name: "pseudo_huber/ls",
        spec: ph_ls,
        analytic: true,
    });

    let mut rb_ls = base_spec((
        Algorithm::LsSteepest,
        Some(ls_cfg(5e-4, 1e-2)),
        None,
        StopRegime::GradNorm,
        1e-2,
    ));
    rb_ls.objective = make_rosenbrock(2, -2.0, 2.0)?;
    rb_ls.x0 = rb_ls.objective.default_x0.clone();
    entries.push(SuiteEntry {
        name: "rosenbrock/ls",
        spec: rb_ls,
        analytic: false,
    });

    let quad_arc = base_spec((Algorithm::Arc, None, Some(arc_cfg()), StopRegime::GradNorm, 1e-3));
    entries.push(SuiteEntry {
        name: "quadratic/arc",
        spec: quad_arc,
        analytic: true,
    });

    let mut ph_arc = base_spec((Algorithm::Arc, None, Some(arc_cfg()), StopRegime::GradNorm, 1e-3));
    ph_arc.objective = make_pseudo_huber(2)?;
    ph_arc.x0 = ph_arc.objective.default_x0.clone();
    entries.push(SuiteEntry {
        name: "pseudo_huber/arc",
        spec: ph_arc,
        analytic: true,
    });

    let mut rb_arc = base_spec((Algorithm::Arc, None, Some(arc_cfg()), StopRegime::GradNorm, 1e-2));
    rb_arc.objective = make_rosenbrock(2, -2.0, 2.0)?;
    rb_arc.x0 = rb_arc.objective.default_x0.clone();
    entries.push(SuiteEntry {
        name: "rosenbrock/arc",
        spec: rb_arc,
        analytic: false,
    });

    Ok(entries)
}

/// Statistical expectation checks over a set of diagnosed realizations at one
/// accuracy probability: the mean count of small-step iterations against
/// mean(N)/(2p), and mean false-vs-true iteration counts above C.
pub fn check_expectation_lemmas(
    diags: &[ProcessDiagnostics],
    hitting_times: &[usize],
    p: f64,
) -> Vec<String> {
    let mut v = Vec::new();
    let n = diags.len();
    if n < 2 {
        return v;
    }
    let ci = |xs: &[f64]| -> (f64, f64) {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        (m, 1.96 * var.sqrt() / (xs.len() as f64).sqrt())
    };
    let d1: Vec<f64> = diags
        .iter()
        .zip(hitting_times)
        .map(|(d, &ne)| d.small_total as f64 - ne as f64 / (2.0 * p))
        .collect();
    let (m1, h1) = ci(&d1);
    if m1 > h1 {
        v.push(format!(
            "mean small-step count exceeds mean(N)/(2p) beyond CI at p={p}: excess {m1} > {h1}"
        ));
    }
    let d2: Vec<f64> = diags
        .iter()
        .map(|d| d.m1 as f64 - (1.0 - p) / p * d.m2 as f64)
        .collect();
    let (m2, h2) = ci(&d2);
    if m2 > h2 {
        v.push(format!(
            "mean false count above C exceeds ((1-p)/p)*mean true count beyond CI at p={p}: excess {m2} > {h2}"
        ));
    }
    v
}

/// Runs the per-realization lemma suite: every entry, every p in its grid,
/// `seeds` independent realizations each. Returns all violations found.
pub fn run_lemma_suite(seeds: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::default();
    for entry in lemma_suite_entries()? {
        let spec = &entry.spec;
        spec.validate()?;
        let model = spec.bound_model()?;
        let lat = spec.lattice();
        let eps = spec.eps_grid[0];
        for (pi, &p) in spec.p_grid.iter().enumerate() {
            let results: Vec<Result<(Vec<String>, Option<ProcessDiagnostics>, Option<usize>)>> =
                (0..seeds)
                    .into_par_iter()
                    .map(|rep| {
                        let run = spec.run_realization(p, eps, pi as u64, rep as u64)?;
                        let mut local = Vec::new();
                        let d = diagnose_trace(
                            run.trace(),
                            &lat,
                            model.c(),
                            model.gain_cap(eps),
                            &|a| model.h(eps, a),
                        )?;
                        for msg in &d.violations {
                            local.push(format!("{}/p={p}/seed={rep}: {msg}", entry.name));
                        }
                        match &run {
                            RunResult::Ls(trace) => {
                                if entry.analytic {
                                    for msg in check_ls_true_small_successful(trace, model.c()) {
                                        local.push(format!(
                                            "{}/p={p}/seed={rep}: {msg}",
                                            entry.name
                                        ));
                                    }
                                }
                            }
                            RunResult::Arc(arc_run) => {
                                if entry.analytic {
                                    let cfg = spec.arc_cfg.as_ref().unwrap();
                                    let k = ArcLemmaConstants {
                                        theta: cfg.theta,
                                        kappa_theta: cfg.kappa_theta,
                                        sigma_min: cfg.sigma_min,
                                        kappa_g: spec.oracle.kappa_g,
                                        kappa_h: spec.oracle.kappa_h,
                                        lip_grad: spec.objective.lip_grad,
                                        lip_hess: spec.objective.lip_hess.unwrap_or(0.0),
                                    };
                                    for msg in check_arc_lemmas(arc_run, &k) {
                                        local.push(format!(
                                            "{}/p={p}/seed={rep}: {msg}",
                                            entry.name
                                        ));
                                    }
                                }
                            }
                        }
                        let hit = run.trace().hit;
                        Ok((local, Some(d), hit))
                    })
                    .collect();
            let mut diags = Vec::new();
            let mut hits = Vec::new();
            for r in results {
                let (local, d, hit) = r?;
                report.runs += 1;
                report.violations.extend(local);
                if let (Some(d), Some(n)) = (d, hit) {
                    diags.push(d);
                    hits.push(n);
                }
            }
            for msg in check_expectation_lemmas(&diags, &hits, p) {
                report.violations.push(format!("{}: {msg}", entry.name));
            }
        }
    }
    Ok(report)
}

/// Random cubic subproblems checked against the step optimality conditions
/// and the model-decrease guarantee.
pub fn run_subproblem_suite(count: usize, dims: &[usize], master_seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::default();
    for (di, &n) in dims.iter().enumerate() {
        let checks: Vec<Vec<String>> = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(master_seed, di as u64, i as u64);
                let g = gaussian_vector(&mut rng, n);
                let a = DMatrix::from_fn(n, n, |_, _| {
                    use rand::Rng;
                    rng.gen_range(-1.0..1.0)
                });
                let b = (&a + a.transpose()) * 1.5;
                let sigma = {
                    use rand::Rng;
                    rng.gen_range(0.05..10.0)
                };
                let sub = CubicSubproblem {
                    g,
                    b,
                    sigma,
                    kappa_theta: 0.5,
                };
                let mut local = Vec::new();
                match solve_cubic(&sub) {
                    Err(e) => local.push(format!("dim {n} instance {i}: solver error {e}")),
                    Ok(step) => {
                        let rep = verify_step_conditions(&sub, &step.s);
                        let scale = 1.0 + sub.g.norm() + sigma * step.s.norm().powi(3);
                        if rep.eq42_res1 > 1e-8 * scale {
                            local.push(format!(
                                "dim {n} instance {i}: stationarity residual {}",
                                rep.eq42_res1
                            ));
                        }
                        if !rep.eq42_ineq_holds {
                            local.push(format!("dim {n} instance {i}: curvature condition failed"));
                        }
                        if !rep.eq43_holds {
                            local.push(format!(
                                "dim {n} instance {i}: model-gradient condition failed ({})",
                                rep.model_grad_norm
                            ));
                        }
                        if !rep.decrease_bound_holds {
                            local.push(format!("dim {n} instance {i}: decrease bound failed"));
                        }
                    }
                }
                local
            })
            .collect();
        for local in checks {
            report.runs += 1;
            report.violations.extend(local);
        }
    }
    Ok(report)
}
