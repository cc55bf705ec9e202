//! Independent oracle for the process diagnostics: recount the iteration
//! classification from the serialized trace CSV alone and compare against
//! diagnose_trace's counters on the same run.

use rmopt::harness::diagnostics::diagnose_trace;
use rmopt::harness::montecarlo::{Algorithm, ExperimentSpec, RunResult};
use rmopt::linesearch::{DirectionVariant, LsConfig, StopRegime};
use rmopt::oracles::OracleConfig;
use rmopt::problems::make_rosenbrock;

#[test]
fn csv_recount_matches_diagnostics() {
    let objective = make_rosenbrock(2, -2.0, 2.0).unwrap();
    let x0 = objective.default_x0.clone();
    let spec = ExperimentSpec {
        objective,
        x0,
        algorithm: Algorithm::LsSteepest,
        ls_cfg: Some(LsConfig {
            gamma: 0.5,
            theta: 0.5,
            alpha_max: 1e-2,
            alpha0: 5e-4,
            max_iters: 2_000_000,
            direction: DirectionVariant::Steepest,
            redraw_on_failure: true,
            kappa_delta: 2.0,
            xi0: 1.0,
        }),
        arc_cfg: None,
        oracle: OracleConfig::default(),
        stop_regime: StopRegime::GradNorm,
        p_grid: vec![0.7],
        eps_grid: vec![1e-2],
        replications: 1,
        master_seed: 777,
        check_lemmas: true,
    };
    spec.validate().unwrap();
    let model = spec.bound_model().unwrap();
    let lat = spec.lattice();
    let eps = 1e-2;

    let run = spec.run_realization(0.7, eps, 0, 0).unwrap();
    let trace = match &run {
        RunResult::Ls(t) => t,
        RunResult::Arc(_) => unreachable!(),
    };
    let hit = trace.hit.expect("run must hit");
    let d = diagnose_trace(trace, &lat, model.c(), model.gain_cap(eps), &|a| {
        model.h(eps, a)
    })
    .unwrap();
    assert!(d.is_clean(), "{:?}", d.violations);

    // Threshold snapped down onto the alpha0-lattice, recomputed from scratch.
    let cfg = spec.ls_cfg.as_ref().unwrap();
    let c_exp = ((model.c() / cfg.alpha0).ln() / cfg.gamma.ln() - 1e-9).ceil();
    let c_lat = cfg.alpha0 * cfg.gamma.powf(c_exp);
    assert!(c_lat <= model.c() * (1.0 + 1e-12));

    // Recount from the CSV text alone, classifying alpha by value.
    let csv = trace.to_csv();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,alpha_or_inv_sigma,sigma,f,grad_norm,step_norm,is_true,is_successful,xi,rho"
    );
    let (mut n1, mut m1, mut n2, mut m2, mut n3, mut m3) = (0usize, 0, 0, 0, 0, 0);
    let mut rows = 0usize;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let k: usize = f[0].parse().unwrap();
        if k >= hit {
            continue;
        }
        rows += 1;
        let alpha: f64 = f[1].parse().unwrap();
        let is_true = f[6] == "1";
        let succ = f[7] == "1";
        let big_eq = alpha >= c_lat * (1.0 - 1e-9);
        let big = alpha > c_lat * (1.0 + 1e-9);
        if big_eq && !is_true {
            m1 += 1;
            if succ {
                n1 += 1;
            }
        }
        if big_eq && is_true {
            m2 += 1;
            if succ {
                n2 += 1;
            }
        }
        if big && !succ {
            m3 += 1;
            if is_true {
                n3 += 1;
            }
        }
    }
    assert_eq!(rows, d.total, "pre-hit row count");
    assert_eq!((n1, m1, n2, m2, n3, m3), (d.n1, d.m1, d.n2, d.m2, d.n3, d.m3));
    // The run must actually exercise both sides of the threshold.
    assert!(m2 > 0 && m3 > 0, "degenerate run: m2={m2} m3={m3}");
}
