//! Per-realization diagnostics of the step-size/progress stochastic process,
//! plus the per-trace lemma checks for both algorithm families.

use crate::arc::{ArcRun, kappa_f, kappa_s, sigma_c};
use crate::error::{Error, Result};
use crate::trace::Trace;

/// Geometric lattice that the step parameter lives on: alpha = base * gamma^j.
/// j0 is the exponent of the initial step parameter.
#[derive(Debug, Clone, Copy)]
pub struct LatticeInfo {
    pub base: f64,
    pub j0: i64,
    pub gamma: f64,
}

impl LatticeInfo {
    /// Exponent of the largest lattice point that is <= C. Classifying
    /// iterations by integer exponent comparison keeps the per-realization
    /// counting arguments exact (no floating-point boundary ambiguity).
    pub fn threshold_exp(&self, c: f64) -> i64 {
        let x = (c / self.base).ln() / self.gamma.ln();
        (x - 1e-9).ceil() as i64
    }

    pub fn lattice_value(&self, j: i64) -> f64 {
        self.base * self.gamma.powi(j as i32)
    }
}

/// Counters of the hitting-time analysis, computed from one realization.
#[derive(Debug, Clone)]
pub struct ProcessDiagnostics {
    /// Raw threshold C from the regime constants.
    pub c_raw: f64,
    /// Largest lattice point <= C; all classification uses this value.
    pub c_lattice: f64,
    /// False successful iterations with step parameter >= C.
    pub n1: usize,
    /// False iterations with step parameter >= C.
    pub m1: usize,
    /// True successful iterations with step parameter >= C.
    pub n2: usize,
    /// True iterations with step parameter >= C.
    pub m2: usize,
    /// True unsuccessful iterations with step parameter > C.
    pub n3: usize,
    /// Unsuccessful iterations with step parameter > C.
    pub m3: usize,
    /// Successful iterations with step parameter <= C.
    pub small_successes: usize,
    /// Iterations with step parameter <= C (successful or not).
    pub small_total: usize,
    /// Total process iterations examined (radius-shrink steps excluded).
    pub total: usize,
    pub f_eps: f64,
    /// h evaluated at the lattice threshold.
    pub h_c: f64,
    /// Exact lattice count of shrink steps from the initial step parameter
    /// down to C (the log_gamma(C/alpha0) term), clamped at 0.
    pub log_term: i64,
    pub violations: Vec<String>,
}

impl ProcessDiagnostics {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scans the pre-hitting records of a trace, computes the process counters,
/// and checks every per-realization inequality of the generic analysis:
/// (a) prefix small-success bound (needs the run to start above C),
/// (b) the progress-budget cap on true successful iterations above C,
/// (c) the prefix up-down pairing bound on unsuccessful iterations above C,
/// (d) no true unsuccessful iterations exactly at C.
pub fn diagnose_trace(
    trace: &Trace,
    lat: &LatticeInfo,
    c_raw: f64,
    f_eps: f64,
    h: &dyn Fn(f64) -> f64,
) -> Result<ProcessDiagnostics> {
    if !(c_raw > 0.0) || !(f_eps > 0.0) {
        return Err(Error::InvalidArgument(
            "diagnostics need positive C and F_eps".into(),
        ));
    }
    let c_exp = lat.threshold_exp(c_raw);
    let c_lattice = lat.lattice_value(c_exp);
    let h_c = h(c_lattice);
    if !(h_c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "nonpositive progress h(C) = {h_c}"
        )));
    }
    let log_term = (c_exp - lat.j0).max(0);
    let check_small_prefix = lat.j0 < c_exp;

    let mut d = ProcessDiagnostics {
        c_raw,
        c_lattice,
        n1: 0,
        m1: 0,
        n2: 0,
        m2: 0,
        n3: 0,
        m3: 0,
        small_successes: 0,
        small_total: 0,
        total: 0,
        f_eps,
        h_c,
        log_term,
        violations: Vec::new(),
    };

    let mut up_big = 0i64; // successful with step parameter >= C
    let mut down_big = 0i64; // unsuccessful with step parameter > C
    for r in trace.pre_hit_records() {
        if r.is_shrink {
            continue;
        }
        let j = r.alpha_exp;
        let at_or_above = j <= c_exp; // alpha >= C on the lattice
        let above = j < c_exp; // alpha > C
        let t = r.is_true;
        let s = r.is_successful;
        d.total += 1;
        if at_or_above {
            if !t {
                d.m1 += 1;
                if s {
                    d.n1 += 1;
                }
            } else {
                d.m2 += 1;
                if s {
                    d.n2 += 1;
                }
            }
        }
        if above && !s {
            d.m3 += 1;
            if t {
                d.n3 += 1;
            }
        }
        if !above {
            d.small_total += 1;
            if s {
                d.small_successes += 1;
            }
        }
        if !above && at_or_above && t && !s {
            d.violations.push(format!(
                "iteration {}: true unsuccessful exactly at the threshold C",
                r.k
            ));
        }
        if check_small_prefix && 2 * d.small_successes > d.total {
            d.violations.push(format!(
                "iteration {}: small-success prefix bound violated ({} successes at or below C in {} iterations)",
                r.k, d.small_successes, d.total
            ));
        }
        if s && at_or_above {
            up_big += 1;
        }
        if above && !s {
            down_big += 1;
        }
        if down_big > up_big + log_term {
            d.violations.push(format!(
                "iteration {}: up-down pairing bound violated ({down_big} > {up_big} + {log_term})",
                r.k
            ));
        }
    }
    if d.n2 as f64 > f_eps / h_c * (1.0 + 1e-9) {
        d.violations.push(format!(
            "progress budget exceeded: N2 = {} > F_eps/h(C) = {}",
            d.n2,
            f_eps / h_c
        ));
    }
    if d.m2 > d.n2 + d.m3 {
        d.violations.push(format!(
            "M2 = {} exceeds N2 + M3 = {}",
            d.m2,
            d.n2 + d.m3
        ));
    }
    Ok(d)
}

/// Line-search per-trace check: every true iteration with step size <= C must
/// be successful. Valid when the Lipschitz constant behind C is analytic.
pub fn check_ls_true_small_successful(trace: &Trace, c: f64) -> Vec<String> {
    let mut v = Vec::new();
    for r in trace.pre_hit_records() {
        if r.is_shrink {
            continue;
        }
        if r.is_true && r.alpha <= c * (1.0 + 1e-12) && !r.is_successful {
            v.push(format!(
                "iteration {}: true with alpha = {} <= C = {c} but unsuccessful",
                r.k, r.alpha
            ));
        }
    }
    v
}

/// Constants needed by the cubic-regularization per-trace lemma checks.
#[derive(Debug, Clone, Copy)]
pub struct ArcLemmaConstants {
    pub theta: f64,
    pub kappa_theta: f64,
    pub sigma_min: f64,
    pub kappa_g: f64,
    pub kappa_h: f64,
    pub lip_grad: f64,
    pub lip_hess: f64,
}

/// Per-trace checks of the cubic-regularization guarantees:
/// model decrease >= sigma|s|^3/6 (and theta times that in f on successes),
/// true + sigma >= sigma_c implies success, the true-iteration step-norm
/// lower bound, and the true-successful function-decrease lower bound.
pub fn check_arc_lemmas(run: &ArcRun, k: &ArcLemmaConstants) -> Vec<String> {
    let s_c = sigma_c(k.kappa_g, k.kappa_h, k.lip_grad, k.lip_hess, k.theta);
    let k_s = kappa_s(k.kappa_g, k.kappa_h, k.lip_grad, k.lip_hess);
    let k_f = kappa_f(k.theta, k.kappa_theta, k.sigma_min);
    let rel = 1.0 - 1e-9;
    let mut v = Vec::new();
    let cut = run.trace.hit.map(|n| n + 1).unwrap_or(usize::MAX);
    for e in &run.extras {
        if e.is_shrink || e.k >= cut {
            continue;
        }
        let s3 = e.step_norm.powi(3);
        if e.model_decrease < e.sigma * s3 / 6.0 * rel {
            v.push(format!(
                "iteration {}: model decrease {} below sigma|s|^3/6 = {}",
                e.k,
                e.model_decrease,
                e.sigma * s3 / 6.0
            ));
        }
        if e.is_successful && e.f_x - e.f_trial < k.theta * e.sigma * s3 / 6.0 * rel {
            v.push(format!(
                "iteration {}: function decrease {} below theta*sigma|s|^3/6",
                e.k,
                e.f_x - e.f_trial
            ));
        }
        if e.is_true && e.sigma >= s_c && !e.is_successful {
            v.push(format!(
                "iteration {}: true with sigma = {} >= sigma_c = {s_c} but unsuccessful",
                e.k, e.sigma
            ));
        }
        if e.is_true {
            let need = (1.0 - k.kappa_theta) * e.grad_next_norm / (e.sigma + k_s);
            if e.step_norm.powi(2) < need * rel {
                v.push(format!(
                    "iteration {}: true step norm {} below sqrt((1-kt)|grad_next|/(sigma+kappa_s))",
                    e.k, e.step_norm
                ));
            }
        }
        if e.is_true && e.is_successful {
            let need = k_f / e.sigma.max(s_c).powf(1.5) * e.grad_next_norm.powf(1.5);
            if e.f_x - e.f_trial < need * rel {
                v.push(format!(
                    "iteration {}: true successful decrease {} below kappa_f bound {need}",
                    e.k,
                    e.f_x - e.f_trial
                ));
            }
        }
    }
    v
}
