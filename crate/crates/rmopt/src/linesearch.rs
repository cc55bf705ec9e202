//! Armijo-type line search driven by probabilistically accurate gradient
//! models, with steepest-descent and general-descent directions, and an
//! adaptive-radius variant gated on the model norm.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::oracles::{
    check_ls_accuracy, fd_fully_linear_kappa_g, sample_fd_linear_model, sample_linear_model,
    LinearModel, OracleConfig,
};
use crate::problems::{Objective, Point};
use crate::trace::{IterationRecord, Trace};

/// Fixed positive definite direction transform d = −T·g with its descent
/// constants: cosine bound beta and norm bounds kappa_1 <= |d|/|g| <= kappa_2.
#[derive(Debug, Clone)]
pub struct GeneralDirection {
    pub t: DMatrix<f64>,
    pub beta: f64,
    pub kappa_1: f64,
    pub kappa_2: f64,
}

pub fn make_general_direction(t: DMatrix<f64>) -> Result<GeneralDirection> {
    let sym = (&t + t.transpose()) * 0.5;
    if (&t - &sym).norm() > 1e-10 * (1.0 + t.norm()) {
        return Err(Error::InvalidArgument("direction transform must be symmetric".into()));
    }
    let eig = sym.clone().symmetric_eigen();
    let lmin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    if lmin <= 0.0 {
        return Err(Error::InvalidArgument(
            "direction transform must be positive definite".into(),
        ));
    }
    Ok(GeneralDirection {
        t: sym,
        beta: lmin / lmax,
        kappa_1: lmin,
        kappa_2: lmax,
    })
}

#[derive(Debug, Clone)]
pub enum DirectionVariant {
    Steepest,
    General(GeneralDirection),
}

#[derive(Debug, Clone)]
pub struct LsConfig {
    pub gamma: f64,
    pub theta: f64,
    pub alpha_max: f64,
    pub alpha0: f64,
    pub max_iters: usize,
    pub direction: DirectionVariant,
    /// Redraw the model after unsuccessful iterations (the analyzed scheme).
    /// Disabling this yields the deterministic backtracking regression mode.
    pub redraw_on_failure: bool,
    /// Adaptive-radius parameters (fully-linear variant only).
    pub kappa_delta: f64,
    pub xi0: f64,
}

impl LsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config("algo.gamma must be in (0,1)".into()));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Config("algo.theta must be in (0,1)".into()));
        }
        if !(self.alpha0 > 0.0 && self.alpha0 < self.alpha_max) {
            return Err(Error::Config("require 0 < alpha0 < alpha_max".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("algo.max_iters must be positive".into()));
        }
        if let DirectionVariant::General(gd) = &self.direction {
            if gd.kappa_1 > gd.kappa_2 {
                return Err(Error::Config("require kappa_1 <= kappa_2".into()));
            }
        }
        Ok(())
    }

    /// Number of lattice up-steps from alpha0 to the snapped cap, so the step
    /// size always equals alpha0 * gamma^j exactly.
    pub fn lattice_cap_steps(&self) -> i64 {
        ((self.alpha_max / self.alpha0).ln() / (1.0 / self.gamma).ln() + 1e-9).floor() as i64
    }

    /// Step-size cap snapped down onto the gamma-lattice of alpha0.
    pub fn snapped_alpha_max(&self) -> f64 {
        self.alpha0 * self.gamma.powi(-self.lattice_cap_steps() as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRegime {
    /// Hit when |grad f(x_k)| <= eps (nonconvex analysis).
    GradNorm,
    /// Hit when f(x_k) − f* <= eps (convex / strongly convex analysis).
    Gap,
}

#[derive(Debug, Clone, Copy)]
pub struct StoppingRule {
    pub eps: f64,
    pub regime: StopRegime,
}

/// Sufficient-decrease test. Steepest form: f_trial <= f_x − alpha·theta·|g|².
/// General form: f_trial <= f_x + alpha·theta·dᵀg.
///
/// Evaluation-resolution slack keeps the test meaningful when the required
/// decrease falls below rounding noise: a trial point one coordinate ulp away
/// can shift f by ~|g|·ulp(x) plus evaluation rounding, so without slack an
/// accurate model at a tiny step size is rejected on noise alone and the
/// step-size walk gets absorbed at the float floor, even though exact
/// arithmetic guarantees success there. Steps whose f-change exceeds the
/// resolution of a single evaluation are unaffected.
pub fn armijo_check(
    f_x: f64,
    f_trial: f64,
    alpha: f64,
    theta: f64,
    g: &Point,
    d: Option<&Point>,
) -> bool {
    let slack = 32.0 * f64::EPSILON * f_x.abs();
    match d {
        None => f_trial <= f_x - alpha * theta * g.norm_squared() + slack,
        Some(d) => f_trial <= f_x + alpha * theta * d.dot(g) + slack,
    }
}

fn hit(obj: &Objective, stop: &StoppingRule, f_x: f64, grad_norm: f64) -> bool {
    match stop.regime {
        StopRegime::GradNorm => grad_norm <= stop.eps,
        StopRegime::Gap => f_x - obj.f_star <= stop.eps,
    }
}

/// Algorithm: draw a model gradient, take s = alpha·d(g), test sufficient
/// decrease; grow alpha (on the gamma-lattice, capped) on success, shrink on
/// failure. The hitting index is checked on the incumbent before the draw.
pub fn run_linesearch<R: Rng>(
    obj: &Objective,
    oracle: &OracleConfig,
    cfg: &LsConfig,
    stop: &StoppingRule,
    x0: &Point,
    rng: &mut R,
) -> Result<Trace> {
    cfg.validate()?;
    oracle.validate()?;
    let cap = -cfg.lattice_cap_steps();
    let mut x = x0.clone();
    let mut f_x = obj.eval(&x);
    let mut j: i64 = 0;
    let mut records = Vec::new();
    let mut held_model: Option<LinearModel> = None;
    for k in 0..cfg.max_iters {
        let grad = obj.grad(&x);
        let grad_norm = grad.norm();
        if !f_x.is_finite() || grad.iter().any(|v| !v.is_finite()) {
            return Err(Error::RunAborted(format!(
                "non-finite objective data at iteration {k}"
            )));
        }
        if hit(obj, stop, f_x, grad_norm) {
            return Ok(Trace {
                records,
                hit: Some(k),
                final_x: x,
                final_f: f_x,
            });
        }
        let alpha = cfg.alpha0 * cfg.gamma.powi(j as i32);
        let model = match held_model.take() {
            Some(m) if !cfg.redraw_on_failure => m,
            _ => sample_linear_model(&grad, alpha, oracle, rng),
        };
        let d = match &cfg.direction {
            DirectionVariant::Steepest => -&model.g,
            DirectionVariant::General(gd) => -(&gd.t * &model.g),
        };
        let trial = &x + &d * alpha;
        let f_trial = obj.eval(&trial);
        let success = match &cfg.direction {
            DirectionVariant::Steepest => {
                armijo_check(f_x, f_trial, alpha, cfg.theta, &model.g, None)
            }
            DirectionVariant::General(_) => {
                armijo_check(f_x, f_trial, alpha, cfg.theta, &model.g, Some(&d))
            }
        };
        let is_true = check_ls_accuracy(&model.g, &grad, oracle.kappa, alpha);
        records.push(IterationRecord {
            k,
            alpha,
            alpha_exp: j,
            sigma: None,
            f: f_x,
            grad_norm,
            step_norm: d.norm() * alpha,
            is_true,
            is_successful: success,
            is_shrink: false,
            xi: None,
            rho: None,
        });
        if success {
            x = trial;
            f_x = f_trial;
            j = (j - 1).max(cap);
            if !obj.in_domain(&x) {
                return Err(Error::RunAborted(format!(
                    "iterate left the declared domain box at iteration {k}"
                )));
            }
        } else {
            j += 1;
            if !cfg.redraw_on_failure {
                held_model = Some(model);
            }
        }
    }
    Ok(Trace {
        records,
        hit: None,
        final_f: f_x,
        final_x: x,
    })
}

/// Adaptive-radius variant: models are built by finite differences over the
/// ball B(x, alpha·xi); iterations with |g| < kappa_delta·xi only shrink xi.
pub fn run_ls_fully_linear<R: Rng>(
    obj: &Objective,
    p: f64,
    cfg: &LsConfig,
    stop: &StoppingRule,
    x0: &Point,
    rng: &mut R,
) -> Result<Trace> {
    cfg.validate()?;
    if !(cfg.kappa_delta > 1.0) || !(cfg.xi0 > 0.0) {
        return Err(Error::Config(
            "fully-linear variant requires kappa_delta > 1 and xi0 > 0".into(),
        ));
    }
    let kappa_eg = fd_fully_linear_kappa_g(obj);
    let cap = -cfg.lattice_cap_steps();
    let mut x = x0.clone();
    let mut f_x = obj.eval(&x);
    let mut xi = cfg.xi0;
    let mut j: i64 = 0;
    let mut records = Vec::new();
    for k in 0..cfg.max_iters {
        let grad = obj.grad(&x);
        let grad_norm = grad.norm();
        if !f_x.is_finite() {
            return Err(Error::RunAborted(format!(
                "non-finite objective value at iteration {k}"
            )));
        }
        if hit(obj, stop, f_x, grad_norm) {
            return Ok(Trace {
                records,
                hit: Some(k),
                final_x: x,
                final_f: f_x,
            });
        }
        let alpha = cfg.alpha0 * cfg.gamma.powi(j as i32);
        let delta = alpha * xi;
        let model = sample_fd_linear_model(obj, &x, delta, p, rng);
        let is_true = (&model.g - &grad).norm() <= kappa_eg * delta;
        if model.g.norm() < cfg.kappa_delta * xi {
            records.push(IterationRecord {
                k,
                alpha,
                alpha_exp: j,
                sigma: None,
                f: f_x,
                grad_norm,
                step_norm: 0.0,
                is_true,
                is_successful: false,
                is_shrink: true,
                xi: Some(xi),
                rho: None,
            });
            xi /= cfg.kappa_delta;
            continue;
        }
        let trial = &x - &model.g * alpha;
        let f_trial = obj.eval(&trial);
        let success = armijo_check(f_x, f_trial, alpha, cfg.theta, &model.g, None);
        records.push(IterationRecord {
            k,
            alpha,
            alpha_exp: j,
            sigma: None,
            f: f_x,
            grad_norm,
            step_norm: model.g.norm() * alpha,
            is_true,
            is_successful: success,
            is_shrink: false,
            xi: Some(xi),
            rho: None,
        });
        if success {
            x = trial;
            f_x = f_trial;
            j = (j - 1).max(cap);
            if !obj.in_domain(&x) {
                return Err(Error::RunAborted(format!(
                    "iterate left the declared domain box at iteration {k}"
                )));
            }
        } else {
            j += 1;
        }
    }
    Ok(Trace {
        records,
        hit: None,
        final_f: f_x,
        final_x: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_pseudo_huber, make_quadratic};
    use crate::rng::seed_rng;
    use nalgebra::DVector;

    fn exact_oracle() -> OracleConfig {
        OracleConfig {
            p: 1.0,
            eta: 0.0,
            ..OracleConfig::default()
        }
    }

    fn base_cfg() -> LsConfig {
        LsConfig {
            gamma: 0.5,
            theta: 0.5,
            alpha_max: 1.0,
            alpha0: 0.75,
            max_iters: 100_000,
            direction: DirectionVariant::Steepest,
            redraw_on_failure: true,
            kappa_delta: 2.0,
            xi0: 1.0,
        }
    }

    #[test]
    fn armijo_hand_cases() {
        // f = x²/2 at x = 1, g = 1, alpha = 0.5, theta = 0.5: trial value
        // 0.125 against threshold 0.25.
        let g = DVector::from_vec(vec![1.0]);
        assert!(armijo_check(0.5, 0.125, 0.5, 0.5, &g, None));
        // No strict decrease: equal values fail when alpha*theta*|g|² > 0.
        assert!(!armijo_check(0.5, 0.5, 0.5, 0.5, &g, None));
        // Zero model gradient: condition degenerates to f_trial <= f_x.
        let z = DVector::from_vec(vec![0.0]);
        assert!(armijo_check(0.5, 0.5, 0.5, 0.5, &z, None));
    }

    #[test]
    fn already_converged_start() {
        let obj = make_quadratic(2, 10.0, 1).unwrap();
        let x0 = DVector::zeros(2);
        let stop = StoppingRule {
            eps: 1e-6,
            regime: StopRegime::GradNorm,
        };
        let mut rng = seed_rng(0);
        let tr = run_linesearch(&obj, &exact_oracle(), &base_cfg(), &stop, &x0, &mut rng).unwrap();
        assert_eq!(tr.hit, Some(0));
        assert!(tr.records.is_empty());
    }

    #[test]
    fn true_iterations_below_threshold_are_successful() {
        // f = x²/2 (L = 1), theta = 0.5, kappa = 0.5: C = 0.5.
        let obj = make_quadratic(1, 1.0, 1).unwrap();
        let x0 = DVector::from_vec(vec![3.0]);
        let stop = StoppingRule {
            eps: 1e-8,
            regime: StopRegime::GradNorm,
        };
        let mut rng = seed_rng(2);
        let tr = run_linesearch(&obj, &exact_oracle(), &base_cfg(), &stop, &x0, &mut rng).unwrap();
        assert!(tr.hit.is_some());
        let c = (1.0 - 0.5) / (0.5 * 1.0 + 0.5);
        for r in &tr.records {
            if r.is_true && r.alpha <= c {
                assert!(r.is_successful, "true small iteration failed at k={}", r.k);
            }
        }
    }

    #[test]
    fn pseudo_huber_monotone_decrease() {
        let obj = make_pseudo_huber(2).unwrap();
        let x0 = DVector::from_vec(vec![1.0, -1.0]);
        let stop = StoppingRule {
            eps: 1e-6,
            regime: StopRegime::Gap,
        };
        let mut rng = seed_rng(3);
        let tr = run_linesearch(&obj, &exact_oracle(), &base_cfg(), &stop, &x0, &mut rng).unwrap();
        assert!(tr.hit.is_some());
        for w in tr.records.windows(2) {
            assert!(w[1].f <= w[0].f + 1e-15);
        }
    }

    #[test]
    fn general_direction_frozen_values() {
        let t = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0]));
        let gd = make_general_direction(t).unwrap();
        assert_eq!(gd.beta, 0.25);
        assert_eq!(gd.kappa_1, 1.0);
        assert_eq!(gd.kappa_2, 4.0);
        // g = (1,0): d = (−1,0), perfect cosine; g = (0,1): |d| = 4|g|.
        let g1 = DVector::from_vec(vec![1.0, 0.0]);
        let d1 = -(&gd.t * &g1);
        assert_eq!(d1[0], -1.0);
        assert!(d1.dot(&g1) / (d1.norm() * g1.norm()) <= -gd.beta);
        let g2 = DVector::from_vec(vec![0.0, 1.0]);
        let d2 = -(&gd.t * &g2);
        assert_eq!(d2.norm(), 4.0);
        // Identity transform recovers steepest descent.
        let id = make_general_direction(DMatrix::identity(2, 2)).unwrap();
        assert_eq!((id.beta, id.kappa_1, id.kappa_2), (1.0, 1.0, 1.0));
        // Non-PD transform is rejected.
        let bad = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        assert!(make_general_direction(bad).is_err());
    }

    #[test]
    fn general_direction_run_converges() {
        let obj = make_quadratic(2, 20.0, 5).unwrap();
        let t = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.1]));
        let mut cfg = base_cfg();
        cfg.direction = DirectionVariant::General(make_general_direction(t).unwrap());
        let stop = StoppingRule {
            eps: 1e-5,
            regime: StopRegime::GradNorm,
        };
        let mut rng = seed_rng(9);
        let x0 = DVector::from_vec(vec![2.0, -1.0]);
        let tr = run_linesearch(&obj, &exact_oracle(), &cfg, &stop, &x0, &mut rng).unwrap();
        assert!(tr.hit.is_some());
    }

    #[test]
    fn fully_linear_huge_xi_starts_with_shrink() {
        let obj = make_pseudo_huber(2).unwrap();
        let mut cfg = base_cfg();
        cfg.xi0 = 1e6;
        let stop = StoppingRule {
            eps: 1e-4,
            regime: StopRegime::GradNorm,
        };
        let mut rng = seed_rng(4);
        let x0 = DVector::from_vec(vec![1.0, 1.0]);
        let tr = run_ls_fully_linear(&obj, 1.0, &cfg, &stop, &x0, &mut rng).unwrap();
        let r0 = &tr.records[0];
        assert!(r0.is_shrink);
        assert_eq!(r0.xi, Some(1e6));
        assert_eq!(tr.records[1].xi, Some(1e6 / cfg.kappa_delta));
        assert!(tr.hit.is_some());
    }

    #[test]
    fn held_model_reproduces_classical_backtracking() {
        let obj = make_quadratic(2, 40.0, 11).unwrap();
        let mut cfg = base_cfg();
        cfg.redraw_on_failure = false;
        cfg.alpha0 = 0.75;
        let stop = StoppingRule {
            eps: 1e-6,
            regime: StopRegime::GradNorm,
        };
        let mut rng = seed_rng(5);
        let x0 = DVector::from_vec(vec![1.0, 1.0]);
        let tr = run_linesearch(&obj, &exact_oracle(), &cfg, &stop, &x0, &mut rng).unwrap();

        // Independent classical backtracking reference on the same lattice.
        let cap = cfg.lattice_cap_steps();
        let mut x = x0.clone();
        let mut j: i64 = 0;
        let mut path = Vec::new();
        for _ in 0..tr.records.len() {
            let g = obj.grad(&x);
            let alpha = cfg.alpha0 * cfg.gamma.powi(j as i32);
            let trial = &x - &g * alpha;
            if armijo_check(obj.eval(&x), obj.eval(&trial), alpha, cfg.theta, &g, None) {
                x = trial;
                j = (j - 1).max(-cap);
                path.push((true, alpha));
            } else {
                j += 1;
                path.push((false, alpha));
            }
        }
        for (r, (succ, alpha)) in tr.records.iter().zip(&path) {
            assert_eq!(r.is_successful, *succ);
            assert_eq!(r.alpha, *alpha);
        }
        assert!((tr.final_x - x).norm() < 1e-12);
    }

    #[test]
    fn alpha_stays_on_lattice_within_bounds() {
        let obj = make_quadratic(2, 30.0, 2).unwrap();
        let cfg = base_cfg();
        let stop = StoppingRule {
            eps: 1e-6,
            regime: StopRegime::GradNorm,
        };
        let oracle = OracleConfig {
            p: 0.7,
            eta: 0.5,
            ..OracleConfig::default()
        };
        let mut rng = seed_rng(6);
        let x0 = DVector::from_vec(vec![1.5, -0.5]);
        let tr = run_linesearch(&obj, &oracle, &cfg, &stop, &x0, &mut rng).unwrap();
        let snapped = cfg.snapped_alpha_max();
        for r in &tr.records {
            assert!(r.alpha <= snapped + 1e-15);
            let expect = cfg.alpha0 * cfg.gamma.powi(r.alpha_exp as i32);
            assert_eq!(r.alpha, expect);
        }
    }
}
