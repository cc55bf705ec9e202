//! Adaptive cubic regularization with probabilistically accurate second-order
//! models, plus the adaptive-radius fully-quadratic variant.

use rand::Rng;

use crate::cubic::{solve_cubic, CubicSubproblem};
use crate::error::{Error, Result};
use crate::oracles::{check_arc_accuracy, sample_quadratic_model, OracleConfig};
use crate::problems::{Objective, Point};
use crate::trace::{IterationRecord, Trace};

#[derive(Debug, Clone)]
pub struct ArcConfig {
    pub gamma: f64,
    pub theta: f64,
    pub sigma_min: f64,
    pub sigma0: f64,
    pub kappa_theta: f64,
    pub max_iters: usize,
    /// Adaptive-radius parameters (fully-quadratic variant only).
    pub kappa_delta: f64,
    pub xi0: f64,
}

impl ArcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config("algo.gamma must be in (0,1)".into()));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Config("algo.theta must be in (0,1)".into()));
        }
        if !(self.kappa_theta > 0.0 && self.kappa_theta < 1.0) {
            return Err(Error::Config("algo.kappa_theta must be in (0,1)".into()));
        }
        if !(self.sigma_min > 0.0) {
            return Err(Error::Config("algo.sigma_min must be positive".into()));
        }
        if !(self.sigma0 > self.sigma_min) {
            return Err(Error::Config("require sigma0 > sigma_min".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("algo.max_iters must be positive".into()));
        }
        Ok(())
    }

    /// Initial lattice exponent: sigma_0 is snapped onto the sigma_min
    /// gamma-lattice (sigma_k = sigma_min * gamma^{-j}), so the regularization
    /// path stays on one lattice and diagnostics can classify it exactly.
    pub fn initial_exp(&self) -> i64 {
        let raw = (self.sigma0 / self.sigma_min).ln() / (1.0 / self.gamma).ln();
        (raw.round() as i64).max(1)
    }

    pub fn snapped_sigma0(&self) -> f64 {
        self.sigma_min * self.gamma.powi(-self.initial_exp() as i32)
    }
}

/// Quality ratio of actual to model decrease.
pub fn rho(f_x: f64, f_trial: f64, model_decrease: f64) -> Result<f64> {
    if model_decrease <= 0.0 {
        return Err(Error::Numerical(format!(
            "nonpositive model decrease {model_decrease}: cubic solver violated its decrease bound"
        )));
    }
    Ok((f_x - f_trial) / model_decrease)
}

/// Side data per ARC iteration used by the lemma checks (richer than the
/// shared trace schema).
#[derive(Debug, Clone)]
pub struct ArcExtra {
    pub k: usize,
    pub sigma: f64,
    pub step_norm: f64,
    pub model_decrease: f64,
    pub f_x: f64,
    pub f_trial: f64,
    /// |grad f(x^k + s^k)| at the trial point.
    pub grad_next_norm: f64,
    pub is_true: bool,
    pub is_successful: bool,
    pub is_shrink: bool,
    /// delta_k = xi_k / sigma_k for the fully-quadratic variant.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ArcRun {
    pub trace: Trace,
    pub extras: Vec<ArcExtra>,
}

const TINY_DECREASE_REL: f64 = 1e-14;

fn run_arc_impl<R: Rng>(
    obj: &Objective,
    oracle: &OracleConfig,
    cfg: &ArcConfig,
    eps: f64,
    x0: &Point,
    rng: &mut R,
    adaptive_radius: bool,
) -> Result<ArcRun> {
    cfg.validate()?;
    oracle.validate()?;
    if !(eps > 0.0) {
        return Err(Error::Config("eps must be positive".into()));
    }
    if adaptive_radius {
        if !(cfg.kappa_delta > 1.0) || !(cfg.xi0 > 0.0) {
            return Err(Error::Config(
                "fully-quadratic variant requires kappa_delta > 1 and xi0 > 0".into(),
            ));
        }
        if eps > 1.0 {
            return Err(Error::Config(
                "fully-quadratic variant requires eps in (0,1]".into(),
            ));
        }
        let lh = obj.lip_hess.unwrap_or(0.0);
        if obj.lip_grad.max(lh) < 1.0 {
            return Err(Error::Config(
                "fully-quadratic variant requires max{L, L_H} >= 1".into(),
            ));
        }
    }
    let mut x = x0.clone();
    let mut f_x = obj.eval(&x);
    let mut grad = obj.grad(&x);
    let mut j = cfg.initial_exp();
    let mut xi = cfg.xi0;
    let mut records = Vec::new();
    let mut extras = Vec::new();
    if grad.norm() <= eps {
        return Ok(ArcRun {
            trace: Trace {
                records,
                hit: Some(0),
                final_f: f_x,
                final_x: x,
            },
            extras,
        });
    }
    for k in 0..cfg.max_iters {
        if !f_x.is_finite() || grad.iter().any(|v| !v.is_finite()) {
            return Err(Error::RunAborted(format!(
                "non-finite objective data at iteration {k}"
            )));
        }
        let sigma = cfg.sigma_min * cfg.gamma.powi(-j as i32);
        let model = sample_quadratic_model(obj, &x, &grad, oracle, rng);
        let step = solve_cubic(&CubicSubproblem {
            g: model.g.clone(),
            b: model.b.clone(),
            sigma,
            kappa_theta: cfg.kappa_theta,
        })?;
        let grad_norm = grad.norm();
        let is_true = if model.intended_true {
            true
        } else {
            check_arc_accuracy(
                &model.g,
                &model.b,
                &grad,
                &obj.hess(&x),
                &step.s,
                oracle.kappa_g,
                oracle.kappa_h,
            )
        };
        let delta = xi / sigma;
        if adaptive_radius && step.s.norm() < cfg.kappa_delta * delta {
            records.push(IterationRecord {
                k,
                alpha: 1.0 / sigma,
                alpha_exp: j,
                sigma: Some(sigma),
                f: f_x,
                grad_norm,
                step_norm: step.s.norm(),
                is_true,
                is_successful: false,
                is_shrink: true,
                xi: Some(xi),
                rho: None,
            });
            extras.push(ArcExtra {
                k,
                sigma,
                step_norm: step.s.norm(),
                model_decrease: step.model_decrease,
                f_x,
                f_trial: f_x,
                grad_next_norm: grad_norm,
                is_true,
                is_successful: false,
                is_shrink: true,
                delta: Some(delta),
            });
            xi /= cfg.kappa_delta;
            continue;
        }
        let trial = &x + &step.s;
        let f_trial = obj.eval(&trial);
        let tiny = step.model_decrease < TINY_DECREASE_REL * f_x.abs();
        let (ratio, success) = if tiny {
            (None, false)
        } else {
            let r = rho(f_x, f_trial, step.model_decrease)?;
            (Some(r), r >= cfg.theta)
        };
        let grad_trial = obj.grad(&trial);
        records.push(IterationRecord {
            k,
            alpha: 1.0 / sigma,
            alpha_exp: j,
            sigma: Some(sigma),
            f: f_x,
            grad_norm,
            step_norm: step.s.norm(),
            is_true,
            is_successful: success,
            is_shrink: false,
            xi: if adaptive_radius { Some(xi) } else { None },
            rho: ratio,
        });
        extras.push(ArcExtra {
            k,
            sigma,
            step_norm: step.s.norm(),
            model_decrease: step.model_decrease,
            f_x,
            f_trial,
            grad_next_norm: grad_trial.norm(),
            is_true,
            is_successful: success,
            is_shrink: false,
            delta: if adaptive_radius { Some(delta) } else { None },
        });
        if success {
            x = trial;
            f_x = f_trial;
            grad = grad_trial;
            j = (j - 1).max(0);
            if !obj.in_domain(&x) {
                return Err(Error::RunAborted(format!(
                    "iterate left the declared domain box at iteration {k}"
                )));
            }
            if grad.norm() <= eps {
                return Ok(ArcRun {
                    trace: Trace {
                        records,
                        hit: Some(k),
                        final_f: f_x,
                        final_x: x,
                    },
                    extras,
                });
            }
        } else {
            j += 1;
        }
    }
    Ok(ArcRun {
        trace: Trace {
            records,
            hit: None,
            final_f: f_x,
            final_x: x,
        },
        extras,
    })
}

/// ARC with random models: solve the cubic subproblem at sigma_k, accept when
/// rho_k >= theta, and move sigma on the gamma-lattice (success: towards
/// sigma_min; failure: up). The hitting index is the first successful
/// iteration landing at |grad f| <= eps.
pub fn run_arc<R: Rng>(
    obj: &Objective,
    oracle: &OracleConfig,
    cfg: &ArcConfig,
    eps: f64,
    x0: &Point,
    rng: &mut R,
) -> Result<ArcRun> {
    run_arc_impl(obj, oracle, cfg, eps, x0, rng, false)
}

/// Fully-quadratic adaptive-radius variant: steps shorter than
/// kappa_delta·(xi_k/sigma_k) only shrink xi (x and sigma unchanged).
pub fn run_arc_fully_quadratic<R: Rng>(
    obj: &Objective,
    oracle: &OracleConfig,
    cfg: &ArcConfig,
    eps: f64,
    x0: &Point,
    rng: &mut R,
) -> Result<ArcRun> {
    run_arc_impl(obj, oracle, cfg, eps, x0, rng, true)
}

/// Threshold regularization above which every true iteration is successful.
pub fn sigma_c(kappa_g: f64, kappa_h: f64, l: f64, l_h: f64, theta: f64) -> f64 {
    (2.0 * kappa_g + kappa_h + l + l_h) / (1.0 - theta / 3.0)
}

/// Decrease constant of true successful iterations.
pub fn kappa_f(theta: f64, kappa_theta: f64, sigma_min: f64) -> f64 {
    theta / (12.0 * 2.0f64.sqrt()) * (1.0 - kappa_theta).powf(1.5) * sigma_min
}

/// Step-norm constant: |s| >= sqrt((1−kappa_theta)|grad f(x+s)| / (sigma + kappa_s)).
pub fn kappa_s(kappa_g: f64, kappa_h: f64, l: f64, l_h: f64) -> f64 {
    2.0 * kappa_g + kappa_h + l + l_h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_quadratic;
    use crate::rng::seed_rng;
    use nalgebra::DVector;

    fn exact_oracle() -> OracleConfig {
        OracleConfig {
            p: 1.0,
            ..OracleConfig::default()
        }
    }

    fn base_cfg() -> ArcConfig {
        ArcConfig {
            gamma: 0.5,
            theta: 0.25,
            sigma_min: 0.01,
            sigma0: 1.0,
            kappa_theta: 0.5,
            max_iters: 10_000,
            kappa_delta: 2.0,
            xi0: 1.0,
        }
    }

    #[test]
    fn rho_hand_cases() {
        assert_eq!(rho(1.0, 0.2, 0.8).unwrap(), 1.0);
        assert_eq!(rho(1.0, 0.25, 1.0).unwrap(), 0.75);
        assert!(rho(1.0, 1.3, 0.8).unwrap() < 0.0);
        assert!(rho(1.0, 0.2, 0.0).is_err());
    }

    #[test]
    fn constants_frozen_values() {
        assert!((sigma_c(0.0, 0.0, 1.0, 1.0, 0.3) - 2.0 / 0.9).abs() < 1e-10);
        assert!((kappa_f(0.5, 0.5, 1.0) - 0.010416666).abs() < 1e-6);
        assert_eq!(kappa_s(0.0, 0.0, 1.0, 0.0), 1.0);
    }

    #[test]
    fn sigma_lattice_update_path() {
        // A failure then a success from sigma = sigma_min/gamma returns sigma
        // to sigma_min: j = 1 -> fail -> 2 -> success -> 1 -> success -> 0.
        let cfg = base_cfg();
        assert!(cfg.initial_exp() >= 1);
        let mut j: i64 = 1;
        j += 1;
        assert_eq!(cfg.sigma_min * cfg.gamma.powi(-j as i32), 0.04);
        j = (j - 1).max(0);
        j = (j - 1).max(0);
        assert_eq!(cfg.sigma_min * cfg.gamma.powi(-j as i32), cfg.sigma_min);
        // The floor holds.
        j = (j - 1).max(0);
        assert_eq!(cfg.sigma_min * cfg.gamma.powi(-j as i32), cfg.sigma_min);
    }

    #[test]
    fn exact_models_converge_on_quadratic() {
        let obj = make_quadratic(3, 50.0, 4).unwrap();
        let x0 = DVector::from_element(3, 2.0);
        let mut rng = seed_rng(1);
        let run = run_arc(&obj, &exact_oracle(), &base_cfg(), 1e-6, &x0, &mut rng).unwrap();
        assert!(run.trace.hit.is_some());
        for w in run.trace.records.windows(2) {
            assert!(w[1].f <= w[0].f + 1e-12);
        }
        // Model decrease bound of the cubic solver holds on every iteration.
        for e in &run.extras {
            assert!(e.model_decrease >= e.sigma * e.step_norm.powi(3) / 6.0 - 1e-12);
        }
        // Hitting semantics: the hit record is successful and lands below eps.
        let hit = run.trace.hit.unwrap();
        let e = run.extras.iter().find(|e| e.k == hit).unwrap();
        assert!(e.is_successful && e.grad_next_norm <= 1e-6);
    }

    #[test]
    fn corrupted_models_still_converge() {
        let obj = make_quadratic(2, 20.0, 9).unwrap();
        let x0 = DVector::from_element(2, 1.5);
        let oracle = OracleConfig {
            p: 0.7,
            ..OracleConfig::default()
        };
        let mut rng = seed_rng(5);
        let run = run_arc(&obj, &oracle, &base_cfg(), 1e-5, &x0, &mut rng).unwrap();
        assert!(run.trace.hit.is_some());
        // sigma stays at or above sigma_min.
        for r in &run.trace.records {
            assert!(r.sigma.unwrap() >= base_cfg().sigma_min - 1e-15);
        }
    }

    #[test]
    fn already_converged_start() {
        let obj = make_quadratic(2, 10.0, 1).unwrap();
        let x0 = DVector::zeros(2);
        let mut rng = seed_rng(2);
        let run = run_arc(&obj, &exact_oracle(), &base_cfg(), 1e-6, &x0, &mut rng).unwrap();
        assert_eq!(run.trace.hit, Some(0));
        assert!(run.trace.records.is_empty());
    }

    #[test]
    fn fully_quadratic_huge_xi_shrinks_first() {
        let obj = make_quadratic(2, 10.0, 3).unwrap();
        let mut cfg = base_cfg();
        cfg.xi0 = 1e8;
        let x0 = DVector::from_element(2, 1.0);
        let mut rng = seed_rng(7);
        let run =
            run_arc_fully_quadratic(&obj, &exact_oracle(), &cfg, 1e-5, &x0, &mut rng).unwrap();
        assert!(run.trace.records[0].is_shrink);
        assert_eq!(run.trace.records[0].xi, Some(1e8));
        assert!(run.trace.hit.is_some());
        // xi never increases.
        let mut last = f64::INFINITY;
        for r in &run.trace.records {
            let xi = r.xi.unwrap();
            assert!(xi <= last + 1e-12);
            last = xi;
        }
    }
}
