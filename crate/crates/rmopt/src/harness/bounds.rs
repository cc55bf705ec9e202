//! Regime constants C and h, and the expected-hitting-time bound evaluators.

use crate::arc::{kappa_f, sigma_c};
use crate::error::{Error, Result};
use crate::problems::Convexity;

/// Prefactor 2p/(2p-1)^2 of the generic hitting-time bound. Diverges at p = 1/2.
pub fn probability_factor(p: f64) -> Result<f64> {
    if !(p > 0.5 && p <= 1.0) {
        return Err(Error::Config(format!(
            "bound requires p in (1/2, 1], got {p}"
        )));
    }
    Ok(2.0 * p / (2.0 * p - 1.0).powi(2))
}

/// log_gamma(C/alpha0) = ln(C/alpha0)/ln(gamma), clamped below at 0.
pub fn log_gamma_term(c: f64, alpha0: f64, gamma: f64) -> f64 {
    ((c / alpha0).ln() / gamma.ln()).max(0.0)
}

/// Constants of the line-search analysis for one problem/configuration pair.
#[derive(Debug, Clone)]
pub struct LsBoundModel {
    pub regime: Convexity,
    pub theta: f64,
    pub kappa: f64,
    pub alpha_max: f64,
    pub alpha0: f64,
    pub gamma: f64,
    pub lip_grad: f64,
    /// Strong convexity modulus (strongly convex regime).
    pub mu: f64,
    /// Level-set diameter bound D(x0) (convex regime).
    pub level_diameter: f64,
    /// General-descent direction constants; (1, 1) recovers steepest descent.
    pub beta: f64,
    pub kappa_2: f64,
    /// f(x0) - f* (nonconvex regime; also the strongly convex initial gap).
    pub f0_gap: f64,
}

impl LsBoundModel {
    /// Step-size threshold below which every true iteration is successful.
    pub fn c(&self) -> f64 {
        self.beta * (1.0 - self.theta) / (0.5 * self.lip_grad * self.kappa_2 + self.kappa)
    }

    fn denom(&self) -> f64 {
        (1.0 + self.kappa * self.alpha_max).powi(2)
    }

    /// Per-iteration progress function h(alpha) of the regime.
    pub fn h(&self, eps: f64, alpha: f64) -> f64 {
        match self.regime {
            Convexity::Nonconvex => self.theta * eps * eps * alpha / self.denom(),
            Convexity::Convex => {
                self.theta * alpha / (self.level_diameter.powi(2) * self.denom())
            }
            Convexity::StronglyConvex => {
                -(1.0 - 2.0 * self.mu * self.theta * alpha / self.denom()).ln()
            }
        }
    }

    /// Upper bound F_eps on the progress measure.
    pub fn f_eps(&self, eps: f64) -> f64 {
        match self.regime {
            Convexity::Nonconvex => self.f0_gap,
            Convexity::Convex => 1.0 / eps,
            Convexity::StronglyConvex => (1.0 / eps).ln(),
        }
    }

    /// Valid per-realization cap on the total progress gain. Differs from
    /// `f_eps` only in the strongly convex regime, where the progress measure
    /// starts at log(1/gap0), which is negative when the initial gap exceeds 1.
    pub fn gain_cap(&self, eps: f64) -> f64 {
        match self.regime {
            Convexity::StronglyConvex => (self.f0_gap.max(1.0) / eps).ln(),
            _ => self.f_eps(eps),
        }
    }

    /// The strongly convex progress function must stay defined up to
    /// alpha_max; reject configurations where the log argument hits zero.
    pub fn validate(&self) -> Result<()> {
        if self.regime == Convexity::StronglyConvex {
            let c = self.c();
            if 2.0 * self.mu * self.theta * c > self.denom() {
                return Err(Error::Config(format!(
                    "strongly convex progress undefined: require C <= (1+kappa*alpha_max)^2/(2*mu*theta), C = {c}"
                )));
            }
            if 2.0 * self.mu * self.theta * self.alpha_max >= self.denom() {
                return Err(Error::Config(
                    "strongly convex progress undefined at alpha_max".into(),
                ));
            }
        }
        Ok(())
    }

    /// Expected hitting time bound (2p/(2p-1)^2)(2 F_eps/h(C) + log_gamma(C/alpha0)).
    pub fn bound(&self, p: f64, eps: f64) -> Result<f64> {
        self.validate()?;
        let c = self.c();
        let h_c = self.h(eps, c);
        if !(h_c > 0.0) {
            return Err(Error::Config(format!("nonpositive progress h(C) = {h_c}")));
        }
        Ok(probability_factor(p)?
            * (2.0 * self.f_eps(eps) / h_c + log_gamma_term(c, self.alpha0, self.gamma)))
    }
}

/// Constants of the cubic-regularization analysis.
#[derive(Debug, Clone)]
pub struct ArcBoundModel {
    pub theta: f64,
    pub kappa_theta: f64,
    pub sigma_min: f64,
    pub sigma0: f64,
    pub gamma: f64,
    pub kappa_g: f64,
    pub kappa_h: f64,
    pub lip_grad: f64,
    pub lip_hess: f64,
    pub f0_gap: f64,
}

impl ArcBoundModel {
    pub fn sigma_c(&self) -> f64 {
        sigma_c(
            self.kappa_g,
            self.kappa_h,
            self.lip_grad,
            self.lip_hess,
            self.theta,
        )
    }

    pub fn kappa_f(&self) -> f64 {
        kappa_f(self.theta, self.kappa_theta, self.sigma_min)
    }

    /// C = 1/sigma_c in the step-parameter coordinate alpha = 1/sigma.
    pub fn c(&self) -> f64 {
        1.0 / self.sigma_c()
    }

    pub fn h(&self, eps: f64, alpha: f64) -> f64 {
        self.kappa_f() * alpha.min(self.c()).powf(1.5) * eps.powf(1.5)
    }

    pub fn f_eps(&self, _eps: f64) -> f64 {
        self.f0_gap
    }

    pub fn gain_cap(&self, eps: f64) -> f64 {
        self.f_eps(eps)
    }

    pub fn bound(&self, p: f64, eps: f64) -> Result<f64> {
        let c = self.c();
        let h_c = self.h(eps, c);
        if !(h_c > 0.0) {
            return Err(Error::Config(format!("nonpositive progress h(C) = {h_c}")));
        }
        let alpha0 = 1.0 / self.sigma0;
        Ok(probability_factor(p)?
            * (2.0 * self.f_eps(eps) / h_c + log_gamma_term(c, alpha0, self.gamma)))
    }
}

/// Either analysis family, as selected by the experiment configuration.
#[derive(Debug, Clone)]
pub enum BoundModel {
    Ls(LsBoundModel),
    Arc(ArcBoundModel),
}

impl BoundModel {
    pub fn c(&self) -> f64 {
        match self {
            BoundModel::Ls(m) => m.c(),
            BoundModel::Arc(m) => m.c(),
        }
    }

    pub fn h(&self, eps: f64, alpha: f64) -> f64 {
        match self {
            BoundModel::Ls(m) => m.h(eps, alpha),
            BoundModel::Arc(m) => m.h(eps, alpha),
        }
    }

    pub fn gain_cap(&self, eps: f64) -> f64 {
        match self {
            BoundModel::Ls(m) => m.gain_cap(eps),
            BoundModel::Arc(m) => m.gain_cap(eps),
        }
    }

    pub fn bound(&self, p: f64, eps: f64) -> Result<f64> {
        match self {
            BoundModel::Ls(m) => m.bound(p, eps),
            BoundModel::Arc(m) => m.bound(p, eps),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steepest_model(regime: Convexity) -> LsBoundModel {
        LsBoundModel {
            regime,
            theta: 0.5,
            kappa: 0.5,
            alpha_max: 1.0,
            alpha0: 0.6,
            gamma: 0.5,
            lip_grad: 1.0,
            mu: 0.25,
            level_diameter: 2.0,
            beta: 1.0,
            kappa_2: 1.0,
            f0_gap: 3.0,
        }
    }

    #[test]
    fn threshold_hand_value() {
        // theta = 0.5, L = 1, kappa = 0.5 gives C = 0.5/(0.5+0.5).
        let m = steepest_model(Convexity::Nonconvex);
        assert_eq!(m.c(), 0.5);
    }

    #[test]
    fn general_direction_with_unit_constants_matches_steepest() {
        let mut m = steepest_model(Convexity::Nonconvex);
        let c_steepest = m.c();
        m.beta = 1.0;
        m.kappa_2 = 1.0;
        assert_eq!(m.c(), c_steepest);
    }

    #[test]
    fn arc_threshold_is_reciprocal_regularizer() {
        let m = ArcBoundModel {
            theta: 0.3,
            kappa_theta: 0.5,
            sigma_min: 1.0,
            sigma0: 4.0,
            gamma: 0.5,
            kappa_g: 0.25,
            kappa_h: 0.5,
            lip_grad: 0.5,
            lip_hess: 0.5,
            f0_gap: 1.0,
        };
        // sigma_c = (0.5+0.5+0.5+0.5)/0.9 = 2.2222..., C = 0.45.
        assert!((m.sigma_c() - 2.0 / 0.9).abs() < 1e-15);
        assert!((m.c() - 0.45).abs() < 1e-15);
    }

    #[test]
    fn probability_factor_hand_values() {
        assert_eq!(probability_factor(0.75).unwrap(), 6.0);
        assert_eq!(probability_factor(1.0).unwrap(), 2.0);
        assert!(probability_factor(0.5).is_err());
        assert!(probability_factor(0.4).is_err());
    }

    #[test]
    fn log_term_clamped_at_zero() {
        // alpha0 below C means no shrink steps are needed to reach C.
        assert_eq!(log_gamma_term(0.5, 0.25, 0.5), 0.0);
        // alpha0 = 1, C = 0.25, gamma = 0.5: two halvings.
        assert_eq!(log_gamma_term(0.25, 1.0, 0.5), 2.0);
    }

    #[test]
    fn nonconvex_bound_eps_homogeneity() {
        let m = steepest_model(Convexity::Nonconvex);
        let log_t = log_gamma_term(m.c(), m.alpha0, m.gamma);
        let pf = probability_factor(0.8).unwrap();
        let b1 = m.bound(0.8, 1e-2).unwrap();
        let b2 = m.bound(0.8, 5e-3).unwrap();
        let main1 = b1 / pf - log_t;
        let main2 = b2 / pf - log_t;
        assert!((main2 / main1 - 4.0).abs() < 1e-9);
    }

    #[test]
    fn arc_bound_eps_homogeneity() {
        let m = ArcBoundModel {
            theta: 0.3,
            kappa_theta: 0.5,
            sigma_min: 1.0,
            sigma0: 4.0,
            gamma: 0.5,
            kappa_g: 0.25,
            kappa_h: 0.5,
            lip_grad: 0.5,
            lip_hess: 0.5,
            f0_gap: 1.0,
        };
        let pf = probability_factor(0.8).unwrap();
        let log_t = log_gamma_term(m.c(), 0.25, m.gamma);
        let main1 = m.bound(0.8, 1e-2).unwrap() / pf - log_t;
        let main2 = m.bound(0.8, 2.5e-3).unwrap() / pf - log_t;
        assert!((main2 / main1 - 8.0).abs() < 1e-9);
    }

    #[test]
    fn strongly_convex_gate_rejects_undefined_progress() {
        let mut m = steepest_model(Convexity::StronglyConvex);
        assert!(m.validate().is_ok());
        m.mu = 100.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn h_nondecreasing_and_positive_on_range() {
        for regime in [
            Convexity::Nonconvex,
            Convexity::Convex,
            Convexity::StronglyConvex,
        ] {
            let m = steepest_model(regime);
            let mut prev = 0.0;
            for i in 1..=100 {
                let a = m.alpha_max * i as f64 / 100.0;
                let h = m.h(1e-3, a);
                assert!(h > 0.0, "h must be positive on (0, alpha_max]");
                assert!(h >= prev, "h must be nondecreasing");
                prev = h;
            }
        }
    }
}
