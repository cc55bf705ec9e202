//! Random model oracles that are sufficiently accurate with probability >= p.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::problems::{FiniteSumObjective, Objective, Point};
use crate::rng::uniform_direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corruption {
    ZeroVector,
    NegatedGradient,
    RandomHuge,
    ScaledNoise,
}

impl std::str::FromStr for Corruption {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero_vector" => Ok(Self::ZeroVector),
            "negated_gradient" => Ok(Self::NegatedGradient),
            "random_huge" => Ok(Self::RandomHuge),
            "scaled_noise" => Ok(Self::ScaledNoise),
            other => Err(Error::Config(format!("unknown corruption mode: {other}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    /// Probability of an accurate draw, conditioned on the past.
    pub p: f64,
    pub corruption: Corruption,
    /// Line-search accuracy constant kappa.
    pub kappa: f64,
    /// Second-order accuracy constants.
    pub kappa_g: f64,
    pub kappa_h: f64,
    /// Fraction of the maximal admissible error radius used on true
    /// line-search draws.
    pub eta: f64,
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::Config("oracle.p must be in (0,1]".into()));
        }
        if !(self.eta >= 0.0 && self.eta < 1.0) {
            return Err(Error::Config("oracle.eta must be in [0,1)".into()));
        }
        if self.kappa <= 0.0 || self.kappa_g <= 0.0 || self.kappa_h <= 0.0 {
            return Err(Error::Config("oracle accuracy constants must be positive".into()));
        }
        Ok(())
    }
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            p: 1.0,
            corruption: Corruption::RandomHuge,
            kappa: 0.5,
            kappa_g: 1.0,
            kappa_h: 1.0,
            eta: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearModel {
    pub g: Point,
    /// Whether the oracle drew the accurate branch.
    pub intended_true: bool,
}

#[derive(Debug, Clone)]
pub struct QuadraticModel {
    pub g: Point,
    pub b: DMatrix<f64>,
    pub intended_true: bool,
}

const HUGE_SCALE: f64 = 1e3;

/// Model gradient for the line-search accuracy regime. On a true draw the
/// error radius eta*kappa*alpha*|grad|/(1+kappa*alpha) provably satisfies
/// |g − grad f| <= kappa*alpha*|g|.
pub fn sample_linear_model<R: Rng>(
    true_grad: &Point,
    alpha: f64,
    cfg: &OracleConfig,
    rng: &mut R,
) -> LinearModel {
    let n = true_grad.len();
    let gnorm = true_grad.norm();
    if gnorm == 0.0 {
        return LinearModel {
            g: true_grad.clone(),
            intended_true: true,
        };
    }
    let accurate = rng.gen::<f64>() < cfg.p;
    if accurate {
        let radius = cfg.eta * cfg.kappa * alpha * gnorm / (1.0 + cfg.kappa * alpha);
        let g = if radius > 0.0 {
            true_grad + uniform_direction(rng, n) * radius
        } else {
            true_grad.clone()
        };
        LinearModel {
            g,
            intended_true: true,
        }
    } else {
        let g = match cfg.corruption {
            Corruption::ZeroVector => DVector::zeros(n),
            Corruption::NegatedGradient => -true_grad,
            Corruption::RandomHuge => {
                uniform_direction(rng, n) * (HUGE_SCALE * (1.0 + gnorm))
            }
            Corruption::ScaledNoise => {
                let zeta = rng.gen_range(1.0..3.0);
                true_grad + uniform_direction(rng, n) * (zeta * gnorm)
            }
        };
        LinearModel {
            g,
            intended_true: false,
        }
    }
}

/// Accuracy indicator of the line-search regime: |g − grad| <= kappa*alpha*|g|.
pub fn check_ls_accuracy(g: &Point, true_grad: &Point, kappa: f64, alpha: f64) -> bool {
    (g - true_grad).norm() <= kappa * alpha * g.norm()
}

/// Model pair for ARC. The true branch is the exact (gradient, Hessian),
/// which satisfies the step-wise accuracy indicator for every step.
pub fn sample_quadratic_model<R: Rng>(
    obj: &Objective,
    x: &Point,
    true_grad: &Point,
    cfg: &OracleConfig,
    rng: &mut R,
) -> QuadraticModel {
    let n = true_grad.len();
    let accurate = rng.gen::<f64>() < cfg.p;
    if accurate {
        return QuadraticModel {
            g: true_grad.clone(),
            b: obj.hess(x),
            intended_true: true,
        };
    }
    let gnorm = true_grad.norm();
    let hess = obj.hess(x);
    let (g, b) = match cfg.corruption {
        Corruption::ZeroVector => (DVector::zeros(n), DMatrix::zeros(n, n)),
        Corruption::NegatedGradient => (-true_grad, -&hess),
        Corruption::RandomHuge => {
            let g = uniform_direction(rng, n) * (HUGE_SCALE * (1.0 + gnorm));
            let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let sym = (&m + m.transpose()) * 0.5;
            (g, sym * (HUGE_SCALE * (1.0 + gnorm)))
        }
        Corruption::ScaledNoise => {
            let zeta: f64 = rng.gen_range(1.0..3.0);
            let g = true_grad + uniform_direction(rng, n) * (zeta * gnorm);
            let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let sym = (&m + m.transpose()) * 0.5;
            let hscale = crate::problems::spectral_norm(&hess).max(1.0);
            (g, &hess + sym * (zeta * hscale))
        }
    };
    QuadraticModel {
        g,
        b,
        intended_true: false,
    }
}

/// Step-wise second-order accuracy indicator:
/// |grad f − g| <= kappa_g |s|²  and  |(H − B)s| <= kappa_h |s|².
pub fn check_arc_accuracy(
    g: &Point,
    b: &DMatrix<f64>,
    true_grad: &Point,
    true_hess: &DMatrix<f64>,
    s: &Point,
    kappa_g: f64,
    kappa_h: f64,
) -> bool {
    let sn = s.norm();
    if sn == 0.0 {
        return true;
    }
    let sn2 = sn * sn;
    (true_grad - g).norm() <= kappa_g * sn2 && ((true_hess - b) * s).norm() <= kappa_h * sn2
}

/// Sum of a uniformly random size-`batch_size` subset of component gradients,
/// rescaled by N/|S| to estimate the aggregate (sum) gradient.
pub fn subsampled_gradient<R: Rng>(
    fs: &FiniteSumObjective,
    x: &Point,
    batch_size: usize,
    rng: &mut R,
) -> Result<Point> {
    let n = fs.num_terms();
    if batch_size == 0 || batch_size > n {
        return Err(Error::InvalidArgument(format!(
            "batch_size must be in [1, {n}]"
        )));
    }
    let idx = rand::seq::index::sample(rng, n, batch_size);
    let mut g = DVector::zeros(x.len());
    for i in idx.iter() {
        g += fs.component_grad(i, x);
    }
    Ok(g * (n as f64 / batch_size as f64))
}

pub(crate) fn required_batch_size_from(
    w: f64,
    grad_norm: f64,
    n_cap: usize,
    alpha: f64,
    target_prob: f64,
) -> Result<usize> {
    if grad_norm == 0.0 {
        return Err(Error::InvalidArgument(
            "required_batch_size at a stationary point".into(),
        ));
    }
    if !(target_prob > 0.0 && target_prob < 1.0) {
        return Err(Error::InvalidArgument("target_prob must be in (0,1)".into()));
    }
    if w == 0.0 {
        return Ok(1);
    }
    let t = alpha.min(0.5);
    // Smallest |S| with w / (t² |grad|² |S|) <= 1 − target_prob, capped at N.
    let needed = w / (t * t * grad_norm * grad_norm * (1.0 - target_prob));
    let s = needed.ceil().max(1.0);
    Ok((s as usize).min(n_cap))
}

/// Chebyshev-based batch size making the subsampled gradient sufficiently
/// accurate with the given probability; capped at the number of terms.
pub fn required_batch_size(
    fs: &FiniteSumObjective,
    x: &Point,
    alpha: f64,
    target_prob: f64,
) -> Result<usize> {
    let gnorm = fs.aggregate.grad(x).norm();
    required_batch_size_from(
        fs.variance_bound,
        gnorm,
        fs.num_terms(),
        alpha,
        target_prob,
    )
}

/// Central-difference linear model over the ball B(x, delta), with
/// per-evaluation corruption probability chosen so the whole model is
/// accurate with probability >= p.
pub fn sample_fd_linear_model<R: Rng>(
    obj: &Objective,
    x: &Point,
    delta: f64,
    p: f64,
    rng: &mut R,
) -> LinearModel {
    let n = obj.dim;
    let q = 1.0 - p.powf(1.0 / (2 * n) as f64);
    let mut intended_true = true;
    let mut eval = |y: &Point, rng: &mut R| -> f64 {
        let v = obj.eval(y);
        if rng.gen::<f64>() < q {
            intended_true = false;
            v + HUGE_SCALE * (1.0 + v.abs()) * rng.gen_range(-1.0..1.0)
        } else {
            v
        }
    };
    let h = delta.max(1e-12);
    let g = DVector::from_fn(n, |i, _| {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        (eval(&xp, rng) - eval(&xm, rng)) / (2.0 * h)
    });
    LinearModel { g, intended_true }
}

/// Gradient-error constant of the central-difference model over its ball:
/// the model is fully linear with kappa_eg = L(1 + sqrt(n)/2).
pub fn fd_fully_linear_kappa_g(obj: &Objective) -> f64 {
    obj.lip_grad * (1.0 + (obj.dim as f64).sqrt() / 2.0)
}
