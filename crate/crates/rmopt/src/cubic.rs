//! Global solver for the cubic-regularized model subproblem
//! m(s) = gᵀs + ½ sᵀBs + (σ/3)|s|³, via eigendecomposition of B and a
//! safeguarded-Newton root solve of the secular equation ν = σ|s(ν)|,
//! s(ν) = −(B + νI)⁻¹ g.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problems::Point;

#[derive(Debug, Clone)]
pub struct CubicSubproblem {
    pub g: Point,
    pub b: DMatrix<f64>,
    pub sigma: f64,
    /// Relative termination constant of the model-gradient condition.
    pub kappa_theta: f64,
}

#[derive(Debug, Clone)]
pub struct CubicStep {
    pub s: Point,
    /// m(0) − m(s) (the f-independent part of the model decrease).
    pub model_decrease: f64,
    /// Multiplier ν = σ|s| at optimality.
    pub nu: f64,
}

#[derive(Debug, Clone)]
pub struct StepReport {
    /// |sᵀg + sᵀBs + σ|s|³|.
    pub eq42_res1: f64,
    /// sᵀBs + σ|s|³ >= 0 up to rounding.
    pub eq42_ineq_holds: bool,
    /// |∇m(s)| <= kappa_theta · min{1, |s|} · |g|.
    pub eq43_holds: bool,
    /// m(0) − m(s) >= (1/6) σ |s|³ up to rounding.
    pub decrease_bound_holds: bool,
    pub model_grad_norm: f64,
}

pub fn model_value(sub: &CubicSubproblem, s: &Point) -> f64 {
    sub.g.dot(s) + 0.5 * s.dot(&(&sub.b * s)) + sub.sigma / 3.0 * s.norm().powi(3)
}

pub fn model_gradient(sub: &CubicSubproblem, s: &Point) -> Point {
    &sub.g + &sub.b * s + s * (sub.sigma * s.norm())
}

const HARD_CASE_TOL: f64 = 1e-12;
const MAX_ROOT_ITERS: usize = 200;

pub fn solve_cubic(sub: &CubicSubproblem) -> Result<CubicStep> {
    let n = sub.g.len();
    if sub.sigma <= 0.0 {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    if sub.g.iter().any(|v| !v.is_finite()) || sub.b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite cubic subproblem data".into()));
    }
    let sym = (&sub.b + sub.b.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let lambda = &eig.eigenvalues;
    let v = &eig.eigenvectors;
    let ghat = v.transpose() * &sub.g;
    let lambda_min = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    let gnorm = sub.g.norm();

    let finish = |s: Point, nu: f64| -> CubicStep {
        let dec = -model_value(sub, &s);
        CubicStep {
            s,
            model_decrease: dec,
            nu,
        }
    };

    if gnorm == 0.0 {
        if lambda_min >= 0.0 {
            return Ok(finish(DVector::zeros(n), 0.0));
        }
        // Pure negative-curvature step along the most negative eigenvector.
        let imin = argmin(lambda);
        let dir = v.column(imin).into_owned();
        let norm = -lambda_min / sub.sigma;
        return Ok(finish(dir * norm, -lambda_min));
    }

    let nu_lo = (-lambda_min).max(0.0);
    // |s(ν)|² in the eigenbasis.
    let psi = |nu: f64| -> f64 {
        (0..n)
            .map(|i| {
                let d = lambda[i] + nu;
                (ghat[i] / d).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    };
    let min_component: f64 = (0..n)
        .filter(|&i| lambda[i] - lambda_min < 1e-10 * (1.0 + lambda_min.abs()))
        .map(|i| ghat[i] * ghat[i])
        .sum::<f64>()
        .sqrt();

    if lambda_min < 0.0 && min_component < HARD_CASE_TOL * gnorm {
        // Potential hard case: no gradient component on the bottom eigenspace.
        let nu = nu_lo;
        let mut s_hat = DVector::zeros(n);
        for i in 0..n {
            let d = lambda[i] + nu;
            if d > 1e-10 * (1.0 + lambda_min.abs()) {
                s_hat[i] = -ghat[i] / d;
            }
        }
        let perp_norm = s_hat.norm();
        let target = nu / sub.sigma;
        if perp_norm <= target {
            // Hard case confirmed: pad with a bottom-eigenvector component to
            // reach |s| = ν/σ.
            let tau = (target * target - perp_norm * perp_norm).sqrt();
            let imin = argmin(lambda);
            s_hat[imin] = tau;
            let s = v * s_hat;
            return Ok(finish(s, nu));
        }
        // Otherwise an interior root exists above nu_lo; fall through.
    }

    // Regular case: σ·psi(ν) − ν is strictly decreasing on (nu_lo, ∞) with a
    // positive limit at nu_lo+ and −∞ at ∞.
    let phi = |nu: f64| sub.sigma * psi(nu) - nu;
    let mut lo = nu_lo;
    let mut hi = (nu_lo + 1.0).max(nu_lo + (sub.sigma * gnorm).sqrt());
    let mut grow = 0;
    while phi(hi) > 0.0 {
        hi = nu_lo + 2.0 * (hi - nu_lo) + 1.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::Numerical("cubic secular bracket growth failed".into()));
        }
    }
    let mut nu = 0.5 * (lo.max(1e-300) + hi);
    if nu <= lo {
        nu = lo + 0.5 * (hi - lo);
    }
    let mut converged = false;
    for _ in 0..MAX_ROOT_ITERS {
        let pv = psi(nu);
        let f = sub.sigma * pv - nu;
        if f.abs() <= 1e-15 * (1.0 + nu) {
            converged = true;
            break;
        }
        if f > 0.0 {
            lo = nu;
        } else {
            hi = nu;
        }
        // Newton step on φ; ψ'(ν) = −Σ ĝ²/(λ+ν)³ / ψ.
        let dpsi = -(0..n)
            .map(|i| {
                let d = lambda[i] + nu;
                ghat[i] * ghat[i] / (d * d * d)
            })
            .sum::<f64>()
            / pv;
        let dphi = sub.sigma * dpsi - 1.0;
        let newton = nu - f / dphi;
        nu = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * (1.0 + hi) {
            converged = true;
            break;
        }
    }
    if !converged {
        let res = phi(nu).abs();
        if res > 1e-10 * (1.0 + nu) {
            return Err(Error::Numerical(format!(
                "cubic secular solve stalled: nu={nu}, residual={res}"
            )));
        }
    }
    let mut s_hat = DVector::zeros(n);
    for i in 0..n {
        s_hat[i] = -ghat[i] / (lambda[i] + nu);
    }
    let s = v * s_hat;
    Ok(finish(s, nu))
}

pub fn verify_step_conditions(sub: &CubicSubproblem, s: &Point) -> StepReport {
    let sn = s.norm();
    let sbs = s.dot(&(&sub.b * s));
    let cube = sub.sigma * sn.powi(3);
    let eq42_res1 = (s.dot(&sub.g) + sbs + cube).abs();
    let scale = s.dot(&sub.g).abs() + sbs.abs() + cube;
    let eq42_ineq_holds = sbs + cube >= -1e-10 * (1.0 + scale);
    let mg = model_gradient(sub, s);
    let gn = sub.g.norm();
    let eq43_holds = if sn == 0.0 {
        gn == 0.0
    } else {
        mg.norm() <= sub.kappa_theta * sn.min(1.0) * gn
    };
    let dec = -model_value(sub, s);
    let decrease_bound_holds = dec >= cube / 6.0 - 1e-10 * (1.0 + dec.abs() + cube);
    StepReport {
        eq42_res1,
        eq42_ineq_holds,
        eq43_holds,
        decrease_bound_holds,
        model_grad_norm: mg.norm(),
    }
}

fn argmin(v: &DVector<f64>) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] < v[best] {
            best = i;
        }
    }
    best
}
