//! Test objectives with the analytic constants the theory consumes.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{gaussian_vector, seed_rng};

pub type Point = DVector<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convexity {
    Nonconvex,
    Convex,
    StronglyConvex,
}

type EvalFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;
type HessFn = Arc<dyn Fn(&Point) -> DMatrix<f64> + Send + Sync>;
type DiamFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// A smooth objective with value/gradient/Hessian access and known constants.
#[derive(Clone)]
pub struct Objective {
    pub name: String,
    pub dim: usize,
    eval: EvalFn,
    grad: GradFn,
    hess: HessFn,
    /// Global minimum value.
    pub f_star: f64,
    pub x_star: Option<Point>,
    /// Lipschitz constant of the gradient (on `domain_box` if declared).
    pub lip_grad: f64,
    /// Lipschitz constant of the Hessian, when known or estimated.
    pub lip_hess: Option<f64>,
    /// Strong convexity modulus (0 if not strongly convex).
    pub strong_mu: f64,
    pub convexity: Convexity,
    /// Diameter bound of the level set through a start point.
    level_diameter: Option<DiamFn>,
    /// Whether `lip_grad`/`lip_hess` are sampled estimates rather than analytic.
    pub estimated_constants: bool,
    /// Region on which the declared constants are valid; accepted iterates
    /// leaving it abort the run.
    pub domain_box: Option<(Point, Point)>,
    /// Default start point for experiments.
    pub default_x0: Point,
}

impl Objective {
    pub fn eval(&self, x: &Point) -> f64 {
        (self.eval)(x)
    }

    pub fn grad(&self, x: &Point) -> Point {
        (self.grad)(x)
    }

    pub fn hess(&self, x: &Point) -> DMatrix<f64> {
        (self.hess)(x)
    }

    pub fn level_diameter(&self, x0: &Point) -> Option<f64> {
        self.level_diameter.as_ref().map(|d| d(x0))
    }

    pub fn in_domain(&self, x: &Point) -> bool {
        match &self.domain_box {
            None => true,
            Some((lo, hi)) => x
                .iter()
                .zip(lo.iter().zip(hi.iter()))
                .all(|(xi, (l, h))| *xi >= *l && *xi <= *h),
        }
    }
}

/// Sum of N strongly convex quadratic terms, for subsampled-gradient oracles.
#[derive(Clone)]
pub struct FiniteSumObjective {
    pub aggregate: Objective,
    /// Component curvatures a_i (each term is (a_i/2)·|x − c_i|²).
    pub curvatures: Vec<f64>,
    /// Component minimizers c_i.
    pub centers: Vec<Point>,
    /// Bound on the dispersion of the scaled component gradients; see
    /// `variance_bound` construction.
    pub variance_bound: f64,
}

impl FiniteSumObjective {
    pub fn num_terms(&self) -> usize {
        self.curvatures.len()
    }

    /// Gradient of one component of the sum.
    pub fn component_grad(&self, i: usize, x: &Point) -> Point {
        (x - &self.centers[i]) * self.curvatures[i]
    }
}

/// f(x) = ½ xᵀQx with eigenvalues spanning [1, condition_number] under a
/// seeded random rotation. Strongly convex with L = condition_number, μ = 1.
pub fn make_quadratic(dim: usize, condition_number: f64, seed: u64) -> Result<Objective> {
    if dim < 1 {
        return Err(Error::InvalidArgument("dim must be >= 1".into()));
    }
    if condition_number < 1.0 {
        return Err(Error::InvalidArgument(
            "condition_number must be >= 1".into(),
        ));
    }
    let mut rng = seed_rng(seed);
    let rot = random_rotation(dim, &mut rng);
    let eigs: Vec<f64> = (0..dim)
        .map(|i| {
            if dim == 1 {
                condition_number
            } else {
                1.0 + (condition_number - 1.0) * i as f64 / (dim - 1) as f64
            }
        })
        .collect();
    let d = DMatrix::from_diagonal(&DVector::from_vec(eigs));
    let q = &rot * d * rot.transpose();
    // Symmetrize away rounding noise.
    let q = (&q + q.transpose()) * 0.5;
    let q_eval = q.clone();
    let q_grad = q.clone();
    let q_hess = q.clone();
    Ok(Objective {
        name: format!("quadratic(dim={dim},cond={condition_number})"),
        dim,
        eval: Arc::new(move |x| 0.5 * x.dot(&(&q_eval * x))),
        grad: Arc::new(move |x| &q_grad * x),
        hess: Arc::new(move |_| q_hess.clone()),
        f_star: 0.0,
        x_star: Some(DVector::zeros(dim)),
        lip_grad: condition_number,
        lip_hess: Some(0.0),
        strong_mu: 1.0,
        convexity: Convexity::StronglyConvex,
        level_diameter: None,
        estimated_constants: false,
        domain_box: None,
        default_x0: DVector::from_element(dim, 1.0),
    })
}

/// f(x) = sqrt(1 + |x|²). Convex with bounded level sets; L = 1, f* = 1,
/// D(x0) = sqrt(f(x0)² − 1). The Hessian-Lipschitz bound 3 is conservative
/// (the radial profile's third derivative peaks below 0.9).
pub fn make_pseudo_huber(dim: usize) -> Result<Objective> {
    if dim < 1 {
        return Err(Error::InvalidArgument("dim must be >= 1".into()));
    }
    Ok(Objective {
        name: format!("pseudo_huber(dim={dim})"),
        dim,
        eval: Arc::new(|x| (1.0 + x.norm_squared()).sqrt()),
        grad: Arc::new(|x| x / (1.0 + x.norm_squared()).sqrt()),
        hess: Arc::new(|x| {
            let f = (1.0 + x.norm_squared()).sqrt();
            let n = x.len();
            let outer = x * x.transpose();
            DMatrix::identity(n, n) / f - outer / f.powi(3)
        }),
        f_star: 1.0,
        x_star: Some(DVector::zeros(dim)),
        lip_grad: 1.0,
        lip_hess: Some(3.0),
        strong_mu: 0.0,
        convexity: Convexity::Convex,
        level_diameter: Some(Arc::new(|x0: &Point| {
            let f0 = (1.0 + x0.norm_squared()).sqrt();
            (f0 * f0 - 1.0).sqrt()
        })),
        estimated_constants: false,
        domain_box: None,
        default_x0: DVector::from_element(dim, 1.0),
    })
}

fn rosenbrock_eval(x: &Point) -> f64 {
    let n = x.len();
    (0..n - 1)
        .map(|i| {
            let a = x[i + 1] - x[i] * x[i];
            let b = 1.0 - x[i];
            100.0 * a * a + b * b
        })
        .sum()
}

fn rosenbrock_grad(x: &Point) -> Point {
    let n = x.len();
    let mut g = DVector::zeros(n);
    for i in 0..n - 1 {
        let a = x[i + 1] - x[i] * x[i];
        g[i] += -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
        g[i + 1] += 200.0 * a;
    }
    g
}

fn rosenbrock_hess(x: &Point) -> DMatrix<f64> {
    let n = x.len();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        let a = x[i + 1] - x[i] * x[i];
        h[(i, i)] += -400.0 * a + 800.0 * x[i] * x[i] + 2.0;
        h[(i, i + 1)] += -400.0 * x[i];
        h[(i + 1, i)] += -400.0 * x[i];
        h[(i + 1, i + 1)] += 200.0;
    }
    h
}

/// Chained Rosenbrock on a domain box. Nonconvex; L and L_H are sampled
/// estimates over the box, inflated by a 1.1 safety factor.
pub fn make_rosenbrock(dim: usize, box_lo: f64, box_hi: f64) -> Result<Objective> {
    if dim < 2 {
        return Err(Error::InvalidArgument("dim must be >= 2".into()));
    }
    if !(box_hi > box_lo) {
        return Err(Error::InvalidArgument("degenerate domain box".into()));
    }
    let mut rng = seed_rng(0x9e3779b97f4a7c15);
    let mut sample: Vec<Point> = Vec::new();
    if dim <= 12 {
        // All box corners, so the estimate covers the extreme curvature.
        for mask in 0..(1usize << dim) {
            sample.push(DVector::from_fn(dim, |i, _| {
                if mask >> i & 1 == 1 {
                    box_hi
                } else {
                    box_lo
                }
            }));
        }
    }
    if dim == 2 {
        let m = 41;
        for i in 0..m {
            for j in 0..m {
                let t = |k: usize| box_lo + (box_hi - box_lo) * k as f64 / (m - 1) as f64;
                sample.push(DVector::from_vec(vec![t(i), t(j)]));
            }
        }
    }
    while sample.len() < 3000 {
        sample.push(DVector::from_fn(dim, |_, _| {
            rng.gen_range(box_lo..=box_hi)
        }));
    }
    let mut l_max: f64 = 0.0;
    let mut lh_max: f64 = 0.0;
    let delta = 1e-4 * (box_hi - box_lo);
    for x in &sample {
        let h = rosenbrock_hess(x);
        l_max = l_max.max(spectral_norm(&h));
        let u = crate::rng::uniform_direction(&mut rng, dim);
        let h2 = rosenbrock_hess(&(x + &u * delta));
        lh_max = lh_max.max(spectral_norm(&(h2 - h)) / delta);
    }
    let lo = DVector::from_element(dim, box_lo);
    let hi = DVector::from_element(dim, box_hi);
    let mut x0 = DVector::from_element(dim, -1.2);
    for i in (1..dim).step_by(2) {
        x0[i] = 1.0;
    }
    Ok(Objective {
        name: format!("rosenbrock(dim={dim})"),
        dim,
        eval: Arc::new(rosenbrock_eval),
        grad: Arc::new(rosenbrock_grad),
        hess: Arc::new(rosenbrock_hess),
        f_star: 0.0,
        x_star: Some(DVector::from_element(dim, 1.0)),
        lip_grad: 1.1 * l_max,
        lip_hess: Some(1.1 * lh_max),
        strong_mu: 0.0,
        convexity: Convexity::Nonconvex,
        level_diameter: None,
        estimated_constants: true,
        domain_box: Some((lo, hi)),
        default_x0: x0,
    })
}

/// Nonconvex ramp whose gradient decays like 1/t along the descent path, so
/// the gradient-norm hitting time genuinely scales as 1/eps². The profile is
/// C² with |phi''| <= 1 everywhere: quadratic for t <= 1, logarithmic slope
/// −1/t on [1, U], and a quadratic basin with minimum at t = 2U. Extra
/// coordinates add ½·x_i².
pub fn make_log_ramp(dim: usize, ramp_length: f64) -> Result<Objective> {
    if dim < 1 {
        return Err(Error::InvalidArgument("dim must be >= 1".into()));
    }
    if ramp_length < 2.0 {
        return Err(Error::InvalidArgument("ramp_length must be >= 2".into()));
    }
    let u = ramp_length;
    let c_b = u.ln() + 0.5;
    let c_a = c_b + 1.5;
    let phi = move |t: f64| -> f64 {
        if t <= 1.0 {
            0.5 * t * t - 2.0 * t + c_a
        } else if t <= u {
            c_b - t.ln()
        } else {
            let d = t - u;
            (c_b - u.ln()) - d / u + 0.5 * d * d / (u * u)
        }
    };
    let dphi = move |t: f64| -> f64 {
        if t <= 1.0 {
            t - 2.0
        } else if t <= u {
            -1.0 / t
        } else {
            -1.0 / u + (t - u) / (u * u)
        }
    };
    let d2phi = move |t: f64| -> f64 {
        if t <= 1.0 {
            1.0
        } else if t <= u {
            1.0 / (t * t)
        } else {
            1.0 / (u * u)
        }
    };
    let mut x_star = DVector::zeros(dim);
    x_star[0] = 2.0 * u;
    let mut x0 = DVector::zeros(dim);
    x0[0] = 1.0;
    Ok(Objective {
        name: format!("log_ramp(dim={dim},U={ramp_length})"),
        dim,
        eval: Arc::new(move |x| {
            phi(x[0]) + 0.5 * x.rows(1, x.len() - 1).norm_squared()
        }),
        grad: Arc::new(move |x| {
            let mut g = x.clone();
            g[0] = dphi(x[0]);
            g
        }),
        hess: Arc::new(move |x| {
            let n = x.len();
            let mut h = DMatrix::identity(n, n);
            h[(0, 0)] = d2phi(x[0]);
            h
        }),
        f_star: 0.0,
        x_star: Some(x_star),
        lip_grad: 1.0,
        lip_hess: Some(1.0),
        strong_mu: 0.0,
        convexity: Convexity::Nonconvex,
        level_diameter: None,
        estimated_constants: false,
        domain_box: None,
        default_x0: x0,
    })
}

/// f(x) = |x|^q with even q >= 4: convex with bounded level sets and a very
/// flat minimum, so the gap hitting time scales as eps^{-(q-2)/q}. Constants
/// are valid on the ball of the given radius.
pub fn make_power_norm(dim: usize, q: u32, radius: f64) -> Result<Objective> {
    if dim < 1 {
        return Err(Error::InvalidArgument("dim must be >= 1".into()));
    }
    if q < 4 || q % 2 != 0 {
        return Err(Error::InvalidArgument("q must be even and >= 4".into()));
    }
    if radius <= 0.0 {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let qf = f64::from(q);
    let l = qf * (qf - 1.0) * radius.powi(q as i32 - 2);
    let lh = qf * (qf - 1.0) * (qf - 2.0) * radius.powi(q as i32 - 3);
    let lo = DVector::from_element(dim, -radius);
    let hi = DVector::from_element(dim, radius);
    let mut x0 = DVector::zeros(dim);
    x0[0] = 0.9 * radius;
    Ok(Objective {
        name: format!("power_norm(dim={dim},q={q})"),
        dim,
        eval: Arc::new(move |x| x.norm().powf(qf)),
        grad: Arc::new(move |x| {
            let r = x.norm();
            if r == 0.0 {
                DVector::zeros(x.len())
            } else {
                x * (qf * r.powf(qf - 2.0))
            }
        }),
        hess: Arc::new(move |x| {
            let n = x.len();
            let r = x.norm();
            if r == 0.0 {
                return DMatrix::zeros(n, n);
            }
            let outer = x * x.transpose();
            DMatrix::identity(n, n) * (qf * r.powf(qf - 2.0))
                + outer * (qf * (qf - 2.0) * r.powf(qf - 4.0))
        }),
        f_star: 0.0,
        x_star: Some(DVector::zeros(dim)),
        lip_grad: l,
        lip_hess: Some(lh),
        strong_mu: 0.0,
        convexity: Convexity::Convex,
        level_diameter: Some(Arc::new(move |x0: &Point| x0.norm().powf(qf).powf(1.0 / qf))),
        estimated_constants: false,
        domain_box: Some((lo, hi)),
        default_x0: x0,
    })
}

/// N strongly convex quadratic terms (a_i/2)·|x − c_i|² with seeded random
/// centers of the given spread.
pub fn make_finite_sum(
    dim: usize,
    num_terms: usize,
    heterogeneity: f64,
    seed: u64,
) -> Result<FiniteSumObjective> {
    if dim < 1 || num_terms < 1 {
        return Err(Error::InvalidArgument(
            "dim and num_terms must be >= 1".into(),
        ));
    }
    if heterogeneity < 0.0 {
        return Err(Error::InvalidArgument(
            "heterogeneity must be nonnegative".into(),
        ));
    }
    let mut rng = seed_rng(seed);
    let curvatures: Vec<f64> = (0..num_terms)
        .map(|_| {
            if heterogeneity == 0.0 {
                1.5
            } else {
                rng.gen_range(1.0..2.0)
            }
        })
        .collect();
    let centers: Vec<Point> = (0..num_terms)
        .map(|_| {
            if heterogeneity == 0.0 {
                DVector::zeros(dim)
            } else {
                gaussian_vector(&mut rng, dim) * heterogeneity
            }
        })
        .collect();
    // Aggregate: ½ xᵀ(ā I)x − bᵀx + const with ā = Σ a_i, b = Σ a_i c_i.
    let a_bar: f64 = curvatures.iter().sum();
    let mut b = DVector::zeros(dim);
    for (a, c) in curvatures.iter().zip(&centers) {
        b += c * *a;
    }
    let x_star = &b / a_bar;
    let cs = curvatures.clone();
    let ce = centers.clone();
    let eval = move |x: &Point| -> f64 {
        cs.iter()
            .zip(&ce)
            .map(|(a, c)| 0.5 * a * (x - c).norm_squared())
            .sum()
    };
    let f_star = eval(&x_star);
    let cs2 = curvatures.clone();
    let ce2 = centers.clone();
    let a_hess = a_bar;
    let n_terms = num_terms as f64;
    // Dispersion of the scaled component gradients at the aggregate minimizer:
    // w = (1/N) Σ |N·∇f_i(x*) − ∇f(x*)|².
    let variance_bound = {
        let mut acc = 0.0;
        for (a, c) in curvatures.iter().zip(&centers) {
            let gi = (&x_star - c) * *a * n_terms;
            acc += gi.norm_squared();
        }
        acc / n_terms
    };
    let lip_grad = a_bar;
    let mu = a_bar;
    let aggregate = Objective {
        name: format!("finite_sum(dim={dim},N={num_terms})"),
        dim,
        eval: Arc::new(eval),
        grad: Arc::new(move |x| {
            let mut g = DVector::zeros(x.len());
            for (a, c) in cs2.iter().zip(&ce2) {
                g += (x - c) * *a;
            }
            g
        }),
        hess: Arc::new(move |x| DMatrix::identity(x.len(), x.len()) * a_hess),
        f_star,
        x_star: Some(x_star),
        lip_grad,
        lip_hess: Some(0.0),
        strong_mu: mu,
        convexity: Convexity::StronglyConvex,
        level_diameter: None,
        estimated_constants: false,
        domain_box: None,
        default_x0: DVector::from_element(dim, 1.0),
    };
    Ok(FiniteSumObjective {
        aggregate,
        curvatures,
        centers,
        variance_bound,
    })
}

fn random_rotation<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    if dim == 1 {
        return DMatrix::identity(1, 1);
    }
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample(rand_distr::StandardNormal));
    let qr = g.qr();
    qr.q()
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &e| acc.max(e.abs()))
}

/// Central finite-difference gradient of the objective's value function.
pub fn fd_grad(obj: &Objective, x: &Point, h: f64) -> Point {
    DVector::from_fn(obj.dim, |i, _| {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        (obj.eval(&xp) - obj.eval(&xm)) / (2.0 * h)
    })
}

/// Central finite-difference Jacobian of the gradient.
pub fn fd_hess(obj: &Objective, x: &Point, h: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(obj.dim, obj.dim);
    for i in 0..obj.dim {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let col = (obj.grad(&xp) - obj.grad(&xm)) / (2.0 * h);
        m.set_column(i, &col);
    }
    (&m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::uniform_direction;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    #[test]
    fn quadratic_identity_case() {
        let obj = make_quadratic(3, 1.0, 99).unwrap();
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert!((obj.eval(&e1) - 0.5).abs() < 1e-12);
        assert!((obj.grad(&e1) - &e1).norm() < 1e-12);
    }

    #[test]
    fn quadratic_eigenvalues_span_condition_number() {
        let obj = make_quadratic(2, 100.0, 7).unwrap();
        let x = DVector::zeros(2);
        let mut eigs: Vec<f64> = obj.hess(&x).symmetric_eigen().eigenvalues.iter().copied().collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((eigs[0] - 1.0).abs() < 1e-10);
        assert!((eigs[1] - 100.0).abs() < 1e-10);
    }

    #[test]
    fn quadratic_minimizer_is_stationary() {
        let obj = make_quadratic(5, 30.0, 3).unwrap();
        let xs = obj.x_star.clone().unwrap();
        assert_eq!(obj.eval(&xs), 0.0);
        assert_eq!(obj.grad(&xs).norm(), 0.0);
    }

    #[test]
    fn quadratic_rejects_bad_condition_number() {
        assert!(make_quadratic(2, 0.5, 1).is_err());
    }

    #[test]
    fn pseudo_huber_frozen_values() {
        let obj = make_pseudo_huber(1).unwrap();
        let x = DVector::from_vec(vec![1.0]);
        assert!((obj.eval(&x) - 2.0f64.sqrt()).abs() < 1e-12);
        assert!((obj.grad(&x)[0] - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
        let zero = DVector::from_vec(vec![0.0]);
        assert!((obj.eval(&zero) - 1.0).abs() < 1e-15);
        assert_eq!(obj.grad(&zero).norm(), 0.0);
    }

    #[test]
    fn pseudo_huber_level_diameter() {
        // Point with f(x0) = 2 has D = sqrt(3).
        let obj = make_pseudo_huber(2).unwrap();
        let r = 3.0f64.sqrt();
        let x0 = DVector::from_vec(vec![r, 0.0]);
        assert!((obj.eval(&x0) - 2.0).abs() < 1e-12);
        let d = obj.level_diameter(&x0).unwrap();
        assert!((d - 3.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pseudo_huber_hessian_lipschitz_bound_holds() {
        let obj = make_pseudo_huber(3).unwrap();
        let mut rng = seed_rng(5);
        let mut max_ratio = 0.0f64;
        for _ in 0..200 {
            let x = gaussian_vector(&mut rng, 3) * 2.0;
            let y = &x + uniform_direction(&mut rng, 3) * 1e-3;
            let num = spectral_norm(&(obj.hess(&x) - obj.hess(&y)));
            max_ratio = max_ratio.max(num / (&x - &y).norm());
        }
        assert!(max_ratio <= 3.0, "observed {max_ratio}");
    }

    #[test]
    fn rosenbrock_frozen_values() {
        let obj = make_rosenbrock(2, -2.0, 2.0).unwrap();
        let origin = DVector::from_vec(vec![0.0, 0.0]);
        assert!((obj.eval(&origin) - 1.0).abs() < 1e-12);
        let g = obj.grad(&origin);
        assert!((g[0] + 2.0).abs() < 1e-12 && g[1].abs() < 1e-12);
        let ones = DVector::from_vec(vec![1.0, 1.0]);
        assert_eq!(obj.eval(&ones), 0.0);
        assert_eq!(obj.grad(&ones).norm(), 0.0);
    }

    #[test]
    fn rosenbrock_estimate_covers_corner_curvature() {
        let obj = make_rosenbrock(2, -2.0, 2.0).unwrap();
        let corner = DVector::from_vec(vec![-2.0, -2.0]);
        let corner_norm = spectral_norm(&obj.hess(&corner));
        assert!(obj.lip_grad > corner_norm);
    }

    #[test]
    fn rosenbrock_rejects_degenerate_box() {
        assert!(make_rosenbrock(2, 1.0, 1.0).is_err());
    }

    #[test]
    fn log_ramp_profile() {
        let obj = make_log_ramp(1, 100.0).unwrap();
        let xs = obj.x_star.clone().unwrap();
        assert!(obj.eval(&xs).abs() < 1e-12);
        assert!(obj.grad(&xs).norm() < 1e-12);
        // On the ramp the gradient is exactly −1/t.
        let x = DVector::from_vec(vec![10.0]);
        assert!((obj.grad(&x)[0] + 0.1).abs() < 1e-12);
        // Start point has unit gradient norm.
        assert!((obj.grad(&obj.default_x0.clone()).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_norm_basics() {
        let obj = make_power_norm(2, 8, 1.5).unwrap();
        let x = DVector::from_vec(vec![1.0, 0.0]);
        assert!((obj.eval(&x) - 1.0).abs() < 1e-12);
        assert!((obj.grad(&x)[0] - 8.0).abs() < 1e-12);
        assert_eq!(obj.grad(&DVector::zeros(2)).norm(), 0.0);
    }

    #[test]
    fn finite_sum_gradient_matches_component_sum() {
        let fs = make_finite_sum(2, 10, 1.0, 3).unwrap();
        let mut rng = seed_rng(11);
        let x = gaussian_vector(&mut rng, 2);
        let mut g = DVector::zeros(2);
        for i in 0..fs.num_terms() {
            g += fs.component_grad(i, &x);
        }
        let rel = (&g - fs.aggregate.grad(&x)).norm() / g.norm().max(1e-300);
        assert!(rel < 1e-10);
    }

    #[test]
    fn finite_sum_zero_heterogeneity_components_identical() {
        let fs = make_finite_sum(3, 5, 0.0, 1).unwrap();
        assert_eq!(fs.variance_bound, 0.0);
        let x = DVector::from_element(3, 0.7);
        let g0 = fs.component_grad(0, &x) * fs.num_terms() as f64;
        let rel = (&g0 - fs.aggregate.grad(&x)).norm();
        assert!(rel < 1e-12);
    }

    #[test]
    fn finite_sum_single_term_degenerates() {
        let fs = make_finite_sum(2, 1, 1.0, 9).unwrap();
        let x = DVector::from_vec(vec![0.3, -0.4]);
        let rel = (fs.component_grad(0, &x) - fs.aggregate.grad(&x)).norm();
        assert!(rel < 1e-12);
    }

    #[test]
    fn finite_sum_minimizer_matches_direct_solve() {
        let fs = make_finite_sum(4, 12, 2.0, 21).unwrap();
        let obj = &fs.aggregate;
        let xs = obj.x_star.clone().unwrap();
        assert!(obj.grad(&xs).norm() < 1e-8);
        // f* is the minimum over random probes.
        let mut rng = seed_rng(2);
        for _ in 0..50 {
            let x = &xs + gaussian_vector(&mut rng, 4) * 0.5;
            assert!(obj.eval(&x) >= obj.f_star - 1e-12);
        }
    }

    #[test]
    fn all_objectives_pass_derivative_checks() {
        let objs = vec![
            make_quadratic(4, 50.0, 2).unwrap(),
            make_pseudo_huber(3).unwrap(),
            make_rosenbrock(4, -2.0, 2.0).unwrap(),
            make_log_ramp(2, 50.0).unwrap(),
            make_power_norm(3, 8, 1.5).unwrap(),
        ];
        let mut rng = seed_rng(77);
        for obj in &objs {
            for _ in 0..100 {
                let x = match &obj.domain_box {
                    Some((lo, hi)) => DVector::from_fn(obj.dim, |i, _| {
                        rng.gen_range(lo[i] * 0.9..hi[i] * 0.9)
                    }),
                    None => gaussian_vector(&mut rng, obj.dim) * 2.0,
                };
                let g = obj.grad(&x);
                let gf = fd_grad(obj, &x, 1e-6);
                let gerr = (&g - &gf).norm() / g.norm().max(1.0);
                assert!(gerr < 1e-5, "{} grad mismatch {gerr}", obj.name);
                let h = obj.hess(&x);
                assert!(
                    spectral_norm(&(h.clone() - h.transpose())) < 1e-12,
                    "{} hessian not symmetric",
                    obj.name
                );
                let hf = fd_hess(obj, &x, 1e-5);
                let herr = spectral_norm(&(h.clone() - hf)) / spectral_norm(&h).max(1.0);
                assert!(herr < 1e-4, "{} hess mismatch {herr}", obj.name);
            }
        }
    }

    #[test]
    fn strong_convexity_and_gradient_lipschitz_sampled() {
        let obj = make_quadratic(3, 20.0, 8).unwrap();
        let mut rng = seed_rng(31);
        for _ in 0..100 {
            let x = gaussian_vector(&mut rng, 3);
            let y = gaussian_vector(&mut rng, 3);
            let lhs = obj.eval(&x);
            let rhs = obj.eval(&y)
                + obj.grad(&y).dot(&(&x - &y))
                + 0.5 * obj.strong_mu * (&x - &y).norm_squared();
            assert!(lhs >= rhs - 1e-9);
            let gdiff = (obj.grad(&x) - obj.grad(&y)).norm();
            assert!(gdiff <= obj.lip_grad * (&x - &y).norm() + 1e-9);
        }
    }
}
