//! Seeded Monte Carlo experiments over (p, eps) grids.

use rayon::prelude::*;

use crate::arc::{run_arc, run_arc_fully_quadratic, ArcConfig, ArcRun};
use crate::error::{Error, Result};
use crate::harness::bounds::{ArcBoundModel, BoundModel, LsBoundModel};
use crate::harness::diagnostics::{diagnose_trace, LatticeInfo};
use crate::linesearch::{
    run_linesearch, run_ls_fully_linear, DirectionVariant, LsConfig, StopRegime, StoppingRule,
};
use crate::oracles::OracleConfig;
use crate::problems::{Convexity, Objective, Point};
use crate::rng::stream_rng;
use crate::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    LsSteepest,
    LsGeneral,
    LsFullyLinear,
    Arc,
    ArcFullyQuadratic,
}

impl Algorithm {
    pub fn is_line_search(self) -> bool {
        matches!(
            self,
            Algorithm::LsSteepest | Algorithm::LsGeneral | Algorithm::LsFullyLinear
        )
    }

    pub fn is_adaptive_radius(self) -> bool {
        matches!(self, Algorithm::LsFullyLinear | Algorithm::ArcFullyQuadratic)
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ls_steepest" => Ok(Self::LsSteepest),
            "ls_general" => Ok(Self::LsGeneral),
            "ls_fully_linear" => Ok(Self::LsFullyLinear),
            "arc" => Ok(Self::Arc),
            "arc_fully_quadratic" => Ok(Self::ArcFullyQuadratic),
            other => Err(Error::Config(format!("unknown algorithm: {other}"))),
        }
    }
}

/// One Monte Carlo experiment: a problem, an algorithm, oracle settings, the
/// (p, eps) grid, and the replication plan.
#[derive(Clone)]
pub struct ExperimentSpec {
    pub objective: Objective,
    pub x0: Point,
    pub algorithm: Algorithm,
    pub ls_cfg: Option<LsConfig>,
    pub arc_cfg: Option<ArcConfig>,
    pub oracle: OracleConfig,
    pub stop_regime: StopRegime,
    pub p_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub replications: usize,
    pub master_seed: u64,
    /// Run the per-realization process diagnostics on every trace (skipped
    /// for the adaptive-radius variants, whose early large-radius iterations
    /// are outside the fixed-accuracy process).
    pub check_lemmas: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("mc.replications must be >= 1".into()));
        }
        if self.p_grid.is_empty() || self.eps_grid.is_empty() {
            return Err(Error::Config("empty p or eps grid".into()));
        }
        for &p in &self.p_grid {
            if !(p > 0.5 && p <= 1.0) {
                return Err(Error::Config(format!(
                    "grid.p entries must lie in (0.5, 1], got {p}"
                )));
            }
        }
        for &e in &self.eps_grid {
            if !(e > 0.0) {
                return Err(Error::Config(format!("grid.eps entries must be positive, got {e}")));
            }
        }
        if self.algorithm.is_line_search() {
            let cfg = self
                .ls_cfg
                .as_ref()
                .ok_or_else(|| Error::Config("line-search algorithm needs algo.* step settings".into()))?;
            cfg.validate()?;
        } else {
            let cfg = self
                .arc_cfg
                .as_ref()
                .ok_or_else(|| Error::Config("cubic-regularization algorithm needs algo.* sigma settings".into()))?;
            cfg.validate()?;
            if self.stop_regime != StopRegime::GradNorm {
                return Err(Error::Config(
                    "cubic regularization only supports the gradient-norm stop".into(),
                ));
            }
        }
        self.oracle.validate()?;
        if let BoundModel::Ls(m) = self.bound_model()? {
            m.validate()?;
        }
        Ok(())
    }

    /// Analysis regime implied by the stopping rule and the problem class.
    pub fn regime(&self) -> Result<Convexity> {
        match self.stop_regime {
            StopRegime::GradNorm => Ok(Convexity::Nonconvex),
            StopRegime::Gap => match self.objective.convexity {
                Convexity::Nonconvex => Err(Error::Config(
                    "gap-based stopping needs a convex or strongly convex problem".into(),
                )),
                c => Ok(c),
            },
        }
    }

    pub fn bound_model(&self) -> Result<BoundModel> {
        let f0_gap = self.objective.eval(&self.x0) - self.objective.f_star;
        if self.algorithm.is_line_search() {
            let cfg = self.ls_cfg.as_ref().unwrap();
            let regime = self.regime()?;
            let (beta, kappa_2) = match &cfg.direction {
                DirectionVariant::Steepest => (1.0, 1.0),
                DirectionVariant::General(gd) => (gd.beta, gd.kappa_2),
            };
            let level_diameter = match regime {
                Convexity::Convex => self.objective.level_diameter(&self.x0).ok_or_else(|| {
                    Error::Config("convex analysis needs a level-set diameter bound".into())
                })?,
                _ => 0.0,
            };
            Ok(BoundModel::Ls(LsBoundModel {
                regime,
                theta: cfg.theta,
                kappa: self.oracle.kappa,
                alpha_max: cfg.alpha_max,
                alpha0: cfg.alpha0,
                gamma: cfg.gamma,
                lip_grad: self.objective.lip_grad,
                mu: self.objective.strong_mu,
                level_diameter,
                beta,
                kappa_2,
                f0_gap,
            }))
        } else {
            let cfg = self.arc_cfg.as_ref().unwrap();
            let lip_hess = self.objective.lip_hess.ok_or_else(|| {
                Error::Config("cubic-regularization analysis needs a Hessian Lipschitz constant".into())
            })?;
            Ok(BoundModel::Arc(ArcBoundModel {
                theta: cfg.theta,
                kappa_theta: cfg.kappa_theta,
                sigma_min: cfg.sigma_min,
                sigma0: cfg.snapped_sigma0(),
                gamma: cfg.gamma,
                kappa_g: self.oracle.kappa_g,
                kappa_h: self.oracle.kappa_h,
                lip_grad: self.objective.lip_grad,
                lip_hess,
                f0_gap,
            }))
        }
    }

    pub fn lattice(&self) -> LatticeInfo {
        if self.algorithm.is_line_search() {
            let cfg = self.ls_cfg.as_ref().unwrap();
            LatticeInfo {
                base: cfg.alpha0,
                j0: 0,
                gamma: cfg.gamma,
            }
        } else {
            let cfg = self.arc_cfg.as_ref().unwrap();
            LatticeInfo {
                base: 1.0 / cfg.sigma_min,
                j0: cfg.initial_exp(),
                gamma: cfg.gamma,
            }
        }
    }

    /// Runs one seeded realization of the experiment at (p, eps).
    pub fn run_realization(&self, p: f64, eps: f64, cell: u64, rep: u64) -> Result<RunResult> {
        let mut rng = stream_rng(self.master_seed, cell, rep);
        let mut oracle = self.oracle.clone();
        oracle.p = p;
        let stop = StoppingRule {
            eps,
            regime: self.stop_regime,
        };
        match self.algorithm {
            Algorithm::LsSteepest | Algorithm::LsGeneral => {
                let cfg = self.ls_cfg.as_ref().unwrap();
                run_linesearch(&self.objective, &oracle, cfg, &stop, &self.x0, &mut rng)
                    .map(RunResult::Ls)
            }
            Algorithm::LsFullyLinear => {
                let cfg = self.ls_cfg.as_ref().unwrap();
                run_ls_fully_linear(&self.objective, p, cfg, &stop, &self.x0, &mut rng)
                    .map(RunResult::Ls)
            }
            Algorithm::Arc => {
                let cfg = self.arc_cfg.as_ref().unwrap();
                run_arc(&self.objective, &oracle, cfg, eps, &self.x0, &mut rng).map(RunResult::Arc)
            }
            Algorithm::ArcFullyQuadratic => {
                let cfg = self.arc_cfg.as_ref().unwrap();
                run_arc_fully_quadratic(&self.objective, &oracle, cfg, eps, &self.x0, &mut rng)
                    .map(RunResult::Arc)
            }
        }
    }
}

pub enum RunResult {
    Ls(Trace),
    Arc(ArcRun),
}

impl RunResult {
    pub fn trace(&self) -> &Trace {
        match self {
            RunResult::Ls(t) => t,
            RunResult::Arc(r) => &r.trace,
        }
    }
}

/// Aggregated hitting-time statistics of one (p, eps) cell.
#[derive(Debug, Clone)]
pub struct CellStats {
    pub p: f64,
    pub eps: f64,
    pub replications: usize,
    /// Mean over hitting replications; absent if none hit.
    pub mean: Option<f64>,
    pub std: Option<f64>,
    /// 95% normal-approximation half-width; absent with fewer than 2 hits.
    pub ci_half: Option<f64>,
    pub bound: f64,
    pub nonhits: usize,
}

impl CellStats {
    pub fn ci_upper(&self) -> Option<f64> {
        Some(self.mean? + self.ci_half.unwrap_or(0.0))
    }
}

/// Runs the full grid. Replications run in parallel; results are keyed by
/// replication index, so aggregation order is deterministic.
pub fn run_monte_carlo(spec: &ExperimentSpec) -> Result<Vec<CellStats>> {
    spec.validate()?;
    let model = spec.bound_model()?;
    let lat = spec.lattice();
    let check = spec.check_lemmas && !spec.algorithm.is_adaptive_radius();
    let mut out = Vec::new();
    let mut cell = 0u64;
    for &p in &spec.p_grid {
        for &eps in &spec.eps_grid {
            let hits: Vec<Option<usize>> = (0..spec.replications)
                .into_par_iter()
                .map(|rep| -> Result<Option<usize>> {
                    let run = spec.run_realization(p, eps, cell, rep as u64)?;
                    if check {
                        let d = diagnose_trace(
                            run.trace(),
                            &lat,
                            model.c(),
                            model.gain_cap(eps),
                            &|a| model.h(eps, a),
                        )?;
                        if !d.is_clean() {
                            return Err(Error::RunAborted(format!(
                                "process diagnostics failed at p={p} eps={eps} replication {rep}: {}",
                                d.violations.join("; ")
                            )));
                        }
                    }
                    Ok(run.trace().hit)
                })
                .collect::<Result<Vec<_>>>()?;
            let ns: Vec<f64> = hits.iter().flatten().map(|&n| n as f64).collect();
            let nonhits = spec.replications - ns.len();
            let (mean, std, ci_half) = if ns.is_empty() {
                (None, None, None)
            } else {
                let m = ns.iter().sum::<f64>() / ns.len() as f64;
                if ns.len() < 2 {
                    (Some(m), None, None)
                } else {
                    let var =
                        ns.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (ns.len() - 1) as f64;
                    let sd = var.sqrt();
                    (Some(m), Some(sd), Some(1.96 * sd / (ns.len() as f64).sqrt()))
                }
            };
            out.push(CellStats {
                p,
                eps,
                replications: spec.replications,
                mean,
                std,
                ci_half,
                bound: model.bound(p, eps)?,
                nonhits,
            });
            cell += 1;
        }
    }
    Ok(out)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.17e}")).unwrap_or_default()
}

/// Summary CSV with the fixed column set.
pub fn summary_csv(stats: &[CellStats]) -> String {
    let mut out = String::from("p,eps,replications,mean_N,std_N,ci_half,bound,nonhits\n");
    for s in stats {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.17e},{}\n",
            s.p,
            s.eps,
            s.replications,
            fmt_opt(s.mean),
            fmt_opt(s.std),
            fmt_opt(s.ci_half),
            s.bound,
            s.nonhits
        ));
    }
    out
}
