//! Flat key=value experiment configuration files.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::arc::ArcConfig;
use crate::error::{Error, Result};
use crate::harness::montecarlo::{Algorithm, ExperimentSpec};
use crate::linesearch::{make_general_direction, DirectionVariant, LsConfig, StopRegime};
use crate::oracles::OracleConfig;
use crate::problems::{
    make_finite_sum, make_log_ramp, make_power_norm, make_pseudo_huber, make_quadratic,
    make_rosenbrock, Objective,
};

/// Parsed configuration: the Monte Carlo spec plus the single-run settings.
#[derive(Clone)]
pub struct HarnessConfig {
    pub spec: ExperimentSpec,
    /// eps used by the `run` subcommand (stop.eps).
    pub run_eps: f64,
    /// p used by the `run` subcommand (oracle.p).
    pub run_p: f64,
}

/// Key store that tracks consumption so leftovers can be reported as unknown.
struct KeyMap(BTreeMap<String, String>);

impl KeyMap {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got {line:?}", lineno + 1))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if map.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!("duplicate key {key}")));
            }
        }
        Ok(Self(map))
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    fn take_f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("{key}: not a number: {v}"))),
        }
    }

    fn take_usize(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("{key}: not an integer: {v}"))),
        }
    }

    fn take_u64(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("{key}: not an integer: {v}"))),
        }
    }

    fn take_bool(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take(key).as_deref() {
            None => Ok(default),
            Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(v) => Err(Error::Config(format!("{key}: not a boolean: {v}"))),
        }
    }

    fn take_f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("{key}: not a number: {t}")))
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some(key) = self.0.keys().next() {
            return Err(Error::Config(format!("unknown key {key}")));
        }
        Ok(())
    }
}

fn build_objective(m: &mut KeyMap) -> Result<Objective> {
    let name = m
        .take("problem.name")
        .ok_or_else(|| Error::Config("missing problem.name".into()))?;
    match name.as_str() {
        "quadratic" => {
            let dim = m.take_usize("problem.dim", 2)?;
            let cond = m.take_f64("problem.cond", 100.0)?;
            let seed = m.take_u64("problem.seed", 7)?;
            make_quadratic(dim, cond, seed)
        }
        "pseudo_huber" => {
            let dim = m.take_usize("problem.dim", 2)?;
            make_pseudo_huber(dim)
        }
        "rosenbrock" => {
            let dim = m.take_usize("problem.dim", 2)?;
            let lo = m.take_f64("problem.box_lo", -2.0)?;
            let hi = m.take_f64("problem.box_hi", 2.0)?;
            make_rosenbrock(dim, lo, hi)
        }
        "log_ramp" => {
            let dim = m.take_usize("problem.dim", 2)?;
            let u = m.take_f64("problem.ramp_length", 1e4)?;
            make_log_ramp(dim, u)
        }
        "power_norm" => {
            let dim = m.take_usize("problem.dim", 2)?;
            let q = m.take_usize("problem.q", 8)? as u32;
            let r = m.take_f64("problem.radius", 1.0)?;
            make_power_norm(dim, q, r)
        }
        "finite_sum" => {
            let dim = m.take_usize("problem.dim", 2)?;
            let terms = m.take_usize("problem.terms", 100)?;
            let het = m.take_f64("problem.heterogeneity", 1.0)?;
            let seed = m.take_u64("problem.seed", 7)?;
            Ok(make_finite_sum(dim, terms, het, seed)?.aggregate)
        }
        other => Err(Error::Config(format!("unknown problem.name: {other}"))),
    }
}

/// Parses a flat key=value configuration into an experiment description.
/// Unknown or misplaced keys are errors.
pub fn parse_config(text: &str) -> Result<HarnessConfig> {
    let mut m = KeyMap::parse(text)?;

    let objective = build_objective(&mut m)?;
    let x0 = match m.take_f64_list("problem.x0")? {
        None => objective.default_x0.clone(),
        Some(v) => {
            if v.len() != objective.dim {
                return Err(Error::Config(format!(
                    "problem.x0 has {} entries, problem has dimension {}",
                    v.len(),
                    objective.dim
                )));
            }
            DVector::from_vec(v)
        }
    };

    let algo_name = m
        .take("algo.name")
        .ok_or_else(|| Error::Config("missing algo.name".into()))?;
    let algorithm: Algorithm = algo_name.parse()?;

    let gamma = m.take_f64("algo.gamma", 0.5)?;
    let theta = m.take_f64("algo.theta", 0.5)?;
    let max_iters = m.take_usize("algo.max_iters", 1_000_000)?;
    let kappa_delta = m.take_f64("algo.kappa_delta", 2.0)?;
    let xi0 = m.take_f64("algo.xi0", 1.0)?;

    let (ls_cfg, arc_cfg) = if algorithm.is_line_search() {
        let direction = match m.take_f64_list("algo.direction_diag")? {
            None => {
                if algorithm == Algorithm::LsGeneral {
                    return Err(Error::Config(
                        "ls_general needs algo.direction_diag".into(),
                    ));
                }
                DirectionVariant::Steepest
            }
            Some(diag) => {
                if algorithm != Algorithm::LsGeneral {
                    return Err(Error::Config(
                        "algo.direction_diag only applies to ls_general".into(),
                    ));
                }
                if diag.len() != objective.dim {
                    return Err(Error::Config(
                        "algo.direction_diag length must match problem.dim".into(),
                    ));
                }
                DirectionVariant::General(make_general_direction(DMatrix::from_diagonal(
                    &DVector::from_vec(diag),
                ))?)
            }
        };
        let cfg = LsConfig {
            gamma,
            theta,
            alpha_max: m.take_f64("algo.alpha_max", 1.0)?,
            alpha0: m.take_f64("algo.alpha0", 0.5)?,
            max_iters,
            direction,
            redraw_on_failure: m.take_bool("algo.redraw_on_failure", true)?,
            kappa_delta,
            xi0,
        };
        (Some(cfg), None)
    } else {
        let cfg = ArcConfig {
            gamma,
            theta,
            sigma_min: m.take_f64("algo.sigma_min", 1.0)?,
            sigma0: m.take_f64("algo.sigma0", 8.0)?,
            kappa_theta: m.take_f64("algo.kappa_theta", 0.5)?,
            max_iters,
            kappa_delta,
            xi0,
        };
        (None, Some(cfg))
    };

    let mut oracle = OracleConfig::default();
    oracle.p = m.take_f64("oracle.p", oracle.p)?;
    if let Some(c) = m.take("oracle.corruption") {
        oracle.corruption = c.parse()?;
    }
    oracle.kappa = m.take_f64("oracle.kappa", oracle.kappa)?;
    oracle.kappa_g = m.take_f64("oracle.kappa_g", oracle.kappa_g)?;
    oracle.kappa_h = m.take_f64("oracle.kappa_h", oracle.kappa_h)?;
    oracle.eta = m.take_f64("oracle.eta", oracle.eta)?;

    let stop_regime = match m.take("stop.regime").as_deref() {
        None | Some("grad") => StopRegime::GradNorm,
        Some("gap") => StopRegime::Gap,
        Some(v) => return Err(Error::Config(format!("stop.regime must be grad or gap, got {v}"))),
    };
    let run_eps = m.take_f64("stop.eps", 1e-3)?;

    let p_grid = m.take_f64_list("grid.p")?.unwrap_or_else(|| vec![oracle.p]);
    let eps_grid = m.take_f64_list("grid.eps")?.unwrap_or_else(|| vec![run_eps]);
    let replications = m.take_usize("mc.replications", 200)?;
    let master_seed = m.take_u64("mc.master_seed", 0)?;
    let check_lemmas = m.take_bool("mc.check_lemmas", true)?;

    m.finish()?;

    let run_p = oracle.p;
    let spec = ExperimentSpec {
        objective,
        x0,
        algorithm,
        ls_cfg,
        arc_cfg,
        oracle,
        stop_regime,
        p_grid,
        eps_grid,
        replications,
        master_seed,
        check_lemmas,
    };
    Ok(HarnessConfig { spec, run_eps, run_p })
}
