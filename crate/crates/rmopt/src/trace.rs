//! Per-iteration records emitted by the runners.

use crate::problems::Point;

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub k: usize,
    /// Step parameter: alpha_k for line search, 1/sigma_k for ARC.
    pub alpha: f64,
    /// Lattice exponent j such that alpha = alpha_0 * gamma^j (line search)
    /// or sigma = sigma_min * gamma^{-j} (ARC). Kept as an integer so the
    /// process diagnostics can classify iterations exactly.
    pub alpha_exp: i64,
    pub sigma: Option<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub step_norm: f64,
    /// Post-hoc accuracy indicator I_k.
    pub is_true: bool,
    /// Theta_k.
    pub is_successful: bool,
    /// Radius-shrink iteration of the adaptive-radius variants (x and the
    /// step parameter unchanged).
    pub is_shrink: bool,
    pub xi: Option<f64>,
    pub rho: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub records: Vec<IterationRecord>,
    /// Hitting index N_eps; absent if the iteration cap was reached first.
    pub hit: Option<usize>,
    pub final_x: Point,
    pub final_f: f64,
}

impl Trace {
    /// Records that belong to the pre-hitting process (k < N_eps).
    pub fn pre_hit_records(&self) -> &[IterationRecord] {
        match self.hit {
            Some(n) => {
                let cut = self.records.iter().position(|r| r.k >= n);
                match cut {
                    Some(i) => &self.records[..i],
                    None => &self.records,
                }
            }
            None => &self.records,
        }
    }

    fn fmt_opt(v: Option<f64>) -> String {
        v.map(|x| format!("{x:.17e}")).unwrap_or_default()
    }

    /// CSV with the exact column set of the trace schema.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("k,alpha_or_inv_sigma,sigma,f,grad_norm,step_norm,is_true,is_successful,xi,rho\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{:.17e},{},{:.17e},{:.17e},{:.17e},{},{},{},{}\n",
                r.k,
                r.alpha,
                Self::fmt_opt(r.sigma),
                r.f,
                r.grad_norm,
                r.step_norm,
                u8::from(r.is_true),
                u8::from(r.is_successful),
                Self::fmt_opt(r.xi),
                Self::fmt_opt(r.rho),
            ));
        }
        out
    }
}
