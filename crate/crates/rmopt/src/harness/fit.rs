//! Least-squares fits of hitting-time means against the accuracy grid.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// mean = c * (1/eps)^slope, fitted as log(mean) vs log(1/eps).
    Power,
    /// mean = a + slope * log(1/eps).
    Log,
}

#[derive(Debug, Clone, Copy)]
pub struct FitResult {
    pub slope: f64,
    pub r_squared: f64,
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> FitResult {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    FitResult { slope, r_squared }
}

/// Fits the accuracy-scaling exponent of mean hitting times.
pub fn fit_scaling_exponent(eps_grid: &[f64], means: &[f64], model: FitModel) -> Result<FitResult> {
    if eps_grid.len() < 3 || eps_grid.len() != means.len() {
        return Err(Error::InvalidArgument(
            "scaling fit needs at least 3 matching grid points".into(),
        ));
    }
    if means.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::InvalidArgument(
            "scaling fit needs positive means".into(),
        ));
    }
    let xs: Vec<f64> = eps_grid.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = match model {
        FitModel::Power => means.iter().map(|m| m.ln()).collect(),
        FitModel::Log => means.to_vec(),
    };
    Ok(linear_fit(&xs, &ys))
}
