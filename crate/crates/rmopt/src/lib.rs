//! Optimization methods driven by probabilistically accurate random models.
//!
//! The crate implements two adaptive step-size schemes — an Armijo-type line
//! search and cubic regularization (ARC) — in which the gradient (and Hessian)
//! models are drawn from a seeded random oracle that is accurate only with
//! probability `p` on each iteration. A Monte Carlo harness measures the
//! hitting time `N_eps` of an accuracy event (small gradient, or small
//! optimality gap) over seeded replications and compares it against the
//! theoretical expected-hitting-time bounds, including exact per-realization
//! counting diagnostics on every trace.

pub mod arc;
pub mod cubic;
pub mod error;
pub mod harness;
pub mod linesearch;
pub mod oracles;
pub mod problems;
pub mod rng;
pub mod trace;

pub use error::Error;
