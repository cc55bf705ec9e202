//! Monte Carlo experiment harness: regime constants and hitting-time bounds,
//! per-realization process diagnostics, seeded grid sweeps, scaling-exponent
//! fits, configuration parsing, and the verification suites.

pub mod bounds;
pub mod config;
pub mod diagnostics;
pub mod fit;
pub mod montecarlo;
pub mod suite;

pub use bounds::{ArcBoundModel, BoundModel, LsBoundModel};
pub use config::{parse_config, HarnessConfig};
pub use diagnostics::{diagnose_trace, LatticeInfo, ProcessDiagnostics};
pub use fit::{fit_scaling_exponent, FitModel, FitResult};
pub use montecarlo::{run_monte_carlo, summary_csv, Algorithm, CellStats, ExperimentSpec};
pub use suite::{run_lemma_suite, run_subproblem_suite, SuiteReport};
