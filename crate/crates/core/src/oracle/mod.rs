//! Empirical validation: run the algorithms on concrete member functions,
//! measure contraction ratios and audit the scenario constraints on the
//! generated data.

mod audit;
mod function;
mod run;

use thiserror::Error;

use crate::polyform::PolyError;
use crate::scenarios::{AlgorithmKind, ScenarioError};

pub use audit::{
    check_against_bound, constraint_audit, metric_value, trace_csv, AuditReport, BoundReport, ConstraintValue,
    ExcludedStep, StepAudit,
};
pub use function::{two_eigenvalue_quadratic, Optimum, TestFunction};
pub use run::{default_initial_step, run, zigzag_start, NoiseModel, ProxSearch, RunOptions, RunTrace};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid test function: {0}")]
    InvalidFunction(String),
    #[error("invalid run: {0}")]
    InvalidRun(String),
    #[error("{kind} line search failed at step {step}: {detail}")]
    LineSearch {
        kind: AlgorithmKind,
        step: usize,
        detail: String,
    },
    #[error("this noise model needs square roots; use floating point or the shrink model")]
    NeedsSquareRoot,
    #[error("trace was generated by {trace} but the problem describes {problem}")]
    Mismatch { trace: String, problem: String },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}
