//! Scalar subproblem solvers.
//!
//! Two interchangeable backends sit behind the [`SolverBackend`] trait:
//!
//! * `lp` — an exact two-phase simplex over the epigraph form, available
//!   whenever the objective and every constraint admit a piecewise-linear
//!   representation;
//! * `penalty-subgradient` — a projected subgradient method on an exact
//!   penalty function, followed by a polishing phase, available for every
//!   subproblem.
//!
//! [`solve`] dispatches on [`SolverConfig::backend`]; the `Auto` choice
//! picks the simplex when the subproblem is piecewise linear and the
//! penalty method otherwise, so the two routes stay independent and can be
//! cross-checked against each other.

mod penalty;
mod simplex;

pub(crate) use simplex::{solve_linear_program, LpOutcome, LpRow, RowRel};

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::scalarize::ScalarSubproblem;
use crate::{Error, Result};

/// How a backend finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    /// The backend's own stopping rule was met.
    Optimal,
    /// The iteration budget ran out first; the best point seen is returned.
    IterationBudgetReached,
    /// No point satisfying the constraints within tolerance was found.
    InfeasibleDetected,
}

/// Outcome of a scalar solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    /// The returned point (always inside the box).
    pub x: Vec<f64>,
    /// Objective value at `x`.
    pub value: f64,
    /// Largest constraint violation at `x` (0 when feasible).
    pub max_violation: f64,
    /// Iterations (simplex pivots or subgradient steps) spent.
    pub iterations: u64,
    pub status: SolveStatus,
}

/// Backend selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendChoice {
    /// Simplex when the subproblem is piecewise linear, penalty otherwise.
    #[default]
    Auto,
    Lp,
    PenaltySubgradient,
}

impl FromStr for BackendChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(BackendChoice::Auto),
            "lp" => Ok(BackendChoice::Lp),
            "penalty-subgradient" => Ok(BackendChoice::PenaltySubgradient),
            other => Err(Error::UnknownBackend(other.to_string())),
        }
    }
}

impl fmt::Display for BackendChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            BackendChoice::Auto => "auto",
            BackendChoice::Lp => "lp",
            BackendChoice::PenaltySubgradient => "penalty-subgradient",
        };
        f.write_str(name)
    }
}

/// Tunables shared by the backends. The defaults are the values used by
/// every experiment in this crate; tests pin them.
#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    /// A point counts as feasible when no constraint exceeds this.
    pub feas_tol: f64,
    /// Total iteration budget per scalar solve.
    pub max_iters: u64,
    /// Subgradient step scale: step_t = diameter * a / (b + t).
    pub step_a: f64,
    pub step_b: f64,
    /// Initial penalty weight.
    pub penalty_init: f64,
    /// Multiplicative penalty growth factor.
    pub penalty_growth: f64,
    /// Penalty weight ceiling.
    pub penalty_cap: f64,
    pub backend: BackendChoice,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            feas_tol: 1e-8,
            max_iters: 200_000,
            step_a: 100.0,
            step_b: 100.0,
            penalty_init: 10.0,
            penalty_growth: 2.0,
            penalty_cap: 1e10,
            backend: BackendChoice::Auto,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.feas_tol > 0.0 && self.feas_tol.is_finite()) {
            return Err(Error::InvalidConfig("feas_tol must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.step_a > 0.0 && self.step_b > 0.0) {
            return Err(Error::InvalidConfig("step scales must be positive".into()));
        }
        if !(self.penalty_init > 0.0 && self.penalty_growth > 1.0) {
            return Err(Error::InvalidConfig(
                "penalty_init must be positive and penalty_growth above 1".into(),
            ));
        }
        if self.penalty_cap < self.penalty_init {
            return Err(Error::InvalidConfig(
                "penalty_cap must be at least penalty_init".into(),
            ));
        }
        Ok(())
    }
}

/// A strategy for solving one scalar subproblem.
pub trait SolverBackend: Send + Sync {
    /// Registry name, also accepted on the command line.
    fn name(&self) -> &'static str;
    /// Whether this backend can handle the given subproblem.
    fn supports(&self, sub: &ScalarSubproblem) -> bool;
    /// Solves the subproblem, optionally warm-started at a point in the box.
    fn solve(
        &self,
        sub: &ScalarSubproblem,
        cfg: &SolverConfig,
        warm: Option<&[f64]>,
    ) -> Result<SolveResult>;
}

static LP_BACKEND: simplex::LpBackend = simplex::LpBackend;
static PENALTY_BACKEND: penalty::PenaltyBackend = penalty::PenaltyBackend;
static REGISTRY: [&dyn SolverBackend; 2] = [&LP_BACKEND, &PENALTY_BACKEND];

/// All registered backends, in registry order.
pub fn backends() -> &'static [&'static dyn SolverBackend] {
    &REGISTRY
}

/// Looks a backend up by its registry name.
pub fn backend_named(name: &str) -> Result<&'static dyn SolverBackend> {
    backends()
        .iter()
        .copied()
        .find(|b| b.name() == name)
        .ok_or_else(|| Error::UnknownBackend(name.to_string()))
}

/// Solves a scalar subproblem with the backend selected by the config.
pub fn solve(
    sub: &ScalarSubproblem,
    cfg: &SolverConfig,
    warm: Option<&[f64]>,
) -> Result<SolveResult> {
    cfg.validate()?;
    if let Some(w) = warm {
        if w.len() != sub.dim() {
            return Err(Error::DimensionMismatch {
                expected: sub.dim(),
                got: w.len(),
            });
        }
        if !sub.bounds.contains(w) {
            return Err(Error::WarmStartOutsideBox);
        }
    }
    let backend: &dyn SolverBackend = match cfg.backend {
        BackendChoice::Lp => &LP_BACKEND,
        BackendChoice::PenaltySubgradient => &PENALTY_BACKEND,
        BackendChoice::Auto => {
            if LP_BACKEND.supports(sub) {
                &LP_BACKEND
            } else {
                &PENALTY_BACKEND
            }
        }
    };
    if !backend.supports(sub) {
        return Err(Error::BackendUnsupported {
            backend: backend.name().into(),
            reason: "subproblem has no piecewise-linear form".into(),
        });
    }
    backend.solve(sub, cfg, warm)
}
