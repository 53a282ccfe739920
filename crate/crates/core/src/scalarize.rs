//! Scalar subproblem builders.
//!
//! Three reductions of a vector problem to a single convex objective:
//!
//! * [`charnes_cooper`] — the anchored sum `min Σ f_i(x)` subject to the
//!   dominance cuts `f_i(x) <= f_i(x0)` and the original constraints. A
//!   feasible anchor is optimal for its own subproblem exactly when it is a
//!   Pareto minimizer, which is the engine behind both [`crate::cc1`] and
//!   the certification checks.
//! * [`proximal_charnes_cooper`] — the same with a proximal term
//!   `(m/2)·‖x − x0‖²` added to the sum, which strictly convexifies the
//!   objective; the dominance cuts can optionally be dropped.
//! * [`weighted_sum`] — `min Σ τ_i f_i(x)` over the original feasible set;
//!   with τ ≥ 0, τ ≠ 0 its solutions are weak Pareto minimizers, and every
//!   weak Pareto minimizer arises this way for some such τ.

use serde::Serialize;

use crate::expr::ConvexExpr;
use crate::problem::{BoxBounds, VectorProblem, ANCHOR_FEAS_TOL};
use crate::{Error, Result};

/// Which scalarization produced a subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    CharnesCooper,
    Proximal,
    WeightedSum,
}

/// A scalar convex program: minimize `objective` over the box intersected
/// with `{x : constraints_j(x) <= 0}`.
#[derive(Debug, Clone)]
pub struct ScalarSubproblem {
    pub objective: ConvexExpr,
    pub constraints: Vec<ConvexExpr>,
    pub bounds: BoxBounds,
    pub provenance: Provenance,
    /// The anchor point for anchored scalarizations, `None` for weighted sums.
    pub anchor: Option<Vec<f64>>,
}

impl ScalarSubproblem {
    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    /// Largest constraint violation at `x` (box distance included, clamped
    /// below at zero).
    pub fn max_violation(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut worst = 0.0f64;
        for g in &self.constraints {
            worst = worst.max(g.eval_unchecked(x));
        }
        for (v, (l, h)) in x.iter().zip(self.bounds.lo().iter().zip(self.bounds.hi())) {
            worst = worst.max(l - v).max(v - h);
        }
        Ok(worst.max(0.0))
    }
}

/// The anchored sum subproblem `P(f, X, x0)`.
///
/// Requires `x0` feasible (within [`ANCHOR_FEAS_TOL`]); the anchor then
/// remains feasible for the subproblem, with every dominance cut tight.
pub fn charnes_cooper(problem: &VectorProblem, x0: &[f64]) -> Result<ScalarSubproblem> {
    let mut constraints = problem.constraints().to_vec();
    constraints.extend(problem.dominance_constraints(x0)?);
    Ok(ScalarSubproblem {
        objective: ConvexExpr::sum_of(problem.objectives().to_vec())?,
        constraints,
        bounds: problem.bounds().clone(),
        provenance: Provenance::CharnesCooper,
        anchor: Some(x0.to_vec()),
    })
}

/// The proximal variant: objective `Σ f_i(x) + (m/2)·‖x − x0‖²`.
///
/// With `with_dominance` (the default choice in [`crate::cc1`]) the
/// dominance cuts are kept, which preserves componentwise monotonicity of
/// anchored descent; without it the constraint set is just `X`.
pub fn proximal_charnes_cooper(
    problem: &VectorProblem,
    x0: &[f64],
    with_dominance: bool,
) -> Result<ScalarSubproblem> {
    let violation = problem.max_violation(x0)?;
    if violation > ANCHOR_FEAS_TOL {
        return Err(Error::InfeasibleAnchor { violation });
    }
    let n = problem.dim();
    let m = problem.num_objectives() as f64;
    // (m/2)·‖x − x0‖² = x'(m/2 I)x − m·x0'x + (m/2)·‖x0‖².
    let mut q = vec![vec![0.0; n]; n];
    for (i, row) in q.iter_mut().enumerate() {
        row[i] = 0.5 * m;
    }
    let linear: Vec<f64> = x0.iter().map(|v| -m * v).collect();
    let offset = 0.5 * m * x0.iter().map(|v| v * v).sum::<f64>();
    let prox = ConvexExpr::quadratic(q, linear, offset)?;

    let mut terms = problem.objectives().to_vec();
    terms.push(prox);
    let constraints = if with_dominance {
        let mut cs = problem.constraints().to_vec();
        cs.extend(problem.dominance_constraints(x0)?);
        cs
    } else {
        problem.constraints().to_vec()
    };
    Ok(ScalarSubproblem {
        objective: ConvexExpr::sum_of(terms)?,
        constraints,
        bounds: problem.bounds().clone(),
        provenance: Provenance::Proximal,
        anchor: Some(x0.to_vec()),
    })
}

/// The weighted-sum subproblem `min Σ τ_i f_i(x)` over the original
/// feasible set. Weights must be nonnegative with at least one positive.
pub fn weighted_sum(problem: &VectorProblem, tau: &[f64]) -> Result<ScalarSubproblem> {
    if tau.len() != problem.num_objectives() {
        return Err(Error::DimensionMismatch {
            expected: problem.num_objectives(),
            got: tau.len(),
        });
    }
    if tau.iter().any(|t| !t.is_finite() || *t < 0.0) || tau.iter().all(|t| *t == 0.0) {
        return Err(Error::InvalidWeights);
    }
    let terms: Vec<ConvexExpr> = problem
        .objectives()
        .iter()
        .zip(tau)
        .map(|(f, t)| ConvexExpr::scaled(*t, f.clone()))
        .collect::<Result<_>>()?;
    Ok(ScalarSubproblem {
        objective: ConvexExpr::sum_of(terms)?,
        constraints: problem.constraints().to_vec(),
        bounds: problem.bounds().clone(),
        provenance: Provenance::WeightedSum,
        anchor: None,
    })
}
