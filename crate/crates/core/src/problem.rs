//! Vector optimization problems over boxed feasible sets.
//!
//! A [`VectorProblem`] minimizes `m >= 2` convex objectives under the
//! componentwise order, over `X = {x in box : g_j(x) <= 0 for all j}`.

use serde::Serialize;

use crate::expr::ConvexExpr;
use crate::{Error, Result};

/// Feasibility tolerance used when a feasible anchor is required
/// (matches the solver's default `feas_tol`).
pub const ANCHOR_FEAS_TOL: f64 = 1e-8;

/// Closed axis-aligned bounds `lo[i] <= x[i] <= hi[i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxBounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxBounds {
    /// Builds bounds, requiring finite values with `lo[i] <= hi[i]`.
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidBox);
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !l.is_finite() || !h.is_finite() || l > h {
                return Err(Error::InvalidBox);
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// True when `x` lies within the bounds (exact comparison).
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    /// Componentwise clamp of `x` into the bounds.
    pub fn project(&self, x: &mut [f64]) {
        for (v, (l, h)) in x.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            *v = v.clamp(*l, *h);
        }
    }

    /// Euclidean length of the box diagonal; scales solver step sizes.
    pub fn diagonal(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l) * (h - l))
            .sum::<f64>()
            .sqrt()
    }

    /// Midpoint of the box; the deterministic default start.
    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h))
            .collect()
    }
}

/// A convex vector optimization problem: minimize all objectives at once
/// over the boxed, constraint-cut feasible set.
#[derive(Debug, Clone)]
pub struct VectorProblem {
    objectives: Vec<ConvexExpr>,
    constraints: Vec<ConvexExpr>,
    bounds: BoxBounds,
}

impl VectorProblem {
    /// Builds a problem from `m >= 2` objectives, `k >= 0` constraints
    /// (`g_j(x) <= 0`), and box bounds, all over one decision dimension.
    pub fn new(
        objectives: Vec<ConvexExpr>,
        constraints: Vec<ConvexExpr>,
        bounds: BoxBounds,
    ) -> Result<Self> {
        if objectives.len() < 2 {
            return Err(Error::TooFewObjectives);
        }
        let n = bounds.dim();
        for e in objectives.iter().chain(&constraints) {
            if e.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: e.dim(),
                });
            }
        }
        Ok(Self {
            objectives,
            constraints,
            bounds,
        })
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    /// Number of objectives `m`.
    pub fn num_objectives(&self) -> usize {
        self.objectives.len()
    }

    pub fn objectives(&self) -> &[ConvexExpr] {
        &self.objectives
    }

    pub fn constraints(&self) -> &[ConvexExpr] {
        &self.constraints
    }

    pub fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    /// Evaluates all objectives at `x`.
    pub fn objective_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(self
            .objectives
            .iter()
            .map(|f| f.eval_unchecked(x))
            .collect())
    }

    /// Largest constraint violation at `x`: the maximum of `g_j(x)` clamped
    /// below at zero, plus any box violation measured as a distance.
    pub fn max_violation(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let mut worst = 0.0f64;
        for g in &self.constraints {
            worst = worst.max(g.eval_unchecked(x));
        }
        for (v, (l, h)) in x.iter().zip(self.bounds.lo().iter().zip(self.bounds.hi())) {
            worst = worst.max(l - v).max(v - h);
        }
        Ok(worst.max(0.0))
    }

    /// True when `x` is inside the box (exactly) and every constraint holds
    /// up to `tol`: `g_j(x) <= tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> Result<bool> {
        self.check_point(x)?;
        if !self.bounds.contains(x) {
            return Ok(false);
        }
        Ok(self.constraints.iter().all(|g| g.eval_unchecked(x) <= tol))
    }

    /// Compares `f(x)` against `f(y)` under the componentwise order with
    /// tolerance `tol`; see [`DominanceVerdict`] for the classification.
    pub fn compare(&self, x: &[f64], y: &[f64], tol: f64) -> Result<Comparison> {
        let fx = self.objective_values(x)?;
        let fy = self.objective_values(y)?;
        let slack: Vec<f64> = fx.iter().zip(&fy).map(|(a, b)| a - b).collect();
        let verdict = DominanceVerdict::classify(&slack, tol);
        Ok(Comparison { slack, verdict })
    }

    /// The anchored dominance constraints `f_i(x) - f_i(x0) <= 0`.
    ///
    /// Requires `x0` feasible within [`ANCHOR_FEAS_TOL`]; a feasible anchor
    /// keeps the anchored sum subproblem feasible (the anchor itself
    /// satisfies every returned constraint with equality).
    pub fn dominance_constraints(&self, x0: &[f64]) -> Result<Vec<ConvexExpr>> {
        let violation = self.max_violation(x0)?;
        if violation > ANCHOR_FEAS_TOL {
            return Err(Error::InfeasibleAnchor { violation });
        }
        let values = self.objective_values(x0)?;
        self.objectives
            .iter()
            .zip(&values)
            .map(|(f, v)| f.shifted(-v))
            .collect()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// Outcome of comparing `f(x)` to `f(y)`: the verdict plus the raw
/// componentwise slack `f(x) - f(y)` it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub slack: Vec<f64>,
    pub verdict: DominanceVerdict,
}

/// Classification of `x` against `y` by objective vectors, at tolerance
/// `tol`, writing `s = f(x) - f(y)`:
///
/// * `Equal` — `|s_i| <= tol` for all `i`;
/// * `WeaklyDominates` — `s_i < -tol` for all `i`: `x` strictly improves
///   every objective, the relation whose absence defines *weak* Pareto
///   minimality (`f(x) - f(y)` in the negative open orthant);
/// * `Dominates` — `s_i <= tol` for all `i` and `s_r < -tol` for some `r`:
///   the Pareto dominance relation (checked after the two above);
/// * `Incomparable` — everything else, including "y is better": callers ask
///   for the opposite direction with the arguments swapped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DominanceVerdict {
    Dominates,
    WeaklyDominates,
    Incomparable,
    Equal,
}

impl DominanceVerdict {
    fn classify(slack: &[f64], tol: f64) -> Self {
        if slack.iter().all(|s| s.abs() <= tol) {
            return DominanceVerdict::Equal;
        }
        if slack.iter().all(|s| *s < -tol) {
            return DominanceVerdict::WeaklyDominates;
        }
        if slack.iter().all(|s| *s <= tol) && slack.iter().any(|s| *s < -tol) {
            return DominanceVerdict::Dominates;
        }
        DominanceVerdict::Incomparable
    }

    /// True when `x` dominates `y` in the Pareto sense (at least as good
    /// everywhere, strictly better somewhere).
    pub fn dominates(self) -> bool {
        matches!(
            self,
            DominanceVerdict::Dominates | DominanceVerdict::WeaklyDominates
        )
    }
}
