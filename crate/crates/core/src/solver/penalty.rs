//! The `penalty-subgradient` backend.
//!
//! Works on every subproblem, smooth or not, by minimizing the exact
//! penalty `F(x) + rho * sum_j max(0, g_j(x))` over the box with projected
//! subgradient steps `diameter * a / (b + t)`. The penalty weight doubles
//! whenever a whole check window passes without a single feasible-enough
//! iterate. Throughout, the best iterate with violation at most `feas_tol`
//! is tracked — seeded with the warm start — and is what gets returned, so
//! a warm start that is already optimal is returned unchanged.
//!
//! The decaying-step phase alone stalls around modest accuracy, so it is
//! followed by a polishing phase:
//!
//! * smooth subproblems get projected gradient descent on the squared-hinge
//!   penalty `F + rho * sum_j max(0, g_j)^2` with penalty continuation and
//!   monotone step halving;
//! * nonsmooth subproblems get switching-subgradient refinement: Polyak
//!   feasibility steps while any constraint is violated, constant objective
//!   steps otherwise, with the objective step halving each level and every
//!   level restarting from the incumbent.
//!
//! Both polishes run a chord-restoration rescue: an iterate that ends up
//! slightly infeasible is pulled back along the segment toward the
//! incumbent until it is exactly feasible, which recovers central-path
//! points whose violation never quite clears the incumbent gate.
//!
//! Both phases are deterministic; repeated solves give identical output.

use crate::scalarize::ScalarSubproblem;
use crate::solver::{SolveResult, SolveStatus, SolverBackend, SolverConfig};
use crate::{Error, Result};

pub(crate) struct PenaltyBackend;

/// Incumbent bookkeeping: the best feasible-enough point (by objective
/// value, strictly) plus a least-violating fallback.
struct Tracker {
    best: Option<(Vec<f64>, f64)>,
    fallback: (Vec<f64>, f64, f64),
}

impl Tracker {
    fn new() -> Self {
        Tracker {
            best: None,
            fallback: (Vec::new(), f64::INFINITY, f64::INFINITY),
        }
    }

    /// Records `x`; returns true when it became the new best.
    fn consider(&mut self, x: &[f64], value: f64, violation: f64, feas_tol: f64) -> bool {
        if violation < self.fallback.2 || (violation <= self.fallback.2 && value < self.fallback.1)
        {
            self.fallback = (x.to_vec(), value, violation);
        }
        if violation > feas_tol {
            return false;
        }
        match &self.best {
            Some((_, best_val)) if value >= *best_val => false,
            _ => {
                self.best = Some((x.to_vec(), value));
                true
            }
        }
    }
}

/// Evaluates objective and constraints; returns the objective value and the
/// largest constraint violation (the point is assumed inside the box).
fn eval_all(sub: &ScalarSubproblem, x: &[f64], gvals: &mut [f64]) -> (f64, f64) {
    let value = sub.objective.eval_unchecked(x);
    let mut viol: f64 = 0.0;
    for (slot, g) in gvals.iter_mut().zip(&sub.constraints) {
        *slot = g.eval_unchecked(x);
        viol = viol.max(*slot);
    }
    (value, viol.max(0.0))
}

/// Hinge-penalty subgradient into `grad`.
fn hinge_subgradient(sub: &ScalarSubproblem, x: &[f64], gvals: &[f64], rho: f64, grad: &mut [f64]) {
    grad.iter_mut().for_each(|v| *v = 0.0);
    sub.objective.accumulate_subgradient(x, 1.0, grad);
    for (gval, g) in gvals.iter().zip(&sub.constraints) {
        if *gval > 0.0 {
            g.accumulate_subgradient(x, rho, grad);
        }
    }
}

/// Squared-hinge-penalty gradient into `grad` (all parts smooth here).
fn squared_hinge_gradient(
    sub: &ScalarSubproblem,
    x: &[f64],
    gvals: &[f64],
    rho: f64,
    grad: &mut [f64],
) {
    grad.iter_mut().for_each(|v| *v = 0.0);
    sub.objective.accumulate_subgradient(x, 1.0, grad);
    for (gval, g) in gvals.iter().zip(&sub.constraints) {
        if *gval > 0.0 {
            g.accumulate_subgradient(x, 2.0 * rho * *gval, grad);
        }
    }
}

fn squared_hinge_value(value: f64, gvals: &[f64], rho: f64) -> f64 {
    let pen: f64 = gvals.iter().map(|g| g.max(0.0) * g.max(0.0)).sum();
    value + rho * pen
}

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, l), h) in x.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(*l, *h);
    }
}

/// Pulls an infeasible iterate back onto the segment toward the incumbent
/// and offers the boundary point to the tracker. Every constraint is convex,
/// so the exactly-feasible part of the segment is an interval containing the
/// incumbent end and a bisection finds its far edge. This rescues
/// central-path iterates whose violation lands just above the incumbent
/// gate: the pulled-back point is a whisker away and typically still
/// strictly better than the incumbent. Demanding exact feasibility (not
/// just `feas_tol`) keeps the rescue sound: a feasible point can never
/// undercut the constrained optimum, and on degenerate cuts whose feasible
/// set has no interior the bisection collapses onto the incumbent and
/// changes nothing.
fn restore_along_chord(
    sub: &ScalarSubproblem,
    x: &[f64],
    gvals: &mut [f64],
    tracker: &mut Tracker,
    feas_tol: f64,
) {
    let (_, viol) = eval_all(sub, x, gvals);
    if viol <= feas_tol {
        return; // the caller already offered this point
    }
    let Some((base, _)) = tracker.best.clone() else {
        return;
    };
    let point_at =
        |s: f64| -> Vec<f64> { base.iter().zip(x).map(|(b, v)| b + s * (v - b)).collect() };
    if eval_all(sub, &point_at(0.0), gvals).1 > 0.0 {
        return;
    }
    let (mut admissible, mut excessive) = (0.0f64, 1.0f64);
    for _ in 0..64 {
        let mid = 0.5 * (admissible + excessive);
        if eval_all(sub, &point_at(mid), gvals).1 <= 0.0 {
            admissible = mid;
        } else {
            excessive = mid;
        }
    }
    let restored = point_at(admissible);
    let (value, viol) = eval_all(sub, &restored, gvals);
    tracker.consider(&restored, value, viol, feas_tol);
}

impl SolverBackend for PenaltyBackend {
    fn name(&self) -> &'static str {
        "penalty-subgradient"
    }

    fn supports(&self, _sub: &ScalarSubproblem) -> bool {
        true
    }

    fn solve(
        &self,
        sub: &ScalarSubproblem,
        cfg: &SolverConfig,
        warm: Option<&[f64]>,
    ) -> Result<SolveResult> {
        let n = sub.dim();
        let lo = sub.bounds.lo().to_vec();
        let hi = sub.bounds.hi().to_vec();
        let diameter = sub.bounds.diagonal().max(1e-12);

        let mut x: Vec<f64> = match warm {
            Some(w) => {
                if w.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: w.len(),
                    });
                }
                w.to_vec()
            }
            None => sub.bounds.center(),
        };
        project(&mut x, &lo, &hi);

        let mut tracker = Tracker::new();
        let mut gvals = vec![0.0; sub.constraints.len()];
        let mut grad = vec![0.0; n];
        let mut iterations = 0u64;

        // Seed the incumbent with the start point.
        let (v0, viol0) = eval_all(sub, &x, &mut gvals);
        tracker.consider(&x, v0, viol0, cfg.feas_tol);

        // Phase A: decaying-step subgradient on the hinge penalty.
        let main_budget = (cfg.max_iters / 8).max(1);
        let window = (main_budget / 20).max(500);
        let stagnation = (main_budget / 10).max(1_000);
        let mut rho = cfg.penalty_init;
        let mut feas_in_window = 0u64;
        let mut last_improve = 0u64;
        let mut t = 0u64;
        while t < main_budget {
            let (value, viol) = eval_all(sub, &x, &mut gvals);
            if tracker.consider(&x, value, viol, cfg.feas_tol) {
                last_improve = t;
            }
            if viol <= cfg.feas_tol {
                feas_in_window += 1;
            }
            if tracker.best.is_some() && t - last_improve > stagnation {
                break;
            }
            hinge_subgradient(sub, &x, &gvals, rho, &mut grad);
            let step = diameter * cfg.step_a / (cfg.step_b + t as f64);
            for d in 0..n {
                x[d] = (x[d] - step * grad[d]).clamp(lo[d], hi[d]);
            }
            t += 1;
            iterations += 1;
            if t.is_multiple_of(window) {
                if feas_in_window == 0 {
                    rho = (rho * cfg.penalty_growth).min(cfg.penalty_cap);
                }
                feas_in_window = 0;
            }
        }

        // Phase B: polish from the incumbent (or the current point).
        if let Some((bx, _)) = &tracker.best {
            x.copy_from_slice(bx);
        }
        let polish_budget = cfg.max_iters.saturating_sub(iterations).max(1);
        let smooth = sub.objective.is_smooth() && sub.constraints.iter().all(|g| g.is_smooth());
        let converged = if smooth {
            polish_smooth(
                sub,
                &mut x,
                cfg,
                polish_budget,
                &lo,
                &hi,
                &mut gvals,
                &mut grad,
                &mut tracker,
                &mut iterations,
            )
        } else {
            refine_nonsmooth(
                sub,
                &mut x,
                cfg,
                polish_budget,
                diameter,
                &lo,
                &hi,
                &mut gvals,
                &mut grad,
                &mut tracker,
                &mut iterations,
            )
        };

        match tracker.best {
            Some((bx, bval)) => {
                let viol = sub.max_violation(&bx)?;
                Ok(SolveResult {
                    x: bx,
                    value: bval,
                    max_violation: viol,
                    iterations,
                    status: if converged {
                        SolveStatus::Optimal
                    } else {
                        SolveStatus::IterationBudgetReached
                    },
                })
            }
            None => {
                let (fx, fval, fviol) = tracker.fallback;
                Ok(SolveResult {
                    x: fx,
                    value: fval,
                    max_violation: fviol,
                    iterations,
                    status: SolveStatus::InfeasibleDetected,
                })
            }
        }
    }
}

/// Projected gradient descent on the squared-hinge penalty with penalty
/// continuation. Returns true when a stationary, feasible-enough point was
/// reached before the budget or the penalty cap ran out.
///
/// The continuation deliberately restarts at `penalty_init` rather than at
/// whatever weight the subgradient phase escalated to: the step length
/// shrinks like `1 / (rho * l_g)`, so once the weight is large the iterate
/// can only move perpendicular to the active constraints and any error
/// *along* them never drains. Early low-weight stages remove that
/// tangential error cheaply; the doubling stages then sharpen feasibility.
#[allow(clippy::too_many_arguments)]
fn polish_smooth(
    sub: &ScalarSubproblem,
    x: &mut [f64],
    cfg: &SolverConfig,
    budget: u64,
    lo: &[f64],
    hi: &[f64],
    gvals: &mut [f64],
    grad: &mut [f64],
    tracker: &mut Tracker,
    iterations: &mut u64,
) -> bool {
    let n = x.len();
    let l_f = sub.objective.smooth_curvature().unwrap_or(0.0);
    let l_g: f64 = sub
        .constraints
        .iter()
        .map(|g| g.smooth_curvature().unwrap_or(0.0))
        .sum();
    let diameter = sub.bounds.diagonal().max(1e-12);
    let stage_iters = 2_000u64;
    let mut rho = cfg.penalty_init;
    let mut used = 0u64;
    let mut xn = vec![0.0; n];

    loop {
        let mut step = (1.0 / (l_f + rho * l_g).max(1e-6)).min(diameter);
        let (mut value, mut viol) = eval_all(sub, x, gvals);
        let mut psi = squared_hinge_value(value, gvals, rho);
        let mut stationary = false;

        for _ in 0..stage_iters {
            if used >= budget {
                restore_along_chord(sub, x, gvals, tracker, cfg.feas_tol);
                return false;
            }
            used += 1;
            *iterations += 1;
            squared_hinge_gradient(sub, x, gvals, rho, grad);
            // Monotone halving line search on the penalty value.
            let (nvalue, nviol, npsi) = loop {
                for d in 0..n {
                    xn[d] = (x[d] - step * grad[d]).clamp(lo[d], hi[d]);
                }
                let (nvalue, nviol) = eval_all(sub, &xn, gvals);
                let npsi = squared_hinge_value(nvalue, gvals, rho);
                if npsi <= psi + 1e-14 * (1.0 + psi.abs()) || step < 1e-18 {
                    break (nvalue, nviol, npsi);
                }
                step *= 0.5;
            };
            let moved = x
                .iter()
                .zip(&xn)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            let scale = x.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
            x.copy_from_slice(&xn);
            value = nvalue;
            viol = nviol;
            psi = npsi;
            tracker.consider(x, value, viol, cfg.feas_tol);
            if moved <= 1e-14 * (1.0 + scale) {
                stationary = true;
                break;
            }
            step = (step * 1.25).min(diameter);
        }

        if stationary && viol <= cfg.feas_tol {
            return true;
        }
        if rho >= cfg.penalty_cap {
            // The cap ran out before the path violation cleared the
            // incumbent gate; salvage the nearest feasible point.
            restore_along_chord(sub, x, gvals, tracker, cfg.feas_tol);
            return false;
        }
        rho = (rho * cfg.penalty_growth).min(cfg.penalty_cap);
    }
}

/// Switching subgradient refinement for nonsmooth subproblems: an
/// infeasible iterate takes a Polyak step toward the worst constraint's
/// boundary (which lands exactly on it for an affine piece), a feasible one
/// takes a constant objective step whose length halves each level; every
/// level restarts from the incumbent. No penalty weight is involved, so
/// unknown multiplier magnitudes cannot park the iterate at an infeasible
/// penalized minimum, and the value floor of a level is set by the
/// objective's own Lipschitz constant times the step.
#[allow(clippy::too_many_arguments)]
fn refine_nonsmooth(
    sub: &ScalarSubproblem,
    x: &mut [f64],
    cfg: &SolverConfig,
    budget: u64,
    diameter: f64,
    lo: &[f64],
    hi: &[f64],
    gvals: &mut [f64],
    grad: &mut [f64],
    tracker: &mut Tracker,
    iterations: &mut u64,
) -> bool {
    let n = x.len();
    let levels = 40u64;
    let per_level = (budget / levels).clamp(250, 2_000);
    let mut step = diameter / 4.0;
    for _ in 0..levels {
        for _ in 0..per_level {
            let (value, viol) = eval_all(sub, x, gvals);
            tracker.consider(x, value, viol, cfg.feas_tol);
            grad.iter_mut().for_each(|v| *v = 0.0);
            let length = if viol > cfg.feas_tol {
                let worst = gvals
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(j, _)| j)
                    .expect("a violation implies a constraint");
                sub.constraints[worst].accumulate_subgradient(x, 1.0, grad);
                let norm2: f64 = grad.iter().map(|v| v * v).sum();
                if norm2 <= 1e-30 {
                    break; // flat positive constraint: nothing can restore it
                }
                viol / norm2
            } else {
                sub.objective.accumulate_subgradient(x, 1.0, grad);
                step
            };
            for d in 0..n {
                x[d] = (x[d] - length * grad[d]).clamp(lo[d], hi[d]);
            }
            *iterations += 1;
        }
        restore_along_chord(sub, x, gvals, tracker, cfg.feas_tol);
        if let Some((bx, _)) = &tracker.best {
            x.copy_from_slice(bx);
        }
        step *= 0.5;
    }
    true
}
