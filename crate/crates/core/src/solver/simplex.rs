//! Dense two-phase simplex and the `lp` backend built on it.
//!
//! The simplex works on the standard form `min c'z` subject to linear rows
//! and `z >= 0`, with Bland's anti-cycling rule throughout, so it
//! terminates on degenerate problems. The same routine powers the epigraph
//! backend here and the multiplier searches in the certification module.

use crate::expr::PiecewiseLinearForm;
use crate::scalarize::ScalarSubproblem;
use crate::solver::{SolveResult, SolveStatus, SolverBackend, SolverConfig};
use crate::{Error, Result};

/// Relation of one linear row `coeffs . z  (rel)  rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RowRel {
    Le,
    Ge,
    Eq,
}

/// One constraint row over nonnegative variables.
#[derive(Debug, Clone)]
pub(crate) struct LpRow {
    pub coeffs: Vec<f64>,
    pub rel: RowRel,
    pub rhs: f64,
}

/// Result of a linear program over nonnegative variables.
#[derive(Debug, Clone)]
pub(crate) enum LpOutcome {
    Optimal {
        z: Vec<f64>,
        value: f64,
        pivots: u64,
    },
    Infeasible,
    Unbounded,
}

/// Numerical tolerance for pivots and reduced costs.
const PIVOT_TOL: f64 = 1e-9;
/// Hard cap on pivots; Bland's rule terminates finitely, this guards
/// against degenerate floating-point stalls.
const MAX_PIVOTS: u64 = 50_000;

/// Solves `min objective . z` subject to `rows` and `z >= 0`.
pub(crate) fn solve_linear_program(objective: &[f64], rows: &[LpRow]) -> Result<LpOutcome> {
    let n = objective.len();
    for row in rows {
        if row.coeffs.len() != n {
            return Err(Error::RaggedInput);
        }
    }
    let m = rows.len();

    // Column layout: structural | slack/surplus | artificial.
    let mut n_slack = 0usize;
    for row in rows {
        if matches!(row.rel, RowRel::Le | RowRel::Ge) {
            n_slack += 1;
        }
    }
    let mut n_art = 0usize;
    // Rows are normalized to rhs >= 0 first; whether an artificial is
    // needed depends on the normalized relation.
    let normalized: Vec<(Vec<f64>, RowRel, f64)> = rows
        .iter()
        .map(|row| {
            if row.rhs < 0.0 {
                let coeffs = row.coeffs.iter().map(|c| -c).collect();
                let rel = match row.rel {
                    RowRel::Le => RowRel::Ge,
                    RowRel::Ge => RowRel::Le,
                    RowRel::Eq => RowRel::Eq,
                };
                (coeffs, rel, -row.rhs)
            } else {
                (row.coeffs.clone(), row.rel, row.rhs)
            }
        })
        .collect();
    for (_, rel, _) in &normalized {
        if matches!(rel, RowRel::Ge | RowRel::Eq) {
            n_art += 1;
        }
    }

    let total = n + n_slack + n_art;
    let mut tab: Vec<Vec<f64>> = vec![vec![0.0; total + 1]; m];
    let mut basis: Vec<usize> = vec![0; m];
    let mut is_artificial = vec![false; total];

    let mut slack_at = n;
    let mut art_at = n + n_slack;
    for (i, (coeffs, rel, rhs)) in normalized.iter().enumerate() {
        tab[i][..n].copy_from_slice(coeffs);
        tab[i][total] = *rhs;
        match rel {
            RowRel::Le => {
                tab[i][slack_at] = 1.0;
                basis[i] = slack_at;
                slack_at += 1;
            }
            RowRel::Ge => {
                tab[i][slack_at] = -1.0;
                slack_at += 1;
                tab[i][art_at] = 1.0;
                is_artificial[art_at] = true;
                basis[i] = art_at;
                art_at += 1;
            }
            RowRel::Eq => {
                tab[i][art_at] = 1.0;
                is_artificial[art_at] = true;
                basis[i] = art_at;
                art_at += 1;
            }
        }
    }

    let mut pivots = 0u64;

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        let phase1_costs: Vec<f64> = (0..total)
            .map(|j| if is_artificial[j] { 1.0 } else { 0.0 })
            .collect();
        match run_simplex(
            &mut tab,
            &mut basis,
            &phase1_costs,
            &vec![false; total],
            &mut pivots,
        )? {
            SimplexEnd::Optimal => {}
            SimplexEnd::Unbounded => {
                return Err(Error::Numerical("phase-1 objective unbounded".into()))
            }
        }
        let max_rhs = tab.iter().map(|r| r[total].abs()).fold(0.0, f64::max);
        let art_sum: f64 = basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| is_artificial[b])
            .map(|(i, _)| tab[i][total])
            .sum();
        if art_sum > 1e-7 * (1.0 + max_rhs) {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining artificials out of the basis; rows that offer no
        // pivot are redundant and get dropped.
        let mut drop_rows = Vec::new();
        for i in 0..tab.len() {
            if !is_artificial[basis[i]] {
                continue;
            }
            let pivot_col = (0..total).find(|&j| !is_artificial[j] && tab[i][j].abs() > PIVOT_TOL);
            match pivot_col {
                Some(j) => {
                    pivot(&mut tab, &mut basis, i, j);
                    pivots += 1;
                }
                None => drop_rows.push(i),
            }
        }
        for &i in drop_rows.iter().rev() {
            tab.remove(i);
            basis.remove(i);
        }
    }

    // Phase 2: original costs, artificial columns banned.
    let mut phase2_costs = vec![0.0; total];
    phase2_costs[..n].copy_from_slice(objective);
    match run_simplex(
        &mut tab,
        &mut basis,
        &phase2_costs,
        &is_artificial,
        &mut pivots,
    )? {
        SimplexEnd::Optimal => {}
        SimplexEnd::Unbounded => return Ok(LpOutcome::Unbounded),
    }

    let mut z = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            z[b] = tab[i][total].max(0.0);
        }
    }
    let value = objective.iter().zip(&z).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal { z, value, pivots })
}

enum SimplexEnd {
    Optimal,
    Unbounded,
}

/// Runs primal simplex iterations on a tableau already in canonical form.
/// Entering and leaving variables follow Bland's rule.
fn run_simplex(
    tab: &mut [Vec<f64>],
    basis: &mut [usize],
    costs: &[f64],
    banned: &[bool],
    pivots: &mut u64,
) -> Result<SimplexEnd> {
    let total = costs.len();
    let rhs_col = total;
    loop {
        if *pivots >= MAX_PIVOTS {
            return Err(Error::Numerical("simplex pivot budget exhausted".into()));
        }
        // Reduced costs r_j = c_j - c_B . (B^-1 A_j), computed on demand.
        let mut entering = None;
        for j in 0..total {
            if banned[j] || basis.contains(&j) {
                continue;
            }
            let mut r = costs[j];
            for (i, row) in tab.iter().enumerate() {
                let cb = costs[basis[i]];
                if cb != 0.0 {
                    r -= cb * row[j];
                }
            }
            if r < -PIVOT_TOL {
                entering = Some(j);
                break; // Bland: lowest eligible index.
            }
        }
        let e = match entering {
            Some(e) => e,
            None => return Ok(SimplexEnd::Optimal),
        };
        // Ratio test; ties resolved by lowest basis index (Bland).
        let mut leave: Option<(usize, f64)> = None;
        for (i, row) in tab.iter().enumerate() {
            if row[e] > PIVOT_TOL {
                let ratio = row[rhs_col] / row[e];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - PIVOT_TOL
                            || (ratio < lr + PIVOT_TOL && basis[i] < basis[li])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let (li, _) = match leave {
            Some(l) => l,
            None => return Ok(SimplexEnd::Unbounded),
        };
        pivot(tab, basis, li, e);
        *pivots += 1;
    }
}

/// Pivots the tableau on entry `(row, col)` and updates the basis.
fn pivot(tab: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let scale = tab[row][col];
    for v in tab[row].iter_mut() {
        *v /= scale;
    }
    let pivot_row = tab[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i != row && r[col].abs() > 0.0 {
            let factor = r[col];
            for (v, p) in r.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            r[col] = 0.0;
        }
    }
    basis[row] = col;
}

/// The exact backend: epigraph form of a piecewise-linear subproblem.
///
/// Variables are the box offsets `u = x - lo >= 0` plus a split epigraph
/// level `t = t+ - t-`; every linear piece of the objective must stay below
/// `t` and every piece of each constraint below zero. Warm starts are
/// accepted but ignored — the simplex solves to a vertex regardless.
pub(crate) struct LpBackend;

impl LpBackend {
    fn piecewise_forms(
        sub: &ScalarSubproblem,
    ) -> Option<(PiecewiseLinearForm, Vec<PiecewiseLinearForm>)> {
        let obj = sub.objective.to_piecewise_linear()?;
        let mut cons = Vec::with_capacity(sub.constraints.len());
        for c in &sub.constraints {
            cons.push(c.to_piecewise_linear()?);
        }
        Some((obj, cons))
    }
}

impl SolverBackend for LpBackend {
    fn name(&self) -> &'static str {
        "lp"
    }

    fn supports(&self, sub: &ScalarSubproblem) -> bool {
        Self::piecewise_forms(sub).is_some()
    }

    fn solve(
        &self,
        sub: &ScalarSubproblem,
        _cfg: &SolverConfig,
        warm: Option<&[f64]>,
    ) -> Result<SolveResult> {
        let (obj_pl, con_pls) = Self::piecewise_forms(sub).ok_or(Error::BackendUnsupported {
            backend: "lp".into(),
            reason: "subproblem has no piecewise-linear form".into(),
        })?;
        let n = sub.dim();
        let lo = sub.bounds.lo();
        let hi = sub.bounds.hi();
        // Columns: u_0..u_{n-1}, t+, t-.
        let cols = n + 2;
        let mut objective = vec![0.0; cols];
        objective[n] = 1.0;
        objective[n + 1] = -1.0;

        let mut rows = Vec::new();
        for piece in obj_pl.pieces() {
            let mut coeffs = vec![0.0; cols];
            coeffs[..n].copy_from_slice(&piece.gradient);
            coeffs[n] = -1.0;
            coeffs[n + 1] = 1.0;
            let shift: f64 = piece.gradient.iter().zip(lo).map(|(g, l)| g * l).sum();
            rows.push(LpRow {
                coeffs,
                rel: RowRel::Le,
                rhs: -(shift + piece.offset),
            });
        }
        for pl in &con_pls {
            for piece in pl.pieces() {
                let mut coeffs = vec![0.0; cols];
                coeffs[..n].copy_from_slice(&piece.gradient);
                let shift: f64 = piece.gradient.iter().zip(lo).map(|(g, l)| g * l).sum();
                rows.push(LpRow {
                    coeffs,
                    rel: RowRel::Le,
                    rhs: -(shift + piece.offset),
                });
            }
        }
        for d in 0..n {
            let mut coeffs = vec![0.0; cols];
            coeffs[d] = 1.0;
            rows.push(LpRow {
                coeffs,
                rel: RowRel::Le,
                rhs: hi[d] - lo[d],
            });
        }

        match solve_linear_program(&objective, &rows)? {
            LpOutcome::Optimal { z, pivots, .. } => {
                let x: Vec<f64> = (0..n).map(|d| (lo[d] + z[d]).clamp(lo[d], hi[d])).collect();
                let value = sub.objective.eval(&x)?;
                let max_violation = sub.max_violation(&x)?;
                Ok(SolveResult {
                    x,
                    value,
                    max_violation,
                    iterations: pivots,
                    status: SolveStatus::Optimal,
                })
            }
            LpOutcome::Infeasible => {
                let x: Vec<f64> = match warm {
                    Some(w) => w.to_vec(),
                    None => sub.bounds.center(),
                };
                let value = sub.objective.eval(&x)?;
                let max_violation = sub.max_violation(&x)?;
                Ok(SolveResult {
                    x,
                    value,
                    max_violation,
                    iterations: 0,
                    status: SolveStatus::InfeasibleDetected,
                })
            }
            LpOutcome::Unbounded => Err(Error::Numerical(
                "epigraph program unbounded despite box bounds".into(),
            )),
        }
    }
}
