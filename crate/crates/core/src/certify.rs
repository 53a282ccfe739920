//! Optimality certification at a candidate point.
//!
//! Three independent instruments:
//!
//! * [`kkt_certificate`] searches for multipliers witnessing stationarity
//!   of the anchored-sum system, in a strong flavor (every objective
//!   weight at least one) and a weak flavor (weights on the simplex). The
//!   search is a small linear program over subdifferential generators that
//!   minimizes the infinity norm of the stationarity residual; a residual
//!   below [`KKT_RESIDUAL_TOL`] certifies the point. Failure to find
//!   multipliers is **not** a disproof — constraint qualifications may
//!   simply fail at the point.
//! * [`check_abadie`] probes that failure mode directly: it samples
//!   directions that look admissible to first order and tests whether short
//!   moves along them stay inside the anchored feasible set.
//! * [`estimate_geoffrion`] estimates the properness trade-off constant by
//!   brute force over a grid plus geometrically refined probes anchored at
//!   the point, where trade-off ratios blow up first.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::oracle::{GRID_DIM_LIMIT, GRID_POINT_LIMIT};
use crate::problem::{VectorProblem, ANCHOR_FEAS_TOL};
use crate::solver::{solve_linear_program, LpOutcome, LpRow, RowRel};
use crate::{Error, Result};

/// A stationarity residual at or below this certifies the point.
pub const KKT_RESIDUAL_TOL: f64 = 1e-6;
/// Constraints and box facets within this of zero count as active.
pub const ACTIVE_TOL: f64 = 1e-8;
/// First-order admissibility tolerance for sampled directions.
const DIRECTION_TOL: f64 = 1e-9;
/// Step lengths probed along each admissible direction.
const ABADIE_STEPS: [f64; 3] = [1e-2, 1e-4, 1e-6];
/// Geometric refinement exponents for the properness probes.
const GEOFFRION_REFINE: std::ops::RangeInclusive<i32> = 1..=8;
/// Denominators below this are too small to give a trustworthy ratio.
const RATIO_DENOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KktMode {
    Strong,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KktVerdict {
    Certified,
    /// No multipliers below the residual tolerance; inconclusive, because a
    /// constraint qualification may fail at the point.
    NoMultipliersFound,
}

/// Multipliers found for the stationarity system, plus the residuals they
/// achieve.
#[derive(Debug, Clone, Serialize)]
pub struct KktCertificate {
    pub mode: KktMode,
    /// One weight per objective.
    pub lambda: Vec<f64>,
    /// One weight per explicit constraint (zero when inactive).
    pub mu: Vec<f64>,
    /// Weights on the active lower/upper box facets (zero when inactive).
    pub box_lower: Vec<f64>,
    pub box_upper: Vec<f64>,
    /// Infinity norm of the combined-gradient residual.
    pub stationarity_residual: f64,
    /// Largest `multiplier * |constraint value|` product.
    pub complementarity_residual: f64,
    pub verdict: KktVerdict,
}

/// Searches for KKT multipliers at `x0` by linear programming over
/// subdifferential generators.
pub fn kkt_certificate(
    problem: &VectorProblem,
    x0: &[f64],
    mode: KktMode,
) -> Result<KktCertificate> {
    let n = problem.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    let violation = problem.max_violation(x0)?;
    if violation > ANCHOR_FEAS_TOL {
        return Err(Error::InfeasibleAnchor { violation });
    }

    let obj_gens: Vec<Vec<Vec<f64>>> = problem
        .objectives()
        .iter()
        .map(|f| f.subdifferential_generators(x0))
        .collect::<Result<_>>()?;
    let gvals: Vec<f64> = problem
        .constraints()
        .iter()
        .map(|g| g.eval_unchecked(x0))
        .collect();
    let active: Vec<usize> = gvals
        .iter()
        .enumerate()
        .filter_map(|(r, &v)| (v >= -ACTIVE_TOL).then_some(r))
        .collect();
    let con_gens: Vec<Vec<Vec<f64>>> = active
        .iter()
        .map(|&r| problem.constraints()[r].subdifferential_generators(x0))
        .collect::<Result<_>>()?;
    let lo = problem.bounds().lo();
    let hi = problem.bounds().hi();
    let lower_active: Vec<usize> = (0..n).filter(|&d| x0[d] <= lo[d] + ACTIVE_TOL).collect();
    let upper_active: Vec<usize> = (0..n).filter(|&d| x0[d] >= hi[d] - ACTIVE_TOL).collect();

    // Column layout: objective generator weights, active-constraint
    // generator weights, upper facet weights, lower facet weights, split
    // residuals r+ and r-, and the bound t being minimized.
    let mut col = 0usize;
    let a_cols: Vec<Vec<usize>> = obj_gens
        .iter()
        .map(|g| (0..g.len()).map(|_| post_inc(&mut col)).collect())
        .collect();
    let b_cols: Vec<Vec<usize>> = con_gens
        .iter()
        .map(|g| (0..g.len()).map(|_| post_inc(&mut col)).collect())
        .collect();
    let up_cols: Vec<usize> = upper_active.iter().map(|_| post_inc(&mut col)).collect();
    let lo_cols: Vec<usize> = lower_active.iter().map(|_| post_inc(&mut col)).collect();
    let rp_cols: Vec<usize> = (0..n).map(|_| post_inc(&mut col)).collect();
    let rm_cols: Vec<usize> = (0..n).map(|_| post_inc(&mut col)).collect();
    let t_col = post_inc(&mut col);
    let total = col;

    let mut objective = vec![0.0; total];
    objective[t_col] = 1.0;
    let mut rows = Vec::new();

    // Stationarity per coordinate: combined gradient equals r+ - r-.
    for d in 0..n {
        let mut coeffs = vec![0.0; total];
        for (i, gens) in obj_gens.iter().enumerate() {
            for (p, gen) in gens.iter().enumerate() {
                coeffs[a_cols[i][p]] = gen[d];
            }
        }
        for (k, gens) in con_gens.iter().enumerate() {
            for (q, gen) in gens.iter().enumerate() {
                coeffs[b_cols[k][q]] = gen[d];
            }
        }
        for (k, &dd) in upper_active.iter().enumerate() {
            if dd == d {
                coeffs[up_cols[k]] = 1.0;
            }
        }
        for (k, &dd) in lower_active.iter().enumerate() {
            if dd == d {
                coeffs[lo_cols[k]] = -1.0;
            }
        }
        coeffs[rp_cols[d]] = -1.0;
        coeffs[rm_cols[d]] = 1.0;
        rows.push(LpRow {
            coeffs,
            rel: RowRel::Eq,
            rhs: 0.0,
        });
    }
    // |r_d| <= t.
    for d in 0..n {
        let mut coeffs = vec![0.0; total];
        coeffs[rp_cols[d]] = 1.0;
        coeffs[rm_cols[d]] = 1.0;
        coeffs[t_col] = -1.0;
        rows.push(LpRow {
            coeffs,
            rel: RowRel::Le,
            rhs: 0.0,
        });
    }
    // Objective weight normalization.
    match mode {
        KktMode::Strong => {
            for cols in &a_cols {
                let mut coeffs = vec![0.0; total];
                for &c in cols {
                    coeffs[c] = 1.0;
                }
                rows.push(LpRow {
                    coeffs,
                    rel: RowRel::Ge,
                    rhs: 1.0,
                });
            }
        }
        KktMode::Weak => {
            let mut coeffs = vec![0.0; total];
            for cols in &a_cols {
                for &c in cols {
                    coeffs[c] = 1.0;
                }
            }
            rows.push(LpRow {
                coeffs,
                rel: RowRel::Eq,
                rhs: 1.0,
            });
        }
    }

    let (z, residual) = match solve_linear_program(&objective, &rows)? {
        LpOutcome::Optimal { z, value, .. } => (z, value),
        LpOutcome::Infeasible | LpOutcome::Unbounded => {
            return Err(Error::Numerical(
                "multiplier program should always be feasible and bounded".into(),
            ))
        }
    };

    let lambda: Vec<f64> = a_cols
        .iter()
        .map(|cols| cols.iter().map(|&c| z[c]).sum())
        .collect();
    let mut mu = vec![0.0; problem.constraints().len()];
    for (k, &r) in active.iter().enumerate() {
        mu[r] = b_cols[k].iter().map(|&c| z[c]).sum();
    }
    let mut box_lower = vec![0.0; n];
    for (k, &d) in lower_active.iter().enumerate() {
        box_lower[d] = z[lo_cols[k]];
    }
    let mut box_upper = vec![0.0; n];
    for (k, &d) in upper_active.iter().enumerate() {
        box_upper[d] = z[up_cols[k]];
    }
    let stationarity_residual = residual.max(z[t_col]);
    let mut complementarity_residual = 0.0f64;
    for (r, &v) in gvals.iter().enumerate() {
        complementarity_residual = complementarity_residual.max(mu[r] * v.abs());
    }
    for d in 0..n {
        complementarity_residual =
            complementarity_residual.max(box_lower[d] * (x0[d] - lo[d]).abs());
        complementarity_residual =
            complementarity_residual.max(box_upper[d] * (hi[d] - x0[d]).abs());
    }

    let verdict = if stationarity_residual <= KKT_RESIDUAL_TOL {
        KktVerdict::Certified
    } else {
        KktVerdict::NoMultipliersFound
    };
    Ok(KktCertificate {
        mode,
        lambda,
        mu,
        box_lower,
        box_upper,
        stationarity_residual,
        complementarity_residual,
        verdict,
    })
}

fn post_inc(c: &mut usize) -> usize {
    let v = *c;
    *c += 1;
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbadieVerdict {
    /// Every sampled admissible direction was attainable by a short move.
    HoldsOnSample,
    /// Some admissible direction leaves the anchored set at every probed
    /// step length; the qualification fails at the point.
    FailsWithWitness,
    /// Nothing was tested (no directions requested).
    Inconclusive,
}

/// A direction that certifies failure of the qualification.
#[derive(Debug, Clone, Serialize)]
pub struct AbadieWitness {
    pub direction: Vec<f64>,
    /// Worst excess over the anchored set at the finest probed step.
    pub violation_at_finest: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AbadieReport {
    pub verdict: AbadieVerdict,
    /// Directions sampled in total (axes plus random).
    pub directions_tested: usize,
    /// How many passed the first-order admissibility screen.
    pub cone_directions: usize,
    pub witness: Option<AbadieWitness>,
}

/// Samples the first-order admissible cone at `x0` and tests each sampled
/// direction for attainability within the anchored feasible set
/// (`x` feasible with `f(x) <= f(x0)` componentwise, exactly). Directions
/// are the `2n` signed axes plus `samples` random unit vectors from a
/// generator seeded with `seed`.
pub fn check_abadie(
    problem: &VectorProblem,
    x0: &[f64],
    samples: usize,
    seed: u64,
) -> Result<AbadieReport> {
    let n = problem.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    let violation = problem.max_violation(x0)?;
    if violation > ANCHOR_FEAS_TOL {
        return Err(Error::InfeasibleAnchor { violation });
    }
    let f0 = problem.objective_values(x0)?;
    let gvals: Vec<f64> = problem
        .constraints()
        .iter()
        .map(|g| g.eval_unchecked(x0))
        .collect();
    let lo = problem.bounds().lo();
    let hi = problem.bounds().hi();

    let mut directions: Vec<Vec<f64>> = Vec::new();
    for d in 0..n {
        for sign in [1.0, -1.0] {
            let mut h = vec![0.0; n];
            h[d] = sign;
            directions.push(h);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while directions.len() < 2 * n + samples {
        let h: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm >= 1e-3 {
            directions.push(h.iter().map(|v| v / norm).collect());
        }
    }

    if directions.is_empty() {
        return Ok(AbadieReport {
            verdict: AbadieVerdict::Inconclusive,
            directions_tested: 0,
            cone_directions: 0,
            witness: None,
        });
    }

    let mut cone_directions = 0usize;
    let mut witness: Option<AbadieWitness> = None;
    for h in &directions {
        if !admissible(problem, x0, h, &gvals, lo, hi)? {
            continue;
        }
        cone_directions += 1;
        let mut attainable = false;
        let mut finest_excess = 0.0;
        for &t in &ABADIE_STEPS {
            let x: Vec<f64> = x0.iter().zip(h).map(|(a, b)| a + t * b).collect();
            let excess = anchored_excess(problem, &x, &f0)?;
            if excess <= 0.0 {
                attainable = true;
                break;
            }
            finest_excess = excess;
        }
        if !attainable && witness.is_none() {
            witness = Some(AbadieWitness {
                direction: h.clone(),
                violation_at_finest: finest_excess,
            });
        }
    }

    let verdict = match &witness {
        Some(_) => AbadieVerdict::FailsWithWitness,
        None => AbadieVerdict::HoldsOnSample,
    };
    Ok(AbadieReport {
        verdict,
        directions_tested: directions.len(),
        cone_directions,
        witness,
    })
}

/// First-order admissibility of `h` at `x0`: non-increasing directional
/// derivative for every objective and every active constraint, and not
/// pointing out of any active box facet.
fn admissible(
    problem: &VectorProblem,
    x0: &[f64],
    h: &[f64],
    gvals: &[f64],
    lo: &[f64],
    hi: &[f64],
) -> Result<bool> {
    for f in problem.objectives() {
        if f.directional_derivative(x0, h)? > DIRECTION_TOL {
            return Ok(false);
        }
    }
    for (g, &v) in problem.constraints().iter().zip(gvals) {
        if v >= -ACTIVE_TOL && g.directional_derivative(x0, h)? > DIRECTION_TOL {
            return Ok(false);
        }
    }
    for d in 0..x0.len() {
        if x0[d] >= hi[d] - ACTIVE_TOL && h[d] > DIRECTION_TOL {
            return Ok(false);
        }
        if x0[d] <= lo[d] + ACTIVE_TOL && h[d] < -DIRECTION_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Excess of `x` over the anchored set at `f0`: positive when `x` is
/// infeasible or some objective exceeds its anchor value.
fn anchored_excess(problem: &VectorProblem, x: &[f64], f0: &[f64]) -> Result<f64> {
    let mut excess = problem.max_violation(x)?;
    for (f, &cap) in problem.objectives().iter().zip(f0) {
        excess = excess.max(f.eval_unchecked(x) - cap);
    }
    Ok(excess)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeoffrionVerdict {
    Bounded,
    ExceedsCap,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeoffrionReport {
    /// Largest observed trade-off ratio (infinite when some improvement
    /// came at no measurable cost).
    pub m_hat: f64,
    pub cap: f64,
    /// Feasible sample points that improved some objective.
    pub improving_points: u64,
    pub verdict: GeoffrionVerdict,
}

/// Estimates the properness constant at `x0`: the worst, over sampled
/// feasible points improving some objective, of the best trade-off ratio
/// against the objectives that got worse. Samples a uniform grid plus
/// geometric refinements `x0 ± 10^-j (hi-lo)_d e_d`, which is where
/// improper points reveal themselves.
pub fn estimate_geoffrion(
    problem: &VectorProblem,
    x0: &[f64],
    resolution: usize,
    cap: f64,
) -> Result<GeoffrionReport> {
    let n = problem.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if cap <= 0.0 || cap.is_nan() {
        return Err(Error::InvalidConfig("cap must be positive".into()));
    }
    let violation = problem.max_violation(x0)?;
    if violation > ANCHOR_FEAS_TOL {
        return Err(Error::InfeasibleAnchor { violation });
    }
    if n > GRID_DIM_LIMIT {
        return Err(Error::DimensionTooLarge {
            max: GRID_DIM_LIMIT,
            got: n,
        });
    }
    if resolution < 2 {
        return Err(Error::InvalidConfig(
            "grid resolution must be at least 2".into(),
        ));
    }
    let total = (resolution as u64)
        .checked_pow(n as u32)
        .filter(|&p| p <= GRID_POINT_LIMIT)
        .ok_or(Error::GridTooLarge {
            points: (resolution as u128).pow(n as u32),
            limit: GRID_POINT_LIMIT,
        })?;

    let f0 = problem.objective_values(x0)?;
    let lo = problem.bounds().lo().to_vec();
    let hi = problem.bounds().hi().to_vec();
    let mut m_hat = 0.0f64;
    let mut improving_points = 0u64;

    let mut consider = |x: &[f64]| -> Result<()> {
        if !problem.is_feasible(x, 0.0)? {
            return Ok(());
        }
        let f: Vec<f64> = problem
            .objectives()
            .iter()
            .map(|o| o.eval_unchecked(x))
            .collect();
        let mut improved_any = false;
        for i in 0..f.len() {
            let gain = f0[i] - f[i];
            if gain <= RATIO_DENOM_TOL {
                continue;
            }
            improved_any = true;
            // Best ratio against any objective that pays for the gain.
            let mut best: f64 = f64::INFINITY;
            for (j, fj) in f.iter().enumerate() {
                if j == i {
                    continue;
                }
                let cost = fj - f0[j];
                if cost > RATIO_DENOM_TOL {
                    best = best.min(gain / cost);
                }
            }
            m_hat = m_hat.max(best);
        }
        if improved_any {
            improving_points += 1;
        }
        Ok(())
    };

    let mut x = vec![0.0; n];
    for flat in 0..total {
        let mut rest = flat;
        for d in 0..n {
            let idx = (rest % resolution as u64) as f64;
            rest /= resolution as u64;
            x[d] = lo[d] + idx / (resolution as f64 - 1.0) * (hi[d] - lo[d]);
        }
        consider(&x)?;
    }
    for d in 0..n {
        for j in GEOFFRION_REFINE {
            let h = 10f64.powi(-j) * (hi[d] - lo[d]);
            for sign in [1.0, -1.0] {
                let mut x = x0.to_vec();
                x[d] += sign * h;
                if x[d] >= lo[d] && x[d] <= hi[d] {
                    consider(&x)?;
                }
            }
        }
    }

    let verdict = if m_hat > cap {
        GeoffrionVerdict::ExceedsCap
    } else {
        GeoffrionVerdict::Bounded
    };
    Ok(GeoffrionReport {
        m_hat,
        cap,
        improving_points,
        verdict,
    })
}
