//! Brute-force frontier oracle.
//!
//! Enumerates a uniform grid over the box, keeps the feasible points, and
//! filters out every dominated image. Exponential in the dimension — hard
//! limits keep it honest — but completely independent of the solvers, which
//! is the point: it is the reference the iterative machinery is judged
//! against in the tests.

use serde::Serialize;

use crate::expr::ConvexExpr;
use crate::problem::{BoxBounds, VectorProblem};
use crate::{Error, Result};

/// The oracle refuses to run above this dimension.
pub const GRID_DIM_LIMIT: usize = 3;
/// ... or above this many grid points.
pub const GRID_POINT_LIMIT: u64 = 10_000_000;

/// One surviving grid point with its image.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierEntry {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

/// A nondominated set sampled on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct FrontierSet {
    resolution: usize,
    points: Vec<FrontierEntry>,
}

impl FrontierSet {
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Surviving entries, in grid enumeration order.
    pub fn points(&self) -> &[FrontierEntry] {
        &self.points
    }

    /// CSV with header `x_1,..,x_n,f_1,..,f_m`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(first) = self.points.first() {
            let mut cols = Vec::new();
            for d in 1..=first.x.len() {
                cols.push(format!("x_{d}"));
            }
            for i in 1..=first.f.len() {
                cols.push(format!("f_{i}"));
            }
            out.push_str(&cols.join(","));
            out.push('\n');
        }
        for p in &self.points {
            let row: Vec<String> =
                p.x.iter()
                    .chain(p.f.iter())
                    .map(|v| format!("{v}"))
                    .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Grid frontier of a vector problem (at least two objectives).
pub fn grid_pareto(problem: &VectorProblem, resolution: usize) -> Result<FrontierSet> {
    grid_front(
        problem.objectives(),
        problem.constraints(),
        problem.bounds(),
        resolution,
    )
}

/// Lower-level entry point that also accepts a single objective, in which
/// case the frontier degenerates to the set of grid minimizers.
pub fn grid_front(
    objectives: &[ConvexExpr],
    constraints: &[ConvexExpr],
    bounds: &BoxBounds,
    resolution: usize,
) -> Result<FrontierSet> {
    if objectives.is_empty() {
        return Err(Error::EmptyExprList);
    }
    let n = bounds.dim();
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
        .filter(|&p| p <= GRID_POINT_LIMIT);
    let total = match total {
        Some(t) => t,
        None => {
            return Err(Error::GridTooLarge {
                points: (resolution as u128).pow(n as u32),
                limit: GRID_POINT_LIMIT,
            })
        }
    };
    for e in objectives.iter().chain(constraints) {
        if e.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: e.dim(),
            });
        }
    }

    let lo = bounds.lo();
    let hi = bounds.hi();
    let mut feasible: Vec<FrontierEntry> = Vec::new();
    let mut x = vec![0.0; n];
    'outer: for flat in 0..total {
        let mut rest = flat;
        for d in 0..n {
            let idx = (rest % resolution as u64) as f64;
            rest /= resolution as u64;
            let frac = idx / (resolution as f64 - 1.0);
            x[d] = lo[d] + frac * (hi[d] - lo[d]);
        }
        for g in constraints {
            if g.eval_unchecked(&x) > 0.0 {
                continue 'outer;
            }
        }
        let f: Vec<f64> = objectives.iter().map(|o| o.eval_unchecked(&x)).collect();
        feasible.push(FrontierEntry { x: x.clone(), f });
    }

    let keep = nondominated_mask(&feasible);
    let points = feasible
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect();
    Ok(FrontierSet { resolution, points })
}

/// Marks nondominated images. Ties are kept: a point is removed only when
/// another point is at least as good everywhere and strictly better
/// somewhere. Two objectives get an `O(N log N)` sort-and-sweep; the
/// general case falls back to pairwise comparison.
fn nondominated_mask(entries: &[FrontierEntry]) -> Vec<bool> {
    let n = entries.len();
    if n == 0 {
        return Vec::new();
    }
    if entries[0].f.len() == 2 {
        return sweep_mask_2d(entries);
    }
    let mut keep = vec![true; n];
    for i in 0..n {
        if !keep[i] {
            continue;
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            if dominates(&entries[j].f, &entries[i].f) {
                keep[i] = false;
                break;
            }
        }
    }
    keep
}

/// `a` dominates `b`: no worse anywhere, strictly better somewhere.
fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (av, bv) in a.iter().zip(b) {
        if av > bv {
            return false;
        }
        if av < bv {
            strict = true;
        }
    }
    strict
}

fn sweep_mask_2d(entries: &[FrontierEntry]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| {
        entries[a].f[0]
            .total_cmp(&entries[b].f[0])
            .then(entries[a].f[1].total_cmp(&entries[b].f[1]))
            .then(a.cmp(&b))
    });
    let mut keep = vec![true; entries.len()];
    // Best second coordinate among points with strictly smaller first
    // coordinate, and within the current group of equal first coordinates.
    let mut before_group = f64::INFINITY;
    let mut group_f0 = f64::NEG_INFINITY;
    let mut group_min_f1 = f64::INFINITY;
    for &i in &order {
        let (f0, f1) = (entries[i].f[0], entries[i].f[1]);
        if f0 > group_f0 {
            before_group = before_group.min(group_min_f1);
            group_f0 = f0;
            group_min_f1 = f64::INFINITY;
        }
        // Dominated by an earlier column (strict in f0, no worse in f1) or
        // by a same-column point that is strictly better in f1.
        if before_group <= f1 || group_min_f1 < f1 {
            keep[i] = false;
        }
        group_min_f1 = group_min_f1.min(f1);
    }
    keep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;

    #[test]
    fn schaffer_grid_front_is_exactly_the_pareto_segment() {
        let p = bench::get("schaffer").unwrap().problem;
        // Resolution 401 over [-10, 10] steps by 0.05 and hits 0 and 2
        // exactly, so the survivors are precisely the 41 points in [0, 2].
        let front = grid_pareto(&p, 401).unwrap();
        assert_eq!(front.points().len(), 41);
        let xs: Vec<f64> = front.points().iter().map(|p| p.x[0]).collect();
        assert_eq!(xs.first().copied(), Some(0.0));
        assert_eq!(xs.last().copied(), Some(2.0));
        assert!(
            xs.windows(2).all(|w| w[0] < w[1]),
            "enumeration order preserved"
        );
        let fact = bench::get("schaffer")
            .unwrap()
            .facts
            .frontier_residual
            .unwrap();
        for entry in front.points() {
            assert!(fact(&entry.f).abs() <= 1e-12);
        }
    }

    #[test]
    fn jahn_grid_front_hugs_the_arc() {
        let p = bench::get("jahn").unwrap().problem;
        let front = grid_pareto(&p, 201).unwrap();
        let step = 2.0 / 200.0;
        assert!(!front.points().is_empty());
        for entry in front.points() {
            assert!(entry.x[0] <= 0.0 && entry.x[1] <= 0.0, "{:?}", entry.x);
            let r = (entry.x[0].powi(2) + entry.x[1].powi(2)).sqrt();
            assert!(r <= 1.0 + 1e-12 && r >= 1.0 - 2.0 * step, "radius {r}");
        }
    }

    #[test]
    fn equal_images_are_all_kept() {
        // f1 is constant and f2 is flat on a band, so the whole band is one
        // big tie and every point of it must survive.
        let f1 = ConvexExpr::constant(1, 1.0).unwrap();
        let f2 = ConvexExpr::max_of(vec![
            ConvexExpr::affine(vec![1.0], -0.5).unwrap(),
            ConvexExpr::affine(vec![-1.0], -0.5).unwrap(),
            ConvexExpr::constant(1, 0.0).unwrap(),
        ])
        .unwrap();
        let bounds = BoxBounds::new(vec![-1.0], vec![1.0]).unwrap();
        let front = grid_front(&[f1, f2], &[], &bounds, 21).unwrap();
        // Band |x| <= 0.5 at resolution 21 (step 0.1): 11 points.
        assert_eq!(front.points().len(), 11);
        assert!(front.points().iter().all(|p| p.f == vec![1.0, 0.0]));
    }

    #[test]
    fn single_objective_front_degenerates_to_the_minimizer() {
        let f = ConvexExpr::quadratic(vec![vec![1.0]], vec![0.0], 0.0).unwrap();
        let bounds = BoxBounds::new(vec![-1.0], vec![1.0]).unwrap();
        let front = grid_front(&[f], &[], &bounds, 21).unwrap();
        assert_eq!(front.points().len(), 1);
        assert_eq!(front.points()[0].x, vec![0.0]);
    }

    #[test]
    fn sweep_and_pairwise_filters_agree() {
        let images = [
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            vec![1.0, 2.0],
            vec![2.0, 1.0],
            vec![1.0, 1.0],
            vec![0.5, 3.0],
        ];
        let entries: Vec<FrontierEntry> = images
            .iter()
            .map(|f| FrontierEntry {
                x: vec![0.0],
                f: f.clone(),
            })
            .collect();
        let sweep = sweep_mask_2d(&entries);
        let mut pairwise = vec![true; entries.len()];
        for i in 0..entries.len() {
            pairwise[i] = !entries
                .iter()
                .enumerate()
                .any(|(j, e)| j != i && dominates(&e.f, &entries[i].f));
        }
        assert_eq!(sweep, pairwise);
        // The duplicate optimum survives twice; the off-frontier points go.
        assert_eq!(sweep, vec![true, false, false, false, true, true]);
    }

    #[test]
    fn three_objective_filtering_works_pairwise() {
        let f1 = ConvexExpr::affine(vec![1.0], 0.0).unwrap();
        let f2 = ConvexExpr::affine(vec![-1.0], 0.0).unwrap();
        let f3 = ConvexExpr::quadratic(vec![vec![1.0]], vec![0.0], 0.0).unwrap();
        let bounds = BoxBounds::new(vec![-1.0], vec![1.0]).unwrap();
        let front = grid_front(&[f1, f2, f3], &[], &bounds, 11).unwrap();
        // f1 and f2 oppose each other, so nothing dominates anything.
        assert_eq!(front.points().len(), 11);
    }

    #[test]
    fn limits_are_enforced() {
        let p = bench::get("jahn").unwrap().problem;
        assert!(matches!(
            grid_pareto(&p, 4000),
            Err(Error::GridTooLarge { .. })
        ));
        assert!(matches!(grid_pareto(&p, 1), Err(Error::InvalidConfig(_))));
        let big = bench::get("random-quadratic(0,4,2)").unwrap().problem;
        assert!(matches!(
            grid_pareto(&big, 10),
            Err(Error::DimensionTooLarge { .. })
        ));
    }
}
