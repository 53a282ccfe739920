//! Named benchmark problems.
//!
//! Four classic two-objective instances with known geometry, plus a seeded
//! generator of random strictly convex quadratic problems. Each named
//! problem carries its analytic facts (frontier identity, Pareto set
//! parameterization) so tests and reports can measure distance to truth.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expr::ConvexExpr;
use crate::problem::{BoxBounds, VectorProblem};
use crate::{Error, Result};

/// Analytic knowledge about a problem's Pareto set, where available.
#[derive(Debug, Clone)]
pub struct AnalyticFacts {
    /// Human-readable description of the Pareto set.
    pub pareto_description: &'static str,
    /// Residual on objective images that vanishes exactly on the frontier.
    pub frontier_residual: Option<fn(&[f64]) -> f64>,
    /// ∞-norm distance from a decision point to the analytic Pareto set.
    pub pareto_distance: Option<fn(&[f64]) -> f64>,
    /// Maps `t` in `[0, 1]` onto a decision-space Pareto point.
    pub pareto_param: Option<fn(f64) -> Vec<f64>>,
}

impl AnalyticFacts {
    fn unknown() -> Self {
        AnalyticFacts {
            pareto_description: "no closed form available",
            frontier_residual: None,
            pareto_distance: None,
            pareto_param: None,
        }
    }
}

/// A registered benchmark problem.
#[derive(Debug, Clone)]
pub struct NamedProblem {
    pub id: String,
    pub description: &'static str,
    pub problem: VectorProblem,
    pub facts: AnalyticFacts,
}

/// Ids of the built-in problems, in registry order.
pub fn builtin_ids() -> &'static [&'static str] {
    &["schaffer", "jahn", "binh", "maxabs"]
}

/// `(id, description)` rows for every registered problem family.
pub fn list() -> Vec<(&'static str, &'static str)> {
    let mut rows: Vec<(&'static str, &'static str)> = builtin_ids()
        .iter()
        .map(|id| (*id, get(id).expect("builtin").description))
        .collect();
    rows.push((
        "random-quadratic(seed,n,m)",
        "seeded random strictly convex quadratics |A_i x - b_i|^2 over [-10,10]^n",
    ));
    rows
}

/// Looks up a problem by id. Besides the four built-ins this accepts
/// parameterized ids of the form `random-quadratic(seed,n,m)`.
pub fn get(id: &str) -> Result<NamedProblem> {
    match id {
        "schaffer" => Ok(schaffer()),
        "jahn" => Ok(jahn()),
        "binh" => Ok(binh()),
        "maxabs" => Ok(maxabs()),
        other => {
            if let Some(args) = other
                .strip_prefix("random-quadratic(")
                .and_then(|rest| rest.strip_suffix(')'))
            {
                let parts: Vec<&str> = args.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(Error::InvalidProblemParams(
                        "expected random-quadratic(seed,n,m)".into(),
                    ));
                }
                let seed: u64 = parts[0]
                    .parse()
                    .map_err(|_| Error::InvalidProblemParams("seed must be an integer".into()))?;
                let n: usize = parts[1]
                    .parse()
                    .map_err(|_| Error::InvalidProblemParams("n must be an integer".into()))?;
                let m: usize = parts[2]
                    .parse()
                    .map_err(|_| Error::InvalidProblemParams("m must be an integer".into()))?;
                random_quadratic(seed, n, m)
            } else {
                Err(Error::UnknownProblem(other.to_string()))
            }
        }
    }
}

/// Two parabolas on a line: `(x², (x−2)²)` over `[-10, 10]`.
/// Pareto set `[0, 2]`; frontier identity `√f₁ + √f₂ = 2`.
fn schaffer() -> NamedProblem {
    let f1 = ConvexExpr::quadratic(vec![vec![1.0]], vec![0.0], 0.0).unwrap();
    let f2 = ConvexExpr::quadratic(vec![vec![1.0]], vec![-4.0], 4.0).unwrap();
    let bounds = BoxBounds::new(vec![-10.0], vec![10.0]).unwrap();
    NamedProblem {
        id: "schaffer".into(),
        description: "two shifted parabolas on a line; Pareto set [0, 2]",
        problem: VectorProblem::new(vec![f1, f2], vec![], bounds).unwrap(),
        facts: AnalyticFacts {
            pareto_description: "x in [0, 2]; frontier sqrt(f1) + sqrt(f2) = 2",
            frontier_residual: Some(|f| f[0].max(0.0).sqrt() + f[1].max(0.0).sqrt() - 2.0),
            pareto_distance: Some(|x| (-x[0]).max(x[0] - 2.0).max(0.0)),
            pareto_param: Some(|t| vec![2.0 * t.clamp(0.0, 1.0)]),
        },
    }
}

/// Coordinate objectives on the unit disk: `(x₁, x₂)` with `‖x‖² <= 1`,
/// box `[-1, 1]²`. Pareto set: the lower-left arc of the unit circle.
fn jahn() -> NamedProblem {
    let f1 = ConvexExpr::affine(vec![1.0, 0.0], 0.0).unwrap();
    let f2 = ConvexExpr::affine(vec![0.0, 1.0], 0.0).unwrap();
    let disk =
        ConvexExpr::quadratic(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0], -1.0).unwrap();
    let bounds = BoxBounds::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    NamedProblem {
        id: "jahn".into(),
        description: "coordinate objectives on the unit disk; Pareto set is the lower-left arc",
        problem: VectorProblem::new(vec![f1, f2], vec![disk], bounds).unwrap(),
        facts: AnalyticFacts {
            pareto_description: "arc {x : |x| = 1, x <= 0}; frontier f1^2 + f2^2 = 1 with f <= 0",
            frontier_residual: Some(|f| f[0] * f[0] + f[1] * f[1] - 1.0),
            pareto_distance: Some(|x| {
                if x[0] <= 0.0 && x[1] <= 0.0 {
                    ((x[0] * x[0] + x[1] * x[1]).sqrt() - 1.0).abs()
                } else {
                    let da = (x[0] + 1.0).abs().max(x[1].abs());
                    let db = x[0].abs().max((x[1] + 1.0).abs());
                    da.min(db)
                }
            }),
            pareto_param: Some(|t| {
                let theta = std::f64::consts::PI * (1.0 + 0.5 * t.clamp(0.0, 1.0));
                vec![theta.cos(), theta.sin()]
            }),
        },
    }
}

/// Two separated quadratic bowls: `(4‖x‖², ‖x − (5,5)‖²)` over `[-5, 10]²`.
/// Pareto set: the diagonal segment between the two minimizers.
fn binh() -> NamedProblem {
    let f1 =
        ConvexExpr::quadratic(vec![vec![4.0, 0.0], vec![0.0, 4.0]], vec![0.0, 0.0], 0.0).unwrap();
    let f2 = ConvexExpr::quadratic(
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![-10.0, -10.0],
        50.0,
    )
    .unwrap();
    let bounds = BoxBounds::new(vec![-5.0, -5.0], vec![10.0, 10.0]).unwrap();
    NamedProblem {
        id: "binh".into(),
        description: "two separated quadratic bowls; Pareto set {(t,t) : t in [0, 5]}",
        problem: VectorProblem::new(vec![f1, f2], vec![], bounds).unwrap(),
        facts: AnalyticFacts {
            pareto_description: "segment {(t, t) : t in [0, 5]}",
            frontier_residual: Some(|f| {
                let t = (f[0].max(0.0) / 8.0).sqrt();
                f[1] - 2.0 * (t - 5.0) * (t - 5.0)
            }),
            pareto_distance: Some(|x| segment_inf_distance(x, 0.0, 5.0)),
            pareto_param: Some(|t| {
                let s = 5.0 * t.clamp(0.0, 1.0);
                vec![s, s]
            }),
        },
    }
}

/// A genuinely nonsmooth pair: `(max(x₁, x₂), |x₁| + |x₂|)` over `[-2, 2]²`.
/// Pareto set: the diagonal segment `{(t,t) : t in [-2, 0]}`, with frontier
/// line `f₂ = -2·f₁` (established against the grid oracle at resolution 801;
/// see the tests below).
fn maxabs() -> NamedProblem {
    let f1 = ConvexExpr::max_of(vec![
        ConvexExpr::affine(vec![1.0, 0.0], 0.0).unwrap(),
        ConvexExpr::affine(vec![0.0, 1.0], 0.0).unwrap(),
    ])
    .unwrap();
    let f2 = ConvexExpr::sum_of(vec![
        ConvexExpr::abs_coord(2, 0).unwrap(),
        ConvexExpr::abs_coord(2, 1).unwrap(),
    ])
    .unwrap();
    let bounds = BoxBounds::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
    NamedProblem {
        id: "maxabs".into(),
        description: "max of coordinates vs l1 norm; Pareto set {(t,t) : t in [-2, 0]}",
        problem: VectorProblem::new(vec![f1, f2], vec![], bounds).unwrap(),
        facts: AnalyticFacts {
            pareto_description: "segment {(t, t) : t in [-2, 0]}; frontier f2 = -2 f1",
            frontier_residual: Some(|f| f[1] + 2.0 * f[0]),
            pareto_distance: Some(|x| segment_inf_distance(x, -2.0, 0.0)),
            pareto_param: Some(|t| {
                let s = -2.0 + 2.0 * t.clamp(0.0, 1.0);
                vec![s, s]
            }),
        },
    }
}

/// ∞-norm distance from a planar point to the diagonal segment
/// `{(t, t) : t in [t_lo, t_hi]}`.
fn segment_inf_distance(x: &[f64], t_lo: f64, t_hi: f64) -> f64 {
    let t = (0.5 * (x[0] + x[1])).clamp(t_lo, t_hi);
    (x[0] - t).abs().max((x[1] - t).abs())
}

/// Ranges accepted by [`random_quadratic`].
const RQ_N: std::ops::RangeInclusive<usize> = 1..=10;
const RQ_M: std::ops::RangeInclusive<usize> = 2..=5;

/// Generates `m` strictly convex quadratics `f_i(x) = ‖A_i x − b_i‖²` over
/// the box `[-10, 10]^n`, from a deterministic stream seeded by `seed`.
///
/// Each `A_i` is redrawn until `A_i'A_i` is safely positive definite, and
/// `b_i = A_i x̄_i` for a target `x̄_i` drawn inside `[-8, 8]^n`, so every
/// objective attains its unconstrained minimum strictly inside the box.
pub fn random_quadratic(seed: u64, n: usize, m: usize) -> Result<NamedProblem> {
    if !RQ_N.contains(&n) {
        return Err(Error::InvalidProblemParams(format!(
            "n must be in [{}, {}], got {n}",
            RQ_N.start(),
            RQ_N.end()
        )));
    }
    if !RQ_M.contains(&m) {
        return Err(Error::InvalidProblemParams(format!(
            "m must be in [{}, {}], got {m}",
            RQ_M.start(),
            RQ_M.end()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut objectives = Vec::with_capacity(m);
    for _ in 0..m {
        // Redraw until A'A is comfortably nonsingular.
        let a = loop {
            let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let gram = a.transpose() * &a;
            let min_eig = gram
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if min_eig >= 0.05 {
                break a;
            }
        };
        let target = DVector::from_fn(n, |_, _| rng.gen_range(-8.0..8.0));
        let b = &a * &target;
        // ‖Ax − b‖² = x'(A'A)x − 2(A'b)'x + ‖b‖².
        let gram = a.transpose() * &a;
        let q: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| gram[(i, j)]).collect())
            .collect();
        let linear: Vec<f64> = {
            let atb = a.transpose() * &b;
            (0..n).map(|i| -2.0 * atb[i]).collect()
        };
        let offset = b.dot(&b);
        objectives.push(ConvexExpr::quadratic(q, linear, offset)?);
    }
    let bounds = BoxBounds::new(vec![-10.0; n], vec![10.0; n])?;
    Ok(NamedProblem {
        id: format!("random-quadratic({seed},{n},{m})"),
        description: "seeded random strictly convex quadratics |A_i x - b_i|^2 over [-10,10]^n",
        problem: VectorProblem::new(objectives, vec![], bounds)?,
        facts: AnalyticFacts::unknown(),
    })
}
