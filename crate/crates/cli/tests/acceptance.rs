//! Acceptance suite: each test exercises one numbered criterion end to end
//! and prints a single `criterion N (...): pass` line (visible with
//! `--nocapture`). The 200-start experiments are shared between criteria
//! through lazily initialized statics, so the suite stays fast.

use std::panic::{catch_unwind, UnwindSafe};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use cc_pareto::bench;
use cc_pareto::cc1::{self, CC1Config, CC1Trace};
use cc_pareto::certify::{self, AbadieVerdict, GeoffrionVerdict, KktMode, KktVerdict};
use cc_pareto::oracle::{self, FrontierSet};
use cc_pareto::scalarize;
use cc_pareto::solver::{self, BackendChoice, SolverConfig};
use cc_pareto::{BoxBounds, ConvexExpr, Provenance, ScalarSubproblem, SolveStatus, VectorProblem};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;
const STARTS: usize = 200;

/// Runs one criterion body and prints its pass/fail line.
fn criterion(n: u32, label: &str, body: impl FnOnce() + UnwindSafe) {
    match catch_unwind(body) {
        Ok(()) => println!("criterion {n} ({label}): pass"),
        Err(panic) => {
            println!("criterion {n} ({label}): fail");
            std::panic::resume_unwind(panic);
        }
    }
}

struct Experiment {
    traces: Vec<CC1Trace>,
    elapsed: Duration,
}

static SCHAFFER_RUNS: OnceLock<Experiment> = OnceLock::new();
static JAHN_RUNS: OnceLock<Experiment> = OnceLock::new();
static BINH_RUNS: OnceLock<Experiment> = OnceLock::new();
static MAXABS_RUNS: OnceLock<Experiment> = OnceLock::new();

/// The shared 200-start experiment for one builtin, run once per process.
/// The nonsmooth problem runs on the exact simplex backend; the smooth
/// problems keep the default auto routing.
fn experiment(id: &str) -> &'static Experiment {
    let slot = match id {
        "schaffer" => &SCHAFFER_RUNS,
        "jahn" => &JAHN_RUNS,
        "binh" => &BINH_RUNS,
        "maxabs" => &MAXABS_RUNS,
        other => panic!("no experiment slot for {other}"),
    };
    slot.get_or_init(|| {
        let named = bench::get(id).expect("builtin id");
        let mut cfg = CC1Config::default();
        if id == "maxabs" {
            cfg.solver.backend = BackendChoice::Lp;
        }
        let begin = Instant::now();
        let runs = cc1::multi_start(&named.problem, STARTS, SEED, &cfg).expect("valid config");
        let elapsed = begin.elapsed();
        let traces: Vec<CC1Trace> = runs
            .into_iter()
            .collect::<cc_pareto::Result<_>>()
            .expect("every start runs");
        Experiment { traces, elapsed }
    })
}

static SCHAFFER_FRONT: OnceLock<FrontierSet> = OnceLock::new();
static JAHN_FRONT: OnceLock<FrontierSet> = OnceLock::new();
static BINH_FRONT: OnceLock<FrontierSet> = OnceLock::new();
static MAXABS_FRONT: OnceLock<FrontierSet> = OnceLock::new();

/// Shared grid frontier at resolution 401 for one builtin.
fn oracle_front(id: &str) -> &'static FrontierSet {
    let slot = match id {
        "schaffer" => &SCHAFFER_FRONT,
        "jahn" => &JAHN_FRONT,
        "binh" => &BINH_FRONT,
        "maxabs" => &MAXABS_FRONT,
        other => panic!("no frontier slot for {other}"),
    };
    slot.get_or_init(|| {
        oracle::grid_pareto(&bench::get(id).unwrap().problem, 401).expect("grid within limits")
    })
}

fn converged(exp: &Experiment) -> Vec<&CC1Trace> {
    exp.traces
        .iter()
        .filter(|t| t.termination.converged())
        .collect()
}

/// True when no oracle image improves on `f` by more than `margin` in
/// every coordinate.
fn no_oracle_point_dominates(front: &FrontierSet, f: &[f64], margin: f64) -> bool {
    !front
        .points()
        .iter()
        .any(|entry| entry.f.iter().zip(f).all(|(a, b)| *a < b - margin))
}

fn some_oracle_point_dominates(front: &FrontierSet, f: &[f64], margin: f64) -> bool {
    front
        .points()
        .iter()
        .any(|entry| entry.f.iter().zip(f).all(|(a, b)| *a < b - margin))
}

/// Strictly inside the box and every explicit constraint at least `margin`
/// below its bound.
fn strictly_interior(problem: &VectorProblem, x: &[f64], margin: f64) -> bool {
    let lo = problem.bounds().lo();
    let hi = problem.bounds().hi();
    let in_box = x
        .iter()
        .zip(lo.iter().zip(hi))
        .all(|(v, (l, h))| *v >= l + margin && *v <= h - margin);
    in_box
        && problem
            .constraints()
            .iter()
            .all(|g| g.eval(x).expect("dimension matches") <= -margin)
}

#[test]
fn criterion_1_schaffer_reproduction() {
    criterion(1, "schaffer frontier, 200 starts", || {
        let exp = experiment("schaffer");
        assert!(
            exp.elapsed <= Duration::from_secs(60),
            "experiment took {:?}",
            exp.elapsed
        );
        let done = converged(exp);
        assert!(
            done.len() >= 199,
            "only {} of {STARTS} converged",
            done.len()
        );
        for trace in done {
            let x = trace.final_x[0];
            assert!(
                (-1e-4..=2.0 + 1e-4).contains(&x),
                "final x {x} left the Pareto interval"
            );
            let residual =
                (trace.final_f[0].max(0.0).sqrt() + trace.final_f[1].max(0.0).sqrt() - 2.0).abs();
            assert!(residual <= 1e-3, "frontier residual {residual} at x {x}");
        }
    });
}

#[test]
fn criterion_2_disk_reproduction() {
    criterion(2, "unit-disk frontier, 200 starts", || {
        let exp = experiment("jahn");
        assert!(
            exp.elapsed <= Duration::from_secs(120),
            "experiment took {:?}",
            exp.elapsed
        );
        let done = converged(exp);
        assert!(!done.is_empty(), "no run converged");
        for trace in done {
            let f = &trace.final_f;
            let residual = (f[0] * f[0] + f[1] * f[1] - 1.0).abs();
            assert!(residual <= 1e-3, "arc residual {residual} at f {f:?}");
            assert!(
                f[0] <= 1e-4 && f[1] <= 1e-4,
                "final image {f:?} not in the third quadrant"
            );
        }
    });
}

#[test]
fn criterion_3_bowls_reproduction() {
    criterion(3, "separated-bowls frontier, 200 starts", || {
        let exp = experiment("binh");
        assert!(
            exp.elapsed <= Duration::from_secs(120),
            "experiment took {:?}",
            exp.elapsed
        );
        let distance = bench::get("binh").unwrap().facts.pareto_distance.unwrap();
        let done = converged(exp);
        assert!(!done.is_empty(), "no run converged");
        for trace in done {
            let d = distance(&trace.final_x);
            assert!(
                d <= 1e-3,
                "final {:?} is {d} away from the segment",
                trace.final_x
            );
        }
    });
}

#[test]
fn criterion_4_nonsmooth_reproduction() {
    criterion(
        4,
        "nonsmooth frontier on the exact backend, 200 starts",
        || {
            let exp = experiment("maxabs");
            assert!(
                exp.elapsed <= Duration::from_secs(60),
                "experiment took {:?}",
                exp.elapsed
            );
            let distance = bench::get("maxabs").unwrap().facts.pareto_distance.unwrap();
            for trace in &exp.traces {
                let d = distance(&trace.final_x);
                assert!(
                    d <= 1e-6,
                    "final {:?} is {d} away from the segment",
                    trace.final_x
                );
                let residual = (trace.final_f[1] + 2.0 * trace.final_f[0]).abs();
                assert!(residual <= 1e-6, "frontier residual {residual}");
            }
        },
    );
}

#[test]
fn criterion_5_anchored_value_equivalence() {
    criterion(5, "anchored-sum value equivalence", || {
        let cfg = SolverConfig::default();
        for id in bench::builtin_ids() {
            let named = bench::get(id).unwrap();
            let front = oracle_front(id);
            let param = named.facts.pareto_param.unwrap();

            // 50 analytic Pareto anchors, each consistent with the oracle:
            // the anchored subproblem cannot improve on the anchor sum.
            for j in 0..50 {
                let x0 = param(j as f64 / 49.0);
                let f0 = named.problem.objective_values(&x0).unwrap();
                assert!(
                    no_oracle_point_dominates(front, &f0, 1e-5),
                    "{id}: oracle refutes Pareto anchor {x0:?}"
                );
                let anchor_sum: f64 = f0.iter().sum();
                let sub = scalarize::charnes_cooper(&named.problem, &x0).unwrap();
                let res = solver::solve(&sub, &cfg, Some(&x0)).unwrap();
                assert!(
                    (res.value - anchor_sum).abs() <= 1e-5,
                    "{id}: anchor {x0:?} sum {anchor_sum} but solver found {}",
                    res.value
                );
            }

            // 50 oracle-certified dominated interior anchors: the anchored
            // subproblem must improve by a clear margin.
            let mut found = 0;
            let mut stream = 0u64;
            while found < 50 {
                assert!(
                    stream < 20_000,
                    "{id}: ran out of dominated interior samples"
                );
                let x0 = cc1::sample_feasible(&named.problem, 2024, stream).unwrap();
                stream += 1;
                if !strictly_interior(&named.problem, &x0, 1e-3) {
                    continue;
                }
                let f0 = named.problem.objective_values(&x0).unwrap();
                if !some_oracle_point_dominates(front, &f0, 1e-3) {
                    continue;
                }
                let anchor_sum: f64 = f0.iter().sum();
                let sub = scalarize::charnes_cooper(&named.problem, &x0).unwrap();
                let res = solver::solve(&sub, &cfg, Some(&x0)).unwrap();
                assert!(
                    res.value < anchor_sum - 1e-3,
                    "{id}: dominated anchor {x0:?} sum {anchor_sum} only reached {}",
                    res.value
                );
                found += 1;
            }
        }
    });
}

#[test]
fn criterion_6_monotone_traces_consistent_with_oracle() {
    criterion(
        6,
        "componentwise monotonicity and oracle consistency",
        || {
            for id in bench::builtin_ids() {
                let exp = experiment(id);
                let front = oracle_front(id);
                for trace in &exp.traces {
                    let slack = trace.max_componentwise_increase();
                    assert!(
                        slack <= 1e-8,
                        "{id}: objective increased by {slack} along a trace"
                    );
                    assert!(
                        no_oracle_point_dominates(front, &trace.final_f, 1e-5),
                        "{id}: oracle dominates final image {:?}",
                        trace.final_f
                    );
                }
            }
        },
    );
}

#[test]
fn criterion_7_certification_triangle() {
    criterion(
        7,
        "certification checks agree on the two-parabola problem",
        || {
            let p = bench::get("schaffer").unwrap().problem;

            let cert = certify::kkt_certificate(&p, &[1.0], KktMode::Strong).unwrap();
            assert_eq!(cert.verdict, KktVerdict::Certified);
            assert!(
                cert.stationarity_residual <= 1e-8,
                "residual {}",
                cert.stationarity_residual
            );

            let cert0 = certify::kkt_certificate(&p, &[0.0], KktMode::Strong).unwrap();
            assert_eq!(cert0.verdict, KktVerdict::NoMultipliersFound);

            let ab = certify::check_abadie(&p, &[0.0], 32, 11).unwrap();
            assert_eq!(ab.verdict, AbadieVerdict::FailsWithWitness);
            let witness = ab.witness.expect("failure carries a witness");
            assert!(
                witness.direction[0] > 0.0,
                "witness {:?}",
                witness.direction
            );

            // Two textbook regularity instances, one smooth and one not, hold
            // on the sampled cone.
            for (problem, point) in [
                (smooth_regularity_example(), [0.0]),
                (nonsmooth_regularity_example(), [0.0]),
            ] {
                let rep = certify::check_abadie(&problem, &point, 32, 11).unwrap();
                assert_eq!(rep.verdict, AbadieVerdict::HoldsOnSample);
            }

            let proper = certify::estimate_geoffrion(&p, &[1.0], 100_000, 1e6).unwrap();
            assert_eq!(proper.verdict, GeoffrionVerdict::Bounded);
            assert!(
                (0.9..=1.1).contains(&proper.m_hat),
                "trade-off bound {}",
                proper.m_hat
            );
            let improper = certify::estimate_geoffrion(&p, &[0.0], 100_000, 1e6).unwrap();
            assert_eq!(improper.verdict, GeoffrionVerdict::ExceedsCap);
        },
    );
}

/// `(x², x)` with the single constraint `-x <= 0`: the anchored set at the
/// origin is `{0}`, and so is the linearized cone.
fn smooth_regularity_example() -> VectorProblem {
    let f1 = ConvexExpr::quadratic(vec![vec![1.0]], vec![0.0], 0.0).unwrap();
    let f2 = ConvexExpr::affine(vec![1.0], 0.0).unwrap();
    let g = ConvexExpr::affine(vec![-1.0], 0.0).unwrap();
    let bounds = BoxBounds::new(vec![-1.0], vec![1.0]).unwrap();
    VectorProblem::new(vec![f1, f2], vec![g], bounds).unwrap()
}

/// `(x, |x|)` unconstrained: both the anchored set and the cone at the
/// origin collapse to `{0}` through the nonsmooth second objective.
fn nonsmooth_regularity_example() -> VectorProblem {
    let f1 = ConvexExpr::affine(vec![1.0], 0.0).unwrap();
    let f2 = ConvexExpr::abs_coord(1, 0).unwrap();
    let bounds = BoxBounds::new(vec![-1.0], vec![1.0]).unwrap();
    VectorProblem::new(vec![f1, f2], vec![], bounds).unwrap()
}

#[test]
fn criterion_8_solver_cross_validation() {
    criterion(
        8,
        "backends agree with exhaustive vertex enumeration",
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let lp_cfg = SolverConfig {
                backend: BackendChoice::Lp,
                ..SolverConfig::default()
            };
            let pen_cfg = SolverConfig {
                backend: BackendChoice::PenaltySubgradient,
                ..SolverConfig::default()
            };
            for case in 0..100 {
                let sub = random_pl_subproblem(&mut rng, case);
                let lp = solver::solve(&sub, &lp_cfg, None).unwrap();
                assert_eq!(lp.status, SolveStatus::Optimal, "case {case}");
                let pen = solver::solve(&sub, &pen_cfg, None).unwrap();
                assert!(
                    (pen.value - lp.value).abs() <= 1e-3,
                    "case {case}: penalty {} vs simplex {}",
                    pen.value,
                    lp.value
                );
                let brute = vertex_enumeration_minimum(&sub);
                assert!(
                    (lp.value - brute).abs() <= 1e-9,
                    "case {case}: simplex {} vs enumeration {}",
                    lp.value,
                    brute
                );
            }
        },
    );
}

/// A random piecewise-linear subproblem: a max-affine objective, up to two
/// max-affine constraints calibrated to keep a known point strictly
/// feasible, and a box around the origin. Dimension cycles through 1..=3.
fn random_pl_subproblem(rng: &mut ChaCha8Rng, case: usize) -> ScalarSubproblem {
    let n = 1 + case % 3;
    let lo: Vec<f64> = (0..n).map(|_| -1.5 - rng.gen_range(0.0..0.5)).collect();
    let hi: Vec<f64> = (0..n).map(|_| 1.5 + rng.gen_range(0.0..0.5)).collect();
    let bounds = BoxBounds::new(lo, hi).unwrap();
    let objective = random_max_affine(rng, n, 2 + case % 3);
    let witness: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let constraints: Vec<ConvexExpr> = (0..case % 3)
        .map(|_| {
            let g = random_max_affine(rng, n, 2);
            let slack = g.eval(&witness).unwrap() + 0.2;
            g.shifted(-slack).unwrap()
        })
        .collect();
    ScalarSubproblem {
        objective,
        constraints,
        bounds,
        provenance: Provenance::WeightedSum,
        anchor: None,
    }
}

fn random_max_affine(rng: &mut ChaCha8Rng, n: usize, pieces: usize) -> ConvexExpr {
    let children: Vec<ConvexExpr> = (0..pieces)
        .map(|_| {
            let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            ConvexExpr::affine(coeffs, rng.gen_range(-0.5..0.5)).unwrap()
        })
        .collect();
    ConvexExpr::max_of(children).unwrap()
}

/// Exhaustive reference for the epigraph program `min t` over
/// `{(x, t) : F_piece(x) <= t, g_piece(x) <= 0, x in box}`: solve every
/// candidate basis of `n+1` tight rows directly, keep the solutions that
/// satisfy all rows, and take the best exact objective value among them.
/// The box keeps `x` compact and the objective rows bound `t` from below,
/// so the polyhedron is pointed and the minimum sits at a vertex.
fn vertex_enumeration_minimum(sub: &ScalarSubproblem) -> f64 {
    let n = sub.dim();
    let vars = n + 1;
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new(); // a . z <= b
    let objective = sub
        .objective
        .to_piecewise_linear()
        .expect("piecewise-linear objective");
    for piece in objective.pieces() {
        let mut a = piece.gradient.clone();
        a.push(-1.0);
        rows.push((a, -piece.offset));
    }
    for g in &sub.constraints {
        let form = g
            .to_piecewise_linear()
            .expect("piecewise-linear constraint");
        for piece in form.pieces() {
            let mut a = piece.gradient.clone();
            a.push(0.0);
            rows.push((a, -piece.offset));
        }
    }
    for d in 0..n {
        let mut up = vec![0.0; vars];
        up[d] = 1.0;
        rows.push((up, sub.bounds.hi()[d]));
        let mut down = vec![0.0; vars];
        down[d] = -1.0;
        rows.push((down, -sub.bounds.lo()[d]));
    }

    let mut best = f64::INFINITY;
    for subset in combinations(rows.len(), vars) {
        let a = DMatrix::from_fn(vars, vars, |r, c| rows[subset[r]].0[c]);
        let b = DVector::from_fn(vars, |r, _| rows[subset[r]].1);
        let Some(z) = a.lu().solve(&b) else { continue };
        let feasible = rows.iter().all(|(coeffs, rhs)| {
            let lhs: f64 = coeffs.iter().zip(z.iter()).map(|(c, v)| c * v).sum();
            lhs <= rhs + 1e-9
        });
        if feasible {
            let x: Vec<f64> = z.iter().take(n).copied().collect();
            best = best.min(sub.objective.eval(&x).unwrap());
        }
    }
    assert!(best.is_finite(), "no feasible vertex found");
    best
}

/// All size-`k` index subsets of `0..n`, in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

#[test]
fn criterion_9_csv_determinism() {
    criterion(9, "seeded experiments give byte-identical CSV", || {
        let dir = tempfile::tempdir().unwrap();
        let first = dir.path().join("a.csv");
        let second = dir.path().join("b.csv");
        for path in [&first, &second] {
            let status = Command::new(env!("CARGO_BIN_EXE_cc-pareto"))
                .args([
                    "frontier",
                    "--problem",
                    "schaffer",
                    "--starts",
                    "200",
                    "--seed",
                    "42",
                ])
                .arg("--out")
                .arg(path)
                .status()
                .expect("binary runs");
            assert!(status.success());
        }
        let a = std::fs::read(&first).unwrap();
        let b = std::fs::read(&second).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "same flags and seed must give identical bytes");
        assert!(a.starts_with(b"start_x_1,start_f_1,start_f_2,x_1,f_1,f_2,iters,status\n"));
    });
}
