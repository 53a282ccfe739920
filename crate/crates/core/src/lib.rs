//! Pareto minimizers for convex vector optimization problems.
//!
//! The toolkit centers on the sum scalarization anchored at a feasible point:
//! minimize Σᵢ fᵢ(x) subject to fᵢ(x) ≤ fᵢ(x₀) and x ∈ X. An anchor is a
//! Pareto minimizer exactly when it is optimal for its own anchored
//! subproblem, which turns Pareto computation into a sequence of scalar
//! convex solves ([`cc1`]) and Pareto *verification* into a single solve or a
//! multiplier search ([`certify`]).
//!
//! Modules, bottom up:
//!
//! * [`expr`] — a small convex expression language (affine, quadratic,
//!   coordinate absolute values, max, nonnegative combinations) with exact
//!   subgradients, directional derivatives, and piecewise-linear lowering.
//! * [`problem`] — boxed vector problems and tolerance-aware dominance.
//! * [`scalarize`] — anchored-sum, proximal, and weighted-sum subproblems.
//! * [`solver`] — scalar backends behind a common trait: an exact dense
//!   simplex for piecewise-linear subproblems and a projected
//!   penalty–subgradient method (with a smooth polish) for the rest.
//! * [`cc1`] — the anchored-descent loop and seeded multi-start driver.
//! * [`certify`] — KKT-type certificates, a sampled regularity check, and a
//!   proper-efficiency (trade-off bound) estimator.
//! * [`oracle`] — a brute-force grid Pareto front for cross-validation.
//! * [`bench`] — named benchmark problems and seeded random instances.
//! * [`json`] — the JSON interchange schema for expressions and problems.

pub mod bench;
pub mod cc1;
pub mod certify;
pub mod expr;
pub mod json;
pub mod oracle;
pub mod problem;
pub mod scalarize;
pub mod solver;

mod error;

pub use error::{Error, Result};
pub use expr::{ConvexExpr, LinearPiece, PiecewiseLinearForm};
pub use problem::{BoxBounds, DominanceVerdict, VectorProblem};
pub use scalarize::{Provenance, ScalarSubproblem};
pub use solver::{SolveResult, SolveStatus, SolverConfig};
