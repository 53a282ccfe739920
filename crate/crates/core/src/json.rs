//! JSON problem definitions.
//!
//! A small tagged schema for loading problems from files:
//!
//! ```json
//! {
//!   "objectives": [
//!     { "kind": "quadratic", "q": [[1.0]], "linear": [0.0], "offset": 0.0 },
//!     { "kind": "quadratic", "q": [[1.0]], "linear": [-4.0], "offset": 4.0 }
//!   ],
//!   "constraints": [],
//!   "bounds": { "lo": [-10.0], "hi": [10.0] }
//! }
//! ```
//!
//! Deserialization only parses; [`ProblemJson::build`] routes everything
//! through the expression constructors, so a parsed file is still subject
//! to the same convexity and dimension checks as code-built problems.

use serde::{Deserialize, Serialize};

use crate::expr::ConvexExpr;
use crate::problem::{BoxBounds, VectorProblem};
use crate::{Error, Result};

/// One expression node.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExprJson {
    /// Constant `value` on `n` variables.
    Constant { n: usize, value: f64 },
    /// `coeffs . x + offset`.
    Affine { coeffs: Vec<f64>, offset: f64 },
    /// `x' Q x + linear . x + offset` with `Q` positive semidefinite.
    Quadratic {
        q: Vec<Vec<f64>>,
        linear: Vec<f64>,
        offset: f64,
    },
    /// `|x_index|` on `n` variables.
    Abs { n: usize, index: usize },
    /// Pointwise maximum of smooth children.
    Max { children: Vec<ExprJson> },
    /// Sum of children.
    Sum { children: Vec<ExprJson> },
    /// `factor * child` with `factor >= 0`.
    Scale { factor: f64, child: Box<ExprJson> },
}

impl ExprJson {
    /// Builds the expression, validating exactly as the constructors do.
    pub fn build(&self) -> Result<ConvexExpr> {
        match self {
            ExprJson::Constant { n, value } => ConvexExpr::constant(*n, *value),
            ExprJson::Affine { coeffs, offset } => ConvexExpr::affine(coeffs.clone(), *offset),
            ExprJson::Quadratic { q, linear, offset } => {
                ConvexExpr::quadratic(q.clone(), linear.clone(), *offset)
            }
            ExprJson::Abs { n, index } => ConvexExpr::abs_coord(*n, *index),
            ExprJson::Max { children } => {
                let built: Result<Vec<_>> = children.iter().map(ExprJson::build).collect();
                ConvexExpr::max_of(built?)
            }
            ExprJson::Sum { children } => {
                let built: Result<Vec<_>> = children.iter().map(ExprJson::build).collect();
                ConvexExpr::sum_of(built?)
            }
            ExprJson::Scale { factor, child } => ConvexExpr::scaled(*factor, child.build()?),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsJson {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// A whole vector problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemJson {
    pub objectives: Vec<ExprJson>,
    #[serde(default)]
    pub constraints: Vec<ExprJson>,
    pub bounds: BoundsJson,
}

impl ProblemJson {
    /// Parses the JSON text (schema errors become [`Error::InvalidSchema`]).
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSchema(e.to_string()))
    }

    /// Builds the vector problem, running all constructor validation.
    pub fn build(&self) -> Result<VectorProblem> {
        let objectives: Result<Vec<_>> = self.objectives.iter().map(ExprJson::build).collect();
        let constraints: Result<Vec<_>> = self.constraints.iter().map(ExprJson::build).collect();
        let bounds = BoxBounds::new(self.bounds.lo.clone(), self.bounds.hi.clone())?;
        VectorProblem::new(objectives?, constraints?, bounds)
    }
}
