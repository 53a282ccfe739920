//! A small convex expression language.
//!
//! Expressions are trees over a fixed decision dimension `n`. The node kinds
//! are chosen so that convexity is guaranteed *by construction*: constants,
//! affine forms, PSD quadratic forms, coordinate absolute values, pointwise
//! maxima of smooth (constant/affine/quadratic) children, sums, and
//! nonnegative scalings. Every expression supports exact evaluation, an exact
//! subgradient selection, one-sided directional derivatives, and — when no
//! quadratic node is present — lowering to an explicit max-of-affine form
//! that the LP backend can solve exactly.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Hard cap on the number of pieces [`ConvexExpr::to_piecewise_linear`] will
/// distribute before treating the expression as not practically lowerable.
const PIECE_LIMIT: usize = 100_000;

/// Hard cap on the subdifferential generator sets built by
/// [`ConvexExpr::subdifferential_generators`].
const GENERATOR_LIMIT: usize = 4096;

/// A convex function of a fixed number of decision variables.
///
/// Invariants (enforced by the constructors):
/// * every node carries the same decision dimension `n >= 1`;
/// * quadratic nodes hold a symmetric PSD matrix (eigenvalue floor `-1e-12`);
/// * scale coefficients are nonnegative;
/// * children of a max node are constant, affine, or quadratic.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexExpr {
    dim: usize,
    node: Node,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Constant(f64),
    Affine {
        coeffs: Vec<f64>,
        offset: f64,
    },
    Quadratic {
        /// Symmetric PSD matrix; the node evaluates to `x'Qx + c'x + b`.
        q: DMatrix<f64>,
        linear: Vec<f64>,
        offset: f64,
        /// Cached gradient Lipschitz constant `2 * lambda_max(Q)`.
        grad_lipschitz: f64,
    },
    AbsCoord(usize),
    Max(Vec<ConvexExpr>),
    Sum(Vec<ConvexExpr>),
    Scale(f64, Box<ConvexExpr>),
}

/// One affine piece `x -> <gradient, x> + offset` of a piecewise-linear form.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPiece {
    pub gradient: Vec<f64>,
    pub offset: f64,
}

/// A convex piecewise-linear function represented as a max of affine pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearForm {
    dim: usize,
    pieces: Vec<LinearPiece>,
}

impl PiecewiseLinearForm {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[LinearPiece] {
        &self.pieces
    }

    /// Evaluates the form as the maximum over its pieces.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self
            .pieces
            .iter()
            .map(|p| dot(&p.gradient, x) + p.offset)
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl ConvexExpr {
    // ===== constructors =====

    /// The constant function `x -> value` on an `dim`-dimensional domain.
    pub fn constant(dim: usize, value: f64) -> Result<Self> {
        check_dim_positive(dim)?;
        if !value.is_finite() {
            return Err(Error::InvalidConfig("constant value must be finite".into()));
        }
        Ok(Self {
            dim,
            node: Node::Constant(value),
        })
    }

    /// The affine function `x -> <coeffs, x> + offset`.
    pub fn affine(coeffs: Vec<f64>, offset: f64) -> Result<Self> {
        check_dim_positive(coeffs.len())?;
        if !all_finite(&coeffs) || !offset.is_finite() {
            return Err(Error::InvalidConfig(
                "affine coefficients must be finite".into(),
            ));
        }
        let dim = coeffs.len();
        Ok(Self {
            dim,
            node: Node::Affine { coeffs, offset },
        })
    }

    /// The quadratic function `x -> x'Qx + <linear, x> + offset`.
    ///
    /// `q` is given in row-major order, must be square, symmetric, and
    /// positive semidefinite (checked by a symmetric eigenvalue decomposition
    /// with floor `-1e-12`).
    pub fn quadratic(q: Vec<Vec<f64>>, linear: Vec<f64>, offset: f64) -> Result<Self> {
        let dim = linear.len();
        check_dim_positive(dim)?;
        if q.len() != dim || q.iter().any(|row| row.len() != dim) {
            return Err(Error::MalformedQuadratic);
        }
        if q.iter().any(|row| !all_finite(row)) || !all_finite(&linear) || !offset.is_finite() {
            return Err(Error::InvalidConfig(
                "quadratic coefficients must be finite".into(),
            ));
        }
        let mat = DMatrix::from_fn(dim, dim, |i, j| q[i][j]);
        let scale = mat.amax().max(1.0);
        let asym = (&mat - mat.transpose()).amax();
        if asym > 1e-9 * scale {
            return Err(Error::MalformedQuadratic);
        }
        // Symmetrize to wash out representation noise before the eigen check.
        let sym = (&mat + mat.transpose()) * 0.5;
        let eigs = sym.clone().symmetric_eigen().eigenvalues;
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_eig = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if min_eig < -1e-12 * scale {
            return Err(Error::NotPsd { min_eig });
        }
        Ok(Self {
            dim,
            node: Node::Quadratic {
                q: sym,
                linear,
                offset,
                grad_lipschitz: 2.0 * max_eig.max(0.0),
            },
        })
    }

    /// The coordinate absolute value `x -> |x[index]|`.
    pub fn abs_coord(dim: usize, index: usize) -> Result<Self> {
        check_dim_positive(dim)?;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        Ok(Self {
            dim,
            node: Node::AbsCoord(index),
        })
    }

    /// The pointwise maximum of the children, which must all be constant,
    /// affine, or quadratic and share one dimension.
    pub fn max_of(children: Vec<ConvexExpr>) -> Result<Self> {
        let dim = check_children(&children)?;
        for child in &children {
            match child.node {
                Node::Constant(_) | Node::Affine { .. } | Node::Quadratic { .. } => {}
                _ => return Err(Error::UnsupportedMaxChild),
            }
        }
        Ok(Self {
            dim,
            node: Node::Max(children),
        })
    }

    /// The sum of the children, which must share one dimension.
    pub fn sum_of(children: Vec<ConvexExpr>) -> Result<Self> {
        let dim = check_children(&children)?;
        Ok(Self {
            dim,
            node: Node::Sum(children),
        })
    }

    /// The nonnegative scaling `x -> alpha * inner(x)`.
    pub fn scaled(alpha: f64, inner: ConvexExpr) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::NegativeScale(alpha));
        }
        Ok(Self {
            dim: inner.dim,
            node: Node::Scale(alpha, Box::new(inner)),
        })
    }

    /// Convenience: `self + delta`, built as a sum with a constant node.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        let c = Self::constant(self.dim, delta)?;
        Self::sum_of(vec![self.clone(), c])
    }

    // ===== accessors =====

    /// Decision dimension of the expression.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when the expression contains no absolute-value or max node, so
    /// its subgradient is an honest gradient everywhere.
    pub fn is_smooth(&self) -> bool {
        match &self.node {
            Node::Constant(_) | Node::Affine { .. } | Node::Quadratic { .. } => true,
            Node::AbsCoord(_) | Node::Max(_) => false,
            Node::Sum(children) => children.iter().all(|c| c.is_smooth()),
            Node::Scale(_, inner) => inner.is_smooth(),
        }
    }

    /// A Lipschitz constant for the gradient, when the expression is smooth.
    pub(crate) fn smooth_curvature(&self) -> Option<f64> {
        match &self.node {
            Node::Constant(_) | Node::Affine { .. } => Some(0.0),
            Node::Quadratic { grad_lipschitz, .. } => Some(*grad_lipschitz),
            Node::AbsCoord(_) | Node::Max(_) => None,
            Node::Sum(children) => {
                let mut total = 0.0;
                for child in children {
                    total += child.smooth_curvature()?;
                }
                Some(total)
            }
            Node::Scale(alpha, inner) => Some(alpha * inner.smooth_curvature()?),
        }
    }

    // ===== evaluation =====

    /// Evaluates the expression at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match &self.node {
            Node::Constant(v) => *v,
            Node::Affine { coeffs, offset } => dot(coeffs, x) + offset,
            Node::Quadratic {
                q, linear, offset, ..
            } => {
                let mut value = *offset;
                for i in 0..self.dim {
                    let mut qx = 0.0;
                    for j in 0..self.dim {
                        qx += q[(i, j)] * x[j];
                    }
                    value += x[i] * qx + linear[i] * x[i];
                }
                value
            }
            Node::AbsCoord(i) => x[*i].abs(),
            Node::Max(children) => children
                .iter()
                .map(|c| c.eval_unchecked(x))
                .fold(f64::NEG_INFINITY, f64::max),
            Node::Sum(children) => children.iter().map(|c| c.eval_unchecked(x)).sum(),
            Node::Scale(alpha, inner) => alpha * inner.eval_unchecked(x),
        }
    }

    /// Returns one element of the subdifferential at `x`.
    ///
    /// Selection rules are deterministic: the minimal-norm element at an
    /// absolute-value kink (i.e. `0`), and the first active child (lowest
    /// index) at a max tie. For smooth expressions this is the gradient.
    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let mut out = vec![0.0; self.dim];
        self.accumulate_subgradient(x, 1.0, &mut out);
        Ok(out)
    }

    /// Adds `scale * (selected subgradient at x)` into `out` without
    /// allocating; the solver hot loops lean on this.
    pub(crate) fn accumulate_subgradient(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        match &self.node {
            Node::Constant(_) => {}
            Node::Affine { coeffs, .. } => {
                for (o, c) in out.iter_mut().zip(coeffs) {
                    *o += scale * c;
                }
            }
            Node::Quadratic { q, linear, .. } => {
                for i in 0..self.dim {
                    let mut qx = 0.0;
                    for j in 0..self.dim {
                        qx += q[(i, j)] * x[j];
                    }
                    out[i] += scale * (2.0 * qx + linear[i]);
                }
            }
            Node::AbsCoord(i) => {
                // signum(0) would be 0 anyway, but be explicit: the kink takes
                // the minimal-norm subgradient.
                if x[*i] > 0.0 {
                    out[*i] += scale;
                } else if x[*i] < 0.0 {
                    out[*i] -= scale;
                }
            }
            Node::Max(children) => {
                let active = self.first_active_child(x, children);
                children[active].accumulate_subgradient(x, scale, out);
            }
            Node::Sum(children) => {
                for child in children {
                    child.accumulate_subgradient(x, scale, out);
                }
            }
            Node::Scale(alpha, inner) => inner.accumulate_subgradient(x, alpha * scale, out),
        }
    }

    fn first_active_child(&self, x: &[f64], children: &[ConvexExpr]) -> usize {
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for (idx, child) in children.iter().enumerate() {
            let value = child.eval_unchecked(x);
            if value > best_value {
                best_value = value;
                best = idx;
            }
        }
        best
    }

    /// One-sided directional derivative `f'(x; h)`, computed structurally
    /// (no finite differencing).
    pub fn directional_derivative(&self, x: &[f64], h: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(h)?;
        Ok(self.dir_deriv_unchecked(x, h))
    }

    pub(crate) fn dir_deriv_unchecked(&self, x: &[f64], h: &[f64]) -> f64 {
        match &self.node {
            Node::Constant(_) => 0.0,
            Node::Affine { coeffs, .. } => dot(coeffs, h),
            Node::Quadratic { q, linear, .. } => {
                let mut value = 0.0;
                for i in 0..self.dim {
                    let mut qx = 0.0;
                    for j in 0..self.dim {
                        qx += q[(i, j)] * x[j];
                    }
                    value += (2.0 * qx + linear[i]) * h[i];
                }
                value
            }
            Node::AbsCoord(i) => {
                if x[*i] > 0.0 {
                    h[*i]
                } else if x[*i] < 0.0 {
                    -h[*i]
                } else {
                    h[*i].abs()
                }
            }
            Node::Max(children) => {
                // max' (x; h) = max over active children of their derivative.
                let top = children
                    .iter()
                    .map(|c| c.eval_unchecked(x))
                    .fold(f64::NEG_INFINITY, f64::max);
                children
                    .iter()
                    .filter(|c| c.eval_unchecked(x) == top)
                    .map(|c| c.dir_deriv_unchecked(x, h))
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            Node::Sum(children) => children.iter().map(|c| c.dir_deriv_unchecked(x, h)).sum(),
            Node::Scale(alpha, inner) => alpha * inner.dir_deriv_unchecked(x, h),
        }
    }

    // ===== piecewise-linear lowering =====

    /// Lowers the expression to an explicit max-of-affine form.
    ///
    /// Returns `None` when a quadratic node is present anywhere in the tree
    /// (the expression is not piecewise linear) or when distributing sums
    /// over maxima would exceed [`PIECE_LIMIT`] pieces.
    pub fn to_piecewise_linear(&self) -> Option<PiecewiseLinearForm> {
        let pieces = self.collect_pieces()?;
        Some(PiecewiseLinearForm {
            dim: self.dim,
            pieces,
        })
    }

    fn collect_pieces(&self) -> Option<Vec<LinearPiece>> {
        match &self.node {
            Node::Constant(v) => Some(vec![LinearPiece {
                gradient: vec![0.0; self.dim],
                offset: *v,
            }]),
            Node::Affine { coeffs, offset } => Some(vec![LinearPiece {
                gradient: coeffs.clone(),
                offset: *offset,
            }]),
            Node::Quadratic { .. } => None,
            Node::AbsCoord(i) => {
                let mut plus = vec![0.0; self.dim];
                plus[*i] = 1.0;
                let mut minus = vec![0.0; self.dim];
                minus[*i] = -1.0;
                Some(vec![
                    LinearPiece {
                        gradient: plus,
                        offset: 0.0,
                    },
                    LinearPiece {
                        gradient: minus,
                        offset: 0.0,
                    },
                ])
            }
            Node::Max(children) => {
                // max(f, g) as a max of the union of both piece sets.
                let mut pieces = Vec::new();
                for child in children {
                    pieces.extend(child.collect_pieces()?);
                    if pieces.len() > PIECE_LIMIT {
                        return None;
                    }
                }
                Some(pieces)
            }
            Node::Sum(children) => {
                // Sum of maxima distributes into a max over all combinations:
                // the Minkowski sum of the piece sets.
                let mut acc = vec![LinearPiece {
                    gradient: vec![0.0; self.dim],
                    offset: 0.0,
                }];
                for child in children {
                    let child_pieces = child.collect_pieces()?;
                    if acc.len().saturating_mul(child_pieces.len()) > PIECE_LIMIT {
                        return None;
                    }
                    let mut next = Vec::with_capacity(acc.len() * child_pieces.len());
                    for left in &acc {
                        for right in &child_pieces {
                            let gradient = left
                                .gradient
                                .iter()
                                .zip(&right.gradient)
                                .map(|(a, b)| a + b)
                                .collect();
                            next.push(LinearPiece {
                                gradient,
                                offset: left.offset + right.offset,
                            });
                        }
                    }
                    acc = next;
                }
                Some(acc)
            }
            Node::Scale(alpha, inner) => {
                let mut pieces = inner.collect_pieces()?;
                for piece in &mut pieces {
                    for g in &mut piece.gradient {
                        *g *= alpha;
                    }
                    piece.offset *= alpha;
                }
                Some(pieces)
            }
        }
    }

    // ===== subdifferential as a polytope =====

    /// A finite generating set for the subdifferential at `x`:
    /// `∂f(x) = conv(generators)`.
    ///
    /// Smooth nodes contribute their gradient as a single point; an
    /// absolute-value kink contributes `{+e_i, -e_i}`; a max contributes the
    /// union over active children; sums combine by Minkowski sum. The set may
    /// contain redundant (non-vertex) points, which is harmless for the
    /// multiplier searches built on top of it.
    pub fn subdifferential_generators(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_point(x)?;
        self.generators_unchecked(x)
    }

    fn generators_unchecked(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        match &self.node {
            Node::Constant(_) => Ok(vec![vec![0.0; self.dim]]),
            Node::Affine { coeffs, .. } => Ok(vec![coeffs.clone()]),
            Node::Quadratic { .. } => {
                let mut g = vec![0.0; self.dim];
                self.accumulate_subgradient(x, 1.0, &mut g);
                Ok(vec![g])
            }
            Node::AbsCoord(i) => {
                let mut plus = vec![0.0; self.dim];
                plus[*i] = 1.0;
                if x[*i] > 0.0 {
                    Ok(vec![plus])
                } else if x[*i] < 0.0 {
                    plus[*i] = -1.0;
                    Ok(vec![plus])
                } else {
                    let mut minus = vec![0.0; self.dim];
                    minus[*i] = -1.0;
                    Ok(vec![plus, minus])
                }
            }
            Node::Max(children) => {
                let top = children
                    .iter()
                    .map(|c| c.eval_unchecked(x))
                    .fold(f64::NEG_INFINITY, f64::max);
                let mut generators = Vec::new();
                for child in children {
                    if child.eval_unchecked(x) == top {
                        generators.extend(child.generators_unchecked(x)?);
                    }
                }
                if generators.len() > GENERATOR_LIMIT {
                    return Err(Error::GeneratorBlowup(generators.len()));
                }
                Ok(generators)
            }
            Node::Sum(children) => {
                let mut acc = vec![vec![0.0; self.dim]];
                for child in children {
                    let child_gens = child.generators_unchecked(x)?;
                    if acc.len().saturating_mul(child_gens.len()) > GENERATOR_LIMIT {
                        return Err(Error::GeneratorBlowup(acc.len() * child_gens.len()));
                    }
                    let mut next = Vec::with_capacity(acc.len() * child_gens.len());
                    for left in &acc {
                        for right in &child_gens {
                            next.push(left.iter().zip(right).map(|(a, b)| a + b).collect());
                        }
                    }
                    acc = next;
                }
                Ok(acc)
            }
            Node::Scale(alpha, inner) => {
                let mut generators = inner.generators_unchecked(x)?;
                for g in &mut generators {
                    for v in g.iter_mut() {
                        *v *= alpha;
                    }
                }
                Ok(generators)
            }
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }
}

fn check_dim_positive(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidConfig(
            "expression dimension must be at least 1".into(),
        ));
    }
    Ok(())
}

fn check_children(children: &[ConvexExpr]) -> Result<usize> {
    let first = children.first().ok_or(Error::EmptyExprList)?;
    let dim = first.dim;
    for child in children {
        if child.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: child.dim,
            });
        }
    }
    Ok(dim)
}
