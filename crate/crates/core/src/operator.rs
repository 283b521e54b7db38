//! Operator expressions and their resolvents.
//!
//! An [`Operator`] is an immutable expression tree over `R^n`. Leaves are the
//! operator kinds with exact resolvents (identity, constants, affine maps and
//! projectors onto affine subspaces); inner nodes build resolvents, reflected
//! resolvents, resolvent averages, compositions and affine combinations.
//!
//! The resolvent of a leaf is computed in closed form (or with one
//! pre-factorized linear solve for a general affine map). The resolvent of a
//! perturbed operator `A_γ` is `γ J_A + (1 − γ) w`; the perturbed node itself
//! evaluates `A(γ⁻¹(x − (1 − γ) w)) + γ⁻¹(1 − γ)(x − w)` directly.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{
    self, is_monotone_linear_with, min_symmetric_eigenvalue, LinalgConfig, LinearSolver, Matrix,
    Point, SubspaceBasis,
};
use crate::sampling;

/// Anything that maps points to points.
pub trait PointMap {
    fn apply(&self, x: &Point) -> Result<Point>;
}

impl<F> PointMap for F
where
    F: Fn(&Point) -> Result<Point>,
{
    fn apply(&self, x: &Point) -> Result<Point> {
        self(x)
    }
}

/// The pair `(γ, w)` of a resolvent average.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationParams {
    gamma: f64,
    w: Point,
}

impl PerturbationParams {
    pub fn new(gamma: f64, w: Point) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        if !w.is_finite() {
            return Err(Error::NonFinite("anchor w"));
        }
        Ok(PerturbationParams { gamma, w })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn w(&self) -> &Point {
        &self.w
    }
}

/// Relaxation `λ ∈ (0, 1]` of the AAC operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AacParams {
    lambda: f64,
}

impl AacParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidParameter(format!("lambda must lie in (0, 1], got {lambda}")));
        }
        Ok(AacParams { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Precomputed evaluator for `J_A`.
#[derive(Clone)]
pub struct ResolventKernel(Kernel);

#[derive(Clone)]
enum Kernel {
    /// `J_Id = Id / 2`
    Half,
    /// `J_c = Id − c`
    Shift(Point),
    /// `(Id + L)⁻¹(x − c)`
    Linear { solver: Arc<LinearSolver>, offset: Point },
    /// `(Id − ½P_U)x − P_{U⊥}a`
    Project { subspace: SubspaceBasis, anchor_perp: Point },
    /// `γ J + (1 − γ) w`
    Averaged { inner: Box<Kernel>, gamma: f64, w: Point },
}

impl Kernel {
    fn apply(&self, x: &Point) -> Point {
        match self {
            Kernel::Half => x * 0.5,
            Kernel::Shift(c) => x - c,
            Kernel::Linear { solver, offset } => solver
                .solve(&(x - offset))
                .expect("dimension checked at evaluation entry"),
            Kernel::Project { subspace, anchor_perp } => {
                let pu = linalg::project_unchecked(subspace, x);
                x.add_scaled(-0.5, &pu) - anchor_perp
            }
            Kernel::Averaged { inner, gamma, w } => (inner.apply(x) * *gamma).add_scaled(1.0 - gamma, w),
        }
    }
}

impl ResolventKernel {
    pub fn apply(&self, x: &Point) -> Point {
        self.0.apply(x)
    }
}

impl fmt::Debug for ResolventKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &self.0 {
            Kernel::Half => "half",
            Kernel::Shift(_) => "shift",
            Kernel::Linear { .. } => "linear-solve",
            Kernel::Project { .. } => "projector",
            Kernel::Averaged { .. } => "averaged",
        };
        f.write_str(name)
    }
}

/// One node of an operator expression.
#[derive(Debug)]
pub enum Node {
    Identity,
    Constant(Point),
    /// `x ↦ Lx + c`
    AffineMap { linear: Matrix, offset: Point },
    /// `x ↦ a + P_U(x − a)`
    ProjectAffine { anchor: Point, subspace: SubspaceBasis },
    Resolvent { child: Operator, kernel: ResolventKernel },
    /// `2 J − Id`
    Reflected { child: Operator, kernel: ResolventKernel },
    Perturbed { child: Operator, params: PerturbationParams },
    Compose { outer: Operator, inner: Operator },
    /// `x ↦ α f(x) + β g(x) + shift`
    Combine { alpha: f64, f: Operator, beta: f64, g: Operator, shift: Point },
}

/// Immutable, cheaply clonable operator expression.
#[derive(Clone)]
pub struct Operator {
    node: Arc<Node>,
    dim: Option<usize>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.node.fmt(f)
    }
}

fn unify(a: Option<usize>, b: Option<usize>) -> Result<Option<usize>> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(Error::DimensionMismatch { expected: x, found: y }),
        (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
        (None, None) => Ok(None),
    }
}

impl Operator {
    fn from_node(node: Node, dim: Option<usize>) -> Self {
        Operator { node: Arc::new(node), dim }
    }

    pub fn identity() -> Self {
        Self::from_node(Node::Identity, None)
    }

    /// The constant map `x ↦ c`. `constant(0)` is the zero operator.
    pub fn constant(c: Point) -> Self {
        let d = c.dim();
        Self::from_node(Node::Constant(c), Some(d))
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(Point::zeros(dim))
    }

    pub fn affine(linear: Matrix, offset: Point) -> Result<Self> {
        if !linear.is_square() {
            return Err(Error::NotSquare { rows: linear.rows(), cols: linear.cols() });
        }
        offset.check_dim(linear.rows())?;
        let d = offset.dim();
        Ok(Self::from_node(Node::AffineMap { linear, offset }, Some(d)))
    }

    /// `x ↦ x + shift`; `translated_identity(−v)` is `Id − v`.
    pub fn translated_identity(shift: Point) -> Self {
        let d = shift.dim();
        Self::from_node(Node::AffineMap { linear: Matrix::identity(d), offset: shift }, Some(d))
    }

    /// Projector onto the affine subspace `anchor + U`.
    pub fn project_affine(anchor: Point, subspace: SubspaceBasis) -> Result<Self> {
        anchor.check_dim(subspace.ambient_dim())?;
        let d = anchor.dim();
        Ok(Self::from_node(Node::ProjectAffine { anchor, subspace }, Some(d)))
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: &Operator, inner: &Operator) -> Result<Self> {
        let d = unify(outer.dim, inner.dim)?;
        Ok(Self::from_node(Node::Compose { outer: outer.clone(), inner: inner.clone() }, d))
    }

    pub fn combine(alpha: f64, f: &Operator, beta: f64, g: &Operator, shift: Point) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::NonFinite("combination weights"));
        }
        let d = unify(unify(f.dim, g.dim)?, Some(shift.dim()))?;
        Ok(Self::from_node(
            Node::Combine { alpha, f: f.clone(), beta, g: g.clone(), shift },
            d,
        ))
    }

    /// The resolvent average `A_γ` with anchor `w`.
    pub fn perturbed(&self, params: &PerturbationParams) -> Result<Self> {
        let d = unify(self.dim, Some(params.w.dim()))?;
        Ok(Self::from_node(Node::Perturbed { child: self.clone(), params: params.clone() }, d))
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    /// Ambient dimension, or `None` for dimension-free expressions such as `Id`.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn kind(&self) -> &'static str {
        match &*self.node {
            Node::Identity => "Identity",
            Node::Constant(_) => "Constant",
            Node::AffineMap { .. } => "AffineMap",
            Node::ProjectAffine { .. } => "ProjectAffine",
            Node::Resolvent { .. } => "Resolvent",
            Node::Reflected { .. } => "Reflected",
            Node::Perturbed { .. } => "Perturbed",
            Node::Compose { .. } => "Compose",
            Node::Combine { .. } => "Combine",
        }
    }

    /// Whether [`resolvent`] accepts this expression (monotonicity aside).
    pub fn is_resolvent_computable(&self) -> bool {
        match &*self.node {
            Node::Identity | Node::Constant(_) | Node::AffineMap { .. } | Node::ProjectAffine { .. } => true,
            Node::Perturbed { child, .. } => child.is_resolvent_computable(),
            _ => false,
        }
    }

    pub fn eval(&self, x: &Point) -> Result<Point> {
        if let Some(d) = self.dim {
            x.check_dim(d)?;
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &Point) -> Point {
        match &*self.node {
            Node::Identity => x.clone(),
            Node::Constant(c) => c.clone(),
            Node::AffineMap { linear, offset } => {
                Point::from_vector(linear.as_dmatrix() * x.as_vector()) + offset
            }
            Node::ProjectAffine { anchor, subspace } => {
                anchor + &linalg::project_unchecked(subspace, &(x - anchor))
            }
            Node::Resolvent { kernel, .. } => kernel.apply(x),
            Node::Reflected { kernel, .. } => kernel.apply(x) * 2.0 - x,
            Node::Perturbed { child, params } => {
                let g = params.gamma;
                let inner = x.add_scaled(-(1.0 - g), &params.w) * (1.0 / g);
                child.eval_unchecked(&inner) + (x - &params.w) * ((1.0 - g) / g)
            }
            Node::Compose { outer, inner } => outer.eval_unchecked(&inner.eval_unchecked(x)),
            Node::Combine { alpha, f, beta, g, shift } => {
                (f.eval_unchecked(x) * *alpha).add_scaled(*beta, &g.eval_unchecked(x)) + shift
            }
        }
    }
}

impl PointMap for Operator {
    fn apply(&self, x: &Point) -> Result<Point> {
        self.eval(x)
    }
}

pub fn eval(op: &Operator, x: &Point) -> Result<Point> {
    op.eval(x)
}

fn build_kernel(op: &Operator, cfg: &LinalgConfig) -> Result<Kernel> {
    match op.node() {
        Node::Identity => Ok(Kernel::Half),
        Node::Constant(c) => Ok(Kernel::Shift(c.clone())),
        Node::AffineMap { linear, offset } => {
            if !is_monotone_linear_with(linear, cfg) {
                let min_eigenvalue = min_symmetric_eigenvalue(linear)?;
                return Err(Error::MonotonicityViolation { min_eigenvalue });
            }
            let n = linear.rows();
            let shifted = Matrix::from_dmatrix(linear.as_dmatrix() + Matrix::identity(n).as_dmatrix())?;
            let solver = LinearSolver::with_config(&shifted, cfg).map_err(|e| match e {
                Error::SingularMatrix { condition } => Error::SingularResolvent { condition },
                other => other,
            })?;
            Ok(Kernel::Linear { solver: Arc::new(solver), offset: offset.clone() })
        }
        Node::ProjectAffine { anchor, subspace } => Ok(Kernel::Project {
            subspace: subspace.clone(),
            anchor_perp: linalg::project_complement(subspace, anchor)?,
        }),
        Node::Perturbed { child, params } => Ok(Kernel::Averaged {
            inner: Box::new(build_kernel(child, cfg)?),
            gamma: params.gamma,
            w: params.w.clone(),
        }),
        _ => Err(Error::NonComputableResolvent(op.kind())),
    }
}

/// `J_A = (Id + A)⁻¹`.
///
/// Affine children are checked for monotonicity here, once; evaluation does
/// no further validation.
pub fn resolvent(op: &Operator) -> Result<Operator> {
    resolvent_with(op, &LinalgConfig::default())
}

pub fn resolvent_with(op: &Operator, cfg: &LinalgConfig) -> Result<Operator> {
    let kernel = ResolventKernel(build_kernel(op, cfg)?);
    Ok(Operator::from_node(Node::Resolvent { child: op.clone(), kernel }, op.dim))
}

/// `R_A = 2 J_A − Id`.
pub fn reflected(op: &Operator) -> Result<Operator> {
    let kernel = ResolventKernel(build_kernel(op, &LinalgConfig::default())?);
    Ok(Operator::from_node(Node::Reflected { child: op.clone(), kernel }, op.dim))
}

/// `J_{A_γ} = γ J_A + (1 − γ) w`.
pub fn perturbed_resolvent(op: &Operator, p: &PerturbationParams) -> Result<Operator> {
    resolvent(&op.perturbed(p)?)
}

/// `R_{A_γ} = 2γ J_A + 2(1 − γ) w − Id`.
pub fn perturbed_reflected(op: &Operator, p: &PerturbationParams) -> Result<Operator> {
    reflected(&op.perturbed(p)?)
}

const AFFINITY_WEIGHTS: [f64; 3] = [-1.0, 0.3, 2.0];

/// Largest relative affinity defect
/// `‖f(αx + (1−α)y) − αf(x) − (1−α)f(y)‖ / (1 + ‖f(x)‖ + ‖f(y)‖)`
/// over `trials` random pairs and `α ∈ {−1, 0.3, 2}`.
pub fn affinity_defect<M: PointMap + ?Sized>(op: &M, dim: usize, trials: usize, seed: u64) -> Result<f64> {
    Ok(affinity_witness(op, dim, trials, seed)?.map_or(0.0, |(_, d)| d))
}

/// Like [`affinity_defect`], also returning the combination point `αx + (1−α)y` where the defect peaked.
pub fn affinity_witness<M: PointMap + ?Sized>(op: &M, dim: usize, trials: usize, seed: u64) -> Result<Option<(Point, f64)>> {
    let mut rng = sampling::rng(seed);
    let mut worst: Option<(Point, f64)> = None;
    for _ in 0..trials {
        let x = sampling::normal_point(&mut rng, dim, 10.0);
        let y = sampling::normal_point(&mut rng, dim, 10.0);
        let fx = op.apply(&x)?;
        let fy = op.apply(&y)?;
        let scale = 1.0 + fx.norm() + fy.norm();
        for alpha in AFFINITY_WEIGHTS {
            let z = (&x * alpha).add_scaled(1.0 - alpha, &y);
            let fz = op.apply(&z)?;
            let chord = (&fx * alpha).add_scaled(1.0 - alpha, &fy);
            let d = fz.distance(&chord) / scale;
            if worst.as_ref().is_none_or(|(_, w)| d > *w) {
                worst = Some((z, d));
            }
        }
    }
    Ok(worst)
}

/// Numeric certificate that `op` is affine on `R^dim`.
pub fn affinity_probe<M: PointMap + ?Sized>(op: &M, dim: usize, trials: usize, seed: u64) -> Result<bool> {
    if trials == 0 {
        return Err(Error::InvalidParameter("affinity probe needs at least one trial".into()));
    }
    Ok(affinity_defect(op, dim, trials, seed)? <= 1e-9)
}
