//! Dense linear algebra over `R^n`: points, matrices, linear solves,
//! orthonormal bases and subspace projectors.
//!
//! Everything here is immutable after construction. `nalgebra` carries the
//! storage and the factorizations; the types below add the finiteness and
//! dimension checks the operator layer relies on.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};

/// Numerical thresholds for the linear layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinalgConfig {
    /// Largest accepted 2-norm condition number before a matrix counts as singular.
    pub condition_limit: f64,
    /// Gram-Schmidt residual below which a vector counts as dependent.
    pub rank_tol: f64,
    /// Slack allowed on the smallest eigenvalue of the symmetric part.
    pub monotone_tol: f64,
    /// Orthonormality tolerance for [`SubspaceBasis`].
    pub orthonormal_tol: f64,
}

impl Default for LinalgConfig {
    fn default() -> Self {
        LinalgConfig {
            condition_limit: 1e12,
            rank_tol: 1e-10,
            monotone_tol: 1e-10,
            orthonormal_tol: 1e-12,
        }
    }
}

/// A point of `R^n`.
#[derive(Clone, PartialEq)]
pub struct Point(DVector<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("points need dimension >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point coordinates"));
        }
        Ok(Point(DVector::from_vec(coords)))
    }

    pub fn zeros(dim: usize) -> Self {
        Point(DVector::zeros(dim))
    }

    /// `e_i` in `R^dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        Point(v)
    }

    pub(crate) fn from_vector(v: DVector<f64>) -> Self {
        Point(v)
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn coords(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.as_slice().to_vec()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &Point) -> Point {
        Point(&self.0 + &other.0 * alpha)
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &Point) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found: self.dim() })
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Point").field(&self.coords()).finish()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        Point(&self.0 + &rhs.0)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point(self.0 + rhs.0)
    }
}

impl Sub for &Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        Point(&self.0 - &rhs.0)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point(self.0 - rhs.0)
    }
}

impl Add<&Point> for Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        Point(self.0 + &rhs.0)
    }
}

impl Sub<&Point> for Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        Point(self.0 - &rhs.0)
    }
}

impl Mul<f64> for &Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point(&self.0 * rhs)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point(self.0 * rhs)
    }
}

impl Mul<&Point> for f64 {
    type Output = Point;
    fn mul(self, rhs: &Point) -> Point {
        Point(&rhs.0 * self)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, rhs: Point) -> Point {
        Point(rhs.0 * self)
    }
}

impl Neg for &Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point(-&self.0)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point(-self.0)
    }
}

/// Dense real matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct Matrix(DMatrix<f64>);

impl Matrix {
    /// Builds a matrix from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 {
            return Err(Error::InvalidParameter("matrix needs at least one entry".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch { expected: ncols, found: bad.len() });
        }
        let m = DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
        Self::from_dmatrix(m)
    }

    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        if m.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Matrix(m))
    }

    pub fn identity(n: usize) -> Self {
        Matrix(DMatrix::identity(n, n))
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        Matrix(DMatrix::identity(n, n) * s)
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix(self.0.transpose())
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.cols())?;
        Ok(Point(&self.0 * &x.0))
    }

    /// `‖M‖₂ ‖M⁻¹‖₂`, infinite when the smallest singular value vanishes.
    pub fn condition_number(&self) -> f64 {
        let sv = self.0.singular_values();
        let max = sv.max();
        let min = sv.min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare { rows: self.rows(), cols: self.cols() })
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<f64>> = self.0.row_iter().map(|r| r.iter().copied().collect()).collect();
        f.debug_tuple("Matrix").field(&rows).finish()
    }
}

/// An LU factorization that has passed the conditioning check, reusable
/// across many right-hand sides.
#[derive(Clone)]
pub struct LinearSolver {
    lu: LU<f64, Dyn, Dyn>,
    dim: usize,
    condition: f64,
}

impl LinearSolver {
    pub fn new(m: &Matrix) -> Result<Self> {
        Self::with_config(m, &LinalgConfig::default())
    }

    pub fn with_config(m: &Matrix, cfg: &LinalgConfig) -> Result<Self> {
        m.require_square()?;
        let condition = m.condition_number();
        if !(condition <= cfg.condition_limit) {
            return Err(Error::SingularMatrix { condition });
        }
        Ok(LinearSolver { lu: m.0.clone().lu(), dim: m.rows(), condition })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, rhs: &Point) -> Result<Point> {
        rhs.check_dim(self.dim)?;
        self.lu
            .solve(&rhs.0)
            .map(Point)
            .ok_or(Error::SingularMatrix { condition: f64::INFINITY })
    }
}

impl fmt::Debug for LinearSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearSolver")
            .field("dim", &self.dim)
            .field("condition", &self.condition)
            .finish()
    }
}

/// Solves `M y = rhs`.
pub fn solve_linear(m: &Matrix, rhs: &Point) -> Result<Point> {
    LinearSolver::new(m)?.solve(rhs)
}

pub fn solve_linear_with(m: &Matrix, rhs: &Point, cfg: &LinalgConfig) -> Result<Point> {
    LinearSolver::with_config(m, cfg)?.solve(rhs)
}

/// Orthonormal basis of a linear subspace `U ⊆ R^n`. An empty basis encodes `{0}`.
#[derive(Clone, PartialEq)]
pub struct SubspaceBasis {
    dim: usize,
    basis: Vec<Point>,
    // n×k with the basis vectors as columns
    q: DMatrix<f64>,
}

impl SubspaceBasis {
    pub fn trivial(dim: usize) -> Self {
        SubspaceBasis { dim, basis: Vec::new(), q: DMatrix::zeros(dim, 0) }
    }

    pub fn full(dim: usize) -> Self {
        let basis: Vec<Point> = (0..dim).map(|i| Point::basis(dim, i)).collect();
        Self::from_orthonormal(dim, basis)
    }

    fn from_orthonormal(dim: usize, basis: Vec<Point>) -> Self {
        let q = DMatrix::from_fn(dim, basis.len(), |i, j| basis[j].0[i]);
        SubspaceBasis { dim, basis, q }
    }

    /// Ambient dimension `n`.
    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Subspace dimension `k`.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn vectors(&self) -> &[Point] {
        &self.basis
    }

    /// Largest entry of `|QᵀQ − I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.rank();
        let gram = self.q.transpose() * &self.q;
        (gram - DMatrix::<f64>::identity(k, k)).amax()
    }
}

impl fmt::Debug for SubspaceBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubspaceBasis")
            .field("dim", &self.dim)
            .field("basis", &self.basis)
            .finish()
    }
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
///
/// Fails with [`Error::RankDeficient`] on the first vector whose residual,
/// after removing its components along the earlier vectors, is below
/// `cfg.rank_tol`.
pub fn orthonormalize_with(dim: usize, vectors: &[Point], cfg: &LinalgConfig) -> Result<SubspaceBasis> {
    let mut basis: Vec<Point> = Vec::with_capacity(vectors.len());
    for (index, v) in vectors.iter().enumerate() {
        v.check_dim(dim)?;
        if !v.is_finite() {
            return Err(Error::NonFinite("spanning vector"));
        }
        let mut r = v.0.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = q.0.dot(&r);
                r.axpy(-c, &q.0, 1.0);
            }
        }
        let residual = r.norm();
        if residual < cfg.rank_tol {
            return Err(Error::RankDeficient { index, residual });
        }
        basis.push(Point(r / residual));
    }
    let out = SubspaceBasis::from_orthonormal(dim, basis);
    debug_assert!(out.orthonormality_defect() <= 1e-10);
    Ok(out)
}

pub fn orthonormalize(dim: usize, vectors: &[Point]) -> Result<SubspaceBasis> {
    orthonormalize_with(dim, vectors, &LinalgConfig::default())
}

/// `P_U x = Σ ⟨x, qᵢ⟩ qᵢ`.
pub fn project(u: &SubspaceBasis, x: &Point) -> Result<Point> {
    x.check_dim(u.dim)?;
    Ok(project_unchecked(u, x))
}

/// `P_{U⊥} x = x − P_U x`.
pub fn project_complement(u: &SubspaceBasis, x: &Point) -> Result<Point> {
    x.check_dim(u.dim)?;
    Ok(x - &project_unchecked(u, x))
}

pub(crate) fn project_unchecked(u: &SubspaceBasis, x: &Point) -> Point {
    if u.rank() == 0 {
        return Point::zeros(u.dim);
    }
    let coeffs = u.q.tr_mul(&x.0);
    Point(&u.q * coeffs)
}

/// Smallest eigenvalue of `(M + Mᵀ)/2`.
pub fn min_symmetric_eigenvalue(m: &Matrix) -> Result<f64> {
    m.require_square()?;
    let sym = (&m.0 + m.0.transpose()) * 0.5;
    Ok(sym.symmetric_eigenvalues().min())
}

/// Monotonicity of `x ↦ Mx`: the symmetric part of `M` is positive semidefinite.
pub fn is_monotone_linear(m: &Matrix) -> bool {
    is_monotone_linear_with(m, &LinalgConfig::default())
}

pub fn is_monotone_linear_with(m: &Matrix, cfg: &LinalgConfig) -> bool {
    matches!(min_symmetric_eigenvalue(m), Ok(e) if e >= -cfg.monotone_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn close(a: &Point, b: &Point, tol: f64) -> bool {
        a.distance(b) <= tol
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let y = solve_linear(&Matrix::identity(2), &p(&[3.0, -1.0])).unwrap();
        assert!(close(&y, &p(&[3.0, -1.0]), 1e-15));
        let y = solve_linear(&Matrix::scaled_identity(2, 2.0), &p(&[2.0, 1.0])).unwrap();
        assert!(close(&y, &p(&[1.0, 0.5]), 1e-15));
    }

    #[test]
    fn solve_symmetric_2x2_multiplies_back() {
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let rhs = p(&[3.0, 3.0]);
        let y = solve_linear(&m, &rhs).unwrap();
        assert!(close(&y, &p(&[1.0, 1.0]), 1e-14));
        // oracle: multiply back
        let back = m.apply(&y).unwrap();
        assert!(back.distance(&rhs) <= 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn solve_rejects_singular_and_nonsquare() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(solve_linear(&m, &p(&[1.0, 1.0])), Err(Error::SingularMatrix { .. })));
        let m = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1e-13]]).unwrap();
        assert!(matches!(solve_linear(&m, &p(&[1.0, 1.0])), Err(Error::SingularMatrix { .. })));
        let loose = LinalgConfig { condition_limit: 1e14, ..Default::default() };
        assert!(solve_linear_with(&m, &p(&[1.0, 1.0]), &loose).is_ok());
        let r = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!(matches!(solve_linear(&r, &p(&[1.0, 1.0])), Err(Error::NotSquare { .. })));
        assert!(matches!(
            solve_linear(&Matrix::identity(2), &p(&[1.0, 1.0, 1.0])),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn orthonormalize_examples() {
        let u = orthonormalize(2, &[p(&[2.0, 0.0])]).unwrap();
        assert_eq!(u.vectors(), &[p(&[1.0, 0.0])]);

        let u = orthonormalize(2, &[p(&[1.0, 0.0]), p(&[0.0, 3.0])]).unwrap();
        assert!(close(&u.vectors()[0], &p(&[1.0, 0.0]), 1e-15));
        assert!(close(&u.vectors()[1], &p(&[0.0, 1.0]), 1e-15));

        let u = orthonormalize(2, &[p(&[1.0, 1.0]), p(&[1.0, 0.0])]).unwrap();
        assert_eq!(u.rank(), 2);
        // Gram-matrix oracle
        let v = u.vectors();
        assert!((v[0].dot(&v[0]) - 1.0).abs() < 1e-12);
        assert!((v[1].dot(&v[1]) - 1.0).abs() < 1e-12);
        assert!(v[0].dot(&v[1]).abs() < 1e-12);
    }

    #[test]
    fn orthonormalize_flags_dependent_vector() {
        let err = orthonormalize(2, &[p(&[1.0, 1.0]), p(&[2.0, 2.0])]).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { index: 1, .. }));
        let err = orthonormalize(3, &[p(&[0.0, 0.0, 0.0])]).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { index: 0, .. }));
    }

    #[test]
    fn project_examples() {
        let x = p(&[4.0, 6.0]);
        let u = orthonormalize(2, &[p(&[1.0, 0.0])]).unwrap();
        assert_eq!(project(&u, &x).unwrap(), p(&[4.0, 0.0]));
        assert_eq!(project(&SubspaceBasis::trivial(2), &x).unwrap(), p(&[0.0, 0.0]));
        assert_eq!(project_complement(&SubspaceBasis::trivial(2), &x).unwrap(), x);

        // inner-product oracle: <(2,0), q> q with q = (1,1)/√2
        let u = orthonormalize(2, &[p(&[1.0, 1.0])]).unwrap();
        let q = [std::f64::consts::FRAC_1_SQRT_2; 2];
        let c = 2.0 * q[0];
        let expected = p(&[c * q[0], c * q[1]]);
        let got = project(&u, &p(&[2.0, 0.0])).unwrap();
        assert!(close(&got, &expected, 1e-15));
        assert!(close(&got, &p(&[1.0, 1.0]), 1e-15));

        assert!(project(&u, &p(&[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn monotone_linear_examples() {
        assert!(is_monotone_linear(&Matrix::identity(2)));
        assert!(!is_monotone_linear(&Matrix::scaled_identity(2, -1.0)));
        let skew = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        assert!(is_monotone_linear(&skew));
        assert_eq!(min_symmetric_eigenvalue(&skew).unwrap(), 0.0);
    }

    #[test]
    fn point_rejects_bad_input() {
        assert!(matches!(Point::new(vec![1.0, f64::NAN]), Err(Error::NonFinite(_))));
        assert!(Point::new(vec![]).is_err());
        assert!(Matrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
