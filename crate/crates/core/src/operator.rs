//! Finite-dimensional complex operators on the system space.
//!
//! [`SystemOperator`] is a square complex matrix. All arithmetic is exact
//! matrix arithmetic; the structural predicates (`is_hermitian`,
//! `is_unitary`, ...) compare against an absolute operator-norm
//! [`Tolerance`].

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
#[cfg(test)]
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Absolute threshold used by predicates and residual checks.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Tolerance(f64);

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance(1e-10);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(Tolerance(value))
        } else {
            Err(Error::InvalidArgument(alloc::format!(
                "tolerance must be finite and nonnegative, got {value}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// A bounded operator on the (finite-dimensional) system space.
#[derive(Clone, PartialEq)]
pub struct SystemOperator(DMatrix<C64>);

impl fmt::Debug for SystemOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SystemOperator{:?}", self.0)
    }
}

impl SystemOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidArgument("operator dimension must be positive".into()));
        }
        Ok(SystemOperator(matrix))
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim > 0, "operator dimension must be positive");
        SystemOperator(DMatrix::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| ZERO)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn scalar(dim: usize, value: C64) -> Self {
        Self::identity(dim).scale(value)
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        Self::from_fn(entries.len(), |i, j| if i == j { entries[i] } else { ZERO })
    }

    pub fn real_diagonal(entries: &[f64]) -> Self {
        Self::from_fn(entries.len(), |i, j| {
            if i == j {
                C64::new(entries[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        SystemOperator(self.0.adjoint())
    }

    pub fn scale(&self, factor: C64) -> Self {
        SystemOperator(self.0.map(|z| z * factor))
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        SystemOperator(self.0.map(|z| z * factor))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        self.0
            .clone()
            .singular_values()
            .iter()
            .fold(0.0_f64, |acc, &s| acc.max(s))
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.0.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `(a + a*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        SystemOperator((&self.0 + self.0.adjoint()).map(|z| z * 0.5))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        SystemOperator(&self.0 - self.0.adjoint()).op_norm()
    }

    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let gram = self.0.adjoint() * &self.0;
        SystemOperator(gram - DMatrix::identity(n, n)).op_norm()
    }

    pub fn is_hermitian(&self, tol: Tolerance) -> bool {
        self.hermiticity_defect() <= tol.value()
    }

    pub fn is_anti_hermitian(&self, tol: Tolerance) -> bool {
        SystemOperator(&self.0 + self.0.adjoint()).op_norm() <= tol.value()
    }

    pub fn is_unitary(&self, tol: Tolerance) -> bool {
        self.unitarity_defect() <= tol.value()
    }

    pub fn is_positive_semidefinite(&self, tol: Tolerance) -> bool {
        self.is_hermitian(tol) && self.min_eigenvalue() >= -tol.value()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let (values, _) = self.hermitian_eigen();
        values.iter().fold(f64::INFINITY, |acc, &v| acc.min(v))
    }

    /// Eigen-decomposition of the Hermitian part: `(eigenvalues, eigenvectors)`
    /// with eigenvectors stored as columns.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        let eig = self.hermitian_part().0.symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    }

    /// Builds `V f(Λ) V*` from the eigen-decomposition of the Hermitian part.
    pub fn hermitian_function(&self, f: impl Fn(f64) -> C64) -> Self {
        let (values, vectors) = self.hermitian_eigen();
        let n = self.dim();
        let diag = DMatrix::from_fn(n, n, |i, j| if i == j { f(values[i]) } else { ZERO });
        SystemOperator(&vectors * diag * vectors.adjoint())
    }

    pub fn inverse(&self) -> Result<Self> {
        self.0
            .clone()
            .lu()
            .try_inverse()
            .map(SystemOperator)
            .ok_or_else(|| Error::Singular {
                what: "operator",
                detail: "LU factorisation has a zero pivot".into(),
            })
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.0 * v
    }

    /// `<u, A v>` with the inner product antilinear in the first slot.
    pub fn matrix_element(&self, u: &DVector<C64>, v: &DVector<C64>) -> C64 {
        u.dotc(&(&self.0 * v))
    }
}

impl Add for &SystemOperator {
    type Output = SystemOperator;
    fn add(self, rhs: &SystemOperator) -> SystemOperator {
        SystemOperator(&self.0 + &rhs.0)
    }
}

impl Add for SystemOperator {
    type Output = SystemOperator;
    fn add(self, rhs: SystemOperator) -> SystemOperator {
        SystemOperator(self.0 + rhs.0)
    }
}

impl Sub for &SystemOperator {
    type Output = SystemOperator;
    fn sub(self, rhs: &SystemOperator) -> SystemOperator {
        SystemOperator(&self.0 - &rhs.0)
    }
}

impl Sub for SystemOperator {
    type Output = SystemOperator;
    fn sub(self, rhs: SystemOperator) -> SystemOperator {
        SystemOperator(self.0 - rhs.0)
    }
}

impl Mul for &SystemOperator {
    type Output = SystemOperator;
    fn mul(self, rhs: &SystemOperator) -> SystemOperator {
        SystemOperator(&self.0 * &rhs.0)
    }
}

impl Mul for SystemOperator {
    type Output = SystemOperator;
    fn mul(self, rhs: SystemOperator) -> SystemOperator {
        SystemOperator(self.0 * rhs.0)
    }
}

impl Neg for &SystemOperator {
    type Output = SystemOperator;
    fn neg(self) -> SystemOperator {
        SystemOperator(-&self.0)
    }
}

impl Neg for SystemOperator {
    type Output = SystemOperator;
    fn neg(self) -> SystemOperator {
        SystemOperator(-self.0)
    }
}

impl AddAssign<&SystemOperator> for SystemOperator {
    fn add_assign(&mut self, rhs: &SystemOperator) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&SystemOperator> for SystemOperator {
    fn sub_assign(&mut self, rhs: &SystemOperator) {
        self.0 -= &rhs.0;
    }
}

/// `ab - ba`.
pub fn commutator(a: &SystemOperator, b: &SystemOperator) -> Result<SystemOperator> {
    check_dim(a.dim(), b.dim())?;
    Ok(&(a * b) - &(b * a))
}

/// `ab + ba`.
pub fn anticommutator(a: &SystemOperator, b: &SystemOperator) -> Result<SystemOperator> {
    check_dim(a.dim(), b.dim())?;
    Ok(&(a * b) + &(b * a))
}

/// Principal (positive semidefinite) square root.
///
/// Eigenvalues in `[-tol, 0)` are clamped to zero; anything below `-tol`
/// is rejected.
pub fn sqrt_psd(p: &SystemOperator, tol: Tolerance) -> Result<SystemOperator> {
    let defect = p.hermiticity_defect();
    if defect > tol.value() {
        return Err(Error::Precondition {
            what: "square-root argument",
            property: "Hermitian",
            deviation: defect,
            tolerance: tol.value(),
        });
    }
    let (values, vectors) = p.hermitian_eigen();
    if let Some(&worst) = values.iter().find(|&&v| v < -tol.value()) {
        return Err(Error::NegativeEigenvalue {
            eigenvalue: worst,
            tolerance: tol.value(),
        });
    }
    let n = p.dim();
    let diag = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(libm::sqrt(values[i].max(0.0)), 0.0)
        } else {
            ZERO
        }
    });
    let root = SystemOperator(&vectors * diag * vectors.adjoint());
    Ok(root.hermitian_part())
}

/// Kinds of seeded random operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Hermitian,
    Unitary,
    Positive,
    General,
}

/// Standard complex Gaussian entry (`E|z|^2 = 1`) via Box-Muller.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = libm::sqrt(-libm::log(u1));
    let theta = 2.0 * core::f64::consts::PI * u2;
    C64::new(r * libm::cos(theta), r * libm::sin(theta))
}

pub fn random_with<R: Rng + ?Sized>(kind: OperatorKind, dim: usize, rng: &mut R) -> SystemOperator {
    assert!(dim > 0, "operator dimension must be positive");
    let g = SystemOperator(DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng)));
    match kind {
        OperatorKind::General => g,
        OperatorKind::Hermitian => g.hermitian_part(),
        OperatorKind::Positive => (&g * &g.adjoint()).hermitian_part(),
        OperatorKind::Unitary => unitarize(g),
    }
}

/// Seeded random operator of the requested kind.
///
/// Unitaries come from the QR factorisation of a complex Gaussian matrix
/// with the phases of `diag(R)` folded back into `Q`, which yields
/// Haar-distributed samples.
pub fn random_structured(kind: OperatorKind, dim: usize, seed: u64) -> SystemOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_with(kind, dim, &mut rng)
}

fn unitarize(g: SystemOperator) -> SystemOperator {
    let n = g.dim();
    let qr = g.0.qr();
    let (q, r) = qr.unpack();
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i != j {
            return ZERO;
        }
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            ONE
        }
    });
    SystemOperator(q * phases)
}

pub fn random_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<C64> {
    DVector::from_fn(dim, |_, _| complex_gaussian(rng))
}
