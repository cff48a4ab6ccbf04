//! Operator pairs `(T, S)` standing for `T + S J`, where `J` is the
//! reflection: self-adjoint, `J^2 = 1`, commuting with system operators.

use core::ops::{Add, Neg, Sub};

use crate::error::{check_dim, Result};
use crate::operator::{SystemOperator, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPair {
    t: SystemOperator,
    j: SystemOperator,
}

impl OperatorPair {
    pub fn new(t_part: SystemOperator, j_part: SystemOperator) -> Result<Self> {
        check_dim(t_part.dim(), j_part.dim())?;
        Ok(OperatorPair { t: t_part, j: j_part })
    }

    /// `(X, 0)`: the plain system operator `X`.
    pub fn system(x: SystemOperator) -> Self {
        let d = x.dim();
        OperatorPair {
            t: x,
            j: SystemOperator::zeros(d),
        }
    }

    /// `(0, X)`: the reflected operator `X J`.
    pub fn reflected(x: SystemOperator) -> Self {
        let d = x.dim();
        OperatorPair {
            t: SystemOperator::zeros(d),
            j: x,
        }
    }

    /// The unit `(1, 0)` of the `∘`-product.
    pub fn identity(dim: usize) -> Self {
        Self::system(SystemOperator::identity(dim))
    }

    /// `(0, 1)`, i.e. `J` itself.
    pub fn reflection(dim: usize) -> Self {
        Self::reflected(SystemOperator::identity(dim))
    }

    pub fn zero(dim: usize) -> Self {
        Self::system(SystemOperator::zeros(dim))
    }

    #[inline]
    pub fn t_part(&self) -> &SystemOperator {
        &self.t
    }

    #[inline]
    pub fn j_part(&self) -> &SystemOperator {
        &self.j
    }

    pub fn into_parts(self) -> (SystemOperator, SystemOperator) {
        (self.t, self.j)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.t.dim()
    }

    /// `(T*, S*)`.
    pub fn adjoint(&self) -> Self {
        OperatorPair {
            t: self.t.adjoint(),
            j: self.j.adjoint(),
        }
    }

    /// The reflection map `ρ(T, S) = (S, T)`.
    pub fn reflect(&self) -> Self {
        OperatorPair {
            t: self.j.clone(),
            j: self.t.clone(),
        }
    }

    /// `(T1, S1) ▽ (T2, S2) = T1 T2 + S1 S2`.
    pub fn nabla(&self, other: &Self) -> Result<SystemOperator> {
        check_dim(self.dim(), other.dim())?;
        Ok(&(&self.t * &other.t) + &(&self.j * &other.j))
    }

    /// `(T1, S1) △ (T2, S2) = T1 S2 + S1 T2`.
    pub fn triangle(&self, other: &Self) -> Result<SystemOperator> {
        check_dim(self.dim(), other.dim())?;
        Ok(&(&self.t * &other.j) + &(&self.j * &other.t))
    }

    /// `x ∘ y = (x ▽ y, x △ y)`, the product of `T1 + S1 J` and `T2 + S2 J`.
    pub fn circ(&self, other: &Self) -> Result<Self> {
        Ok(OperatorPair {
            t: self.nabla(other)?,
            j: self.triangle(other)?,
        })
    }

    /// `∘`-product for operands already known to share a dimension.
    pub(crate) fn compose(&self, other: &Self) -> Self {
        OperatorPair {
            t: &(&self.t * &other.t) + &(&self.j * &other.j),
            j: &(&self.t * &other.j) + &(&self.j * &other.t),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        OperatorPair {
            t: self.t.scale(factor),
            j: self.j.scale(factor),
        }
    }

    /// Left multiplication by a system operator: `A (T + S J) = AT + AS J`.
    pub fn left_mul(&self, a: &SystemOperator) -> Self {
        OperatorPair {
            t: a * &self.t,
            j: a * &self.j,
        }
    }

    /// Right multiplication by a system operator.
    pub fn right_mul(&self, a: &SystemOperator) -> Self {
        OperatorPair {
            t: &self.t * a,
            j: &self.j * a,
        }
    }

    /// Operator norm of `T + S J`.
    ///
    /// `J` has spectrum `{+1, -1}` and commutes with `T` and `S`, so
    /// `T + S J` is the direct sum of `T + S` and `T - S`.
    pub fn op_norm(&self) -> f64 {
        (&self.t + &self.j).op_norm().max((&self.t - &self.j).op_norm())
    }

    /// The operator `T + s S` seen on the `J = s` eigenspace.
    pub fn on_parity(&self, sign: f64) -> SystemOperator {
        &self.t + &self.j.scale_real(sign)
    }
}

impl Add for &OperatorPair {
    type Output = OperatorPair;
    fn add(self, rhs: &OperatorPair) -> OperatorPair {
        OperatorPair {
            t: &self.t + &rhs.t,
            j: &self.j + &rhs.j,
        }
    }
}

impl Sub for &OperatorPair {
    type Output = OperatorPair;
    fn sub(self, rhs: &OperatorPair) -> OperatorPair {
        OperatorPair {
            t: &self.t - &rhs.t,
            j: &self.j - &rhs.j,
        }
    }
}

impl Neg for &OperatorPair {
    type Output = OperatorPair;
    fn neg(self) -> OperatorPair {
        OperatorPair {
            t: -&self.t,
            j: -&self.j,
        }
    }
}

impl Add for OperatorPair {
    type Output = OperatorPair;
    fn add(self, rhs: OperatorPair) -> OperatorPair {
        &self + &rhs
    }
}

impl Sub for OperatorPair {
    type Output = OperatorPair;
    fn sub(self, rhs: OperatorPair) -> OperatorPair {
        &self - &rhs
    }
}
