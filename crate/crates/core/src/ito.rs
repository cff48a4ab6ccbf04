//! Quantum stochastic differentials and the Itô multiplication table.
//!
//! A process is described pointwise in time by its current value (an
//! [`OperatorPair`]) and its differential, a [`PairQsde`] holding one
//! coefficient pair per basis differential. Coefficients are adapted: they
//! commute with the same-time increments `dA`, `dA†`, `dΛ`.

use core::fmt;

use crate::error::{check_dim, Error, Result};
use crate::operator::{SystemOperator, C64};
use crate::pair::OperatorPair;

/// The four basis differentials `dt`, `dA`, `dA†`, `dΛ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisDifferential {
    Time,
    Ann,
    Cre,
    Gauge,
}

impl BasisDifferential {
    pub const ALL: [BasisDifferential; 4] = [Self::Time, Self::Ann, Self::Cre, Self::Gauge];

    pub fn symbol(self) -> &'static str {
        match self {
            Self::Time => "dt",
            Self::Ann => "dA",
            Self::Cre => "dAdag",
            Self::Gauge => "dL",
        }
    }

    /// Parses `dt`, `dA`, `dAdag` (or `dA+`) and `dL` (or `dLambda`).
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dt" => Ok(Self::Time),
            "dA" => Ok(Self::Ann),
            "dAdag" | "dA+" | "dAdagger" => Ok(Self::Cre),
            "dL" | "dLambda" => Ok(Self::Gauge),
            other => Err(Error::InvalidArgument(alloc::format!(
                "unknown differential {other:?} (expected dt, dA, dAdag or dL)"
            ))),
        }
    }

    /// Adjoint differential: `dA ↔ dA†`, `dt` and `dΛ` self-adjoint.
    pub fn adjoint(self) -> Self {
        match self {
            Self::Ann => Self::Cre,
            Self::Cre => Self::Ann,
            other => other,
        }
    }
}

impl fmt::Display for BasisDifferential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Product of two basis differentials; `None` is the zero element.
///
/// Rows are the left factor: `dA·dA† = dt`, `dΛ·dA† = dA†`, `dΛ·dΛ = dΛ`,
/// `dA·dΛ = dA`, every other product vanishes.
pub fn table_product(a: BasisDifferential, b: BasisDifferential) -> Option<BasisDifferential> {
    use BasisDifferential::*;
    match (a, b) {
        (Ann, Cre) => Some(Time),
        (Gauge, Cre) => Some(Cre),
        (Gauge, Gauge) => Some(Gauge),
        (Ann, Gauge) => Some(Ann),
        _ => None,
    }
}

/// Operator coefficients `E dΛ + F dA + G dA† + H dt`.
///
/// With `j_dressed` set, the `dA` and `dA†` coefficients carry a right
/// factor `J`, i.e. they multiply `dF = J dA` and `dF† = J dA†`.
#[derive(Clone, Debug, PartialEq)]
pub struct QsdeCoefficients {
    pub gauge: SystemOperator,
    pub ann: SystemOperator,
    pub cre: SystemOperator,
    pub time: SystemOperator,
    pub j_dressed: bool,
}

impl QsdeCoefficients {
    pub fn new(
        gauge: SystemOperator,
        ann: SystemOperator,
        cre: SystemOperator,
        time: SystemOperator,
        j_dressed: bool,
    ) -> Result<Self> {
        let d = gauge.dim();
        check_dim(d, ann.dim())?;
        check_dim(d, cre.dim())?;
        check_dim(d, time.dim())?;
        Ok(QsdeCoefficients {
            gauge,
            ann,
            cre,
            time,
            j_dressed,
        })
    }

    pub fn zero(dim: usize, j_dressed: bool) -> Self {
        let z = SystemOperator::zeros(dim);
        QsdeCoefficients {
            gauge: z.clone(),
            ann: z.clone(),
            cre: z.clone(),
            time: z,
            j_dressed,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.gauge.dim()
    }

    pub fn coefficient(&self, b: BasisDifferential) -> &SystemOperator {
        match b {
            BasisDifferential::Time => &self.time,
            BasisDifferential::Ann => &self.ann,
            BasisDifferential::Cre => &self.cre,
            BasisDifferential::Gauge => &self.gauge,
        }
    }

    /// Coefficients as pairs; `J`-dressed noise terms land in the `J` slot.
    pub fn to_pair_qsde(&self) -> PairQsde {
        let dressed = |op: &SystemOperator| {
            if self.j_dressed {
                OperatorPair::reflected(op.clone())
            } else {
                OperatorPair::system(op.clone())
            }
        };
        PairQsde {
            time: OperatorPair::system(self.time.clone()),
            ann: dressed(&self.ann),
            cre: dressed(&self.cre),
            gauge: OperatorPair::system(self.gauge.clone()),
        }
    }
}

/// Adjoint of `dX = (E dΛ + F dA + G dA† + H dt) X`, written as the
/// coefficients of `dX* = X* (E* dΛ + G* dA + F* dA† + H* dt)`.
pub fn qsde_adjoint(c: &QsdeCoefficients) -> QsdeCoefficients {
    QsdeCoefficients {
        gauge: c.gauge.adjoint(),
        ann: c.cre.adjoint(),
        cre: c.ann.adjoint(),
        time: c.time.adjoint(),
        j_dressed: c.j_dressed,
    }
}

/// A differential whose coefficients are pairs `T + S J`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairQsde {
    pub time: OperatorPair,
    pub ann: OperatorPair,
    pub cre: OperatorPair,
    pub gauge: OperatorPair,
}

impl PairQsde {
    pub fn zero(dim: usize) -> Self {
        let z = OperatorPair::zero(dim);
        PairQsde {
            time: z.clone(),
            ann: z.clone(),
            cre: z.clone(),
            gauge: z,
        }
    }

    pub fn new(
        time: OperatorPair,
        ann: OperatorPair,
        cre: OperatorPair,
        gauge: OperatorPair,
    ) -> Result<Self> {
        let d = time.dim();
        check_dim(d, ann.dim())?;
        check_dim(d, cre.dim())?;
        check_dim(d, gauge.dim())?;
        Ok(PairQsde {
            time,
            ann,
            cre,
            gauge,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.time.dim()
    }

    pub fn slot(&self, b: BasisDifferential) -> &OperatorPair {
        match b {
            BasisDifferential::Time => &self.time,
            BasisDifferential::Ann => &self.ann,
            BasisDifferential::Cre => &self.cre,
            BasisDifferential::Gauge => &self.gauge,
        }
    }

    pub fn slot_mut(&mut self, b: BasisDifferential) -> &mut OperatorPair {
        match b {
            BasisDifferential::Time => &mut self.time,
            BasisDifferential::Ann => &mut self.ann,
            BasisDifferential::Cre => &mut self.cre,
            BasisDifferential::Gauge => &mut self.gauge,
        }
    }

    /// Adjoint of a left-acting differential: the coefficient of `dA` moves
    /// to `dA†` and every pair is adjointed.
    pub fn adjoint(&self) -> Self {
        PairQsde {
            time: self.time.adjoint(),
            ann: self.cre.adjoint(),
            cre: self.ann.adjoint(),
            gauge: self.gauge.adjoint(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        PairQsde {
            time: self.time.scale(factor),
            ann: self.ann.scale(factor),
            cre: self.cre.scale(factor),
            gauge: self.gauge.scale(factor),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(PairQsde {
            time: &self.time + &other.time,
            ann: &self.ann + &other.ann,
            cre: &self.cre + &other.cre,
            gauge: &self.gauge + &other.gauge,
        })
    }

    /// Largest slot norm.
    pub fn op_norm(&self) -> f64 {
        BasisDifferential::ALL
            .iter()
            .map(|&b| self.slot(b).op_norm())
            .fold(0.0, f64::max)
    }
}

/// `dJ = -2 J dΛ` for the reflection process.
pub fn reflection_differential(dim: usize) -> PairQsde {
    let mut d = PairQsde::zero(dim);
    d.gauge = OperatorPair::reflected(SystemOperator::scalar(dim, C64::new(-2.0, 0.0)));
    d
}

/// Second-order part `dx · dy`, collected through [`table_product`].
pub fn ito_product(left: &PairQsde, right: &PairQsde) -> Result<PairQsde> {
    check_dim(left.dim(), right.dim())?;
    let mut out = PairQsde::zero(left.dim());
    for a in BasisDifferential::ALL {
        for b in BasisDifferential::ALL {
            if let Some(target) = table_product(a, b) {
                let term = left.slot(a).compose(right.slot(b));
                let slot = out.slot_mut(target);
                *slot = &*slot + &term;
            }
        }
    }
    Ok(out)
}

/// Differential of the product process: `d(xy) = dx·y + x·dy + dx·dy`.
///
/// Pair coefficients multiply with the `∘`-product, which encodes
/// `J^2 = 1` and `J` commuting with system operators.
pub fn pair_product_rule(
    left: &PairQsde,
    left_value: &OperatorPair,
    right: &PairQsde,
    right_value: &OperatorPair,
) -> Result<PairQsde> {
    let d = left.dim();
    check_dim(d, left_value.dim())?;
    check_dim(d, right.dim())?;
    check_dim(d, right_value.dim())?;
    let mut out = ito_product(left, right)?;
    for b in BasisDifferential::ALL {
        let first = left.slot(b).compose(right_value);
        let second = left_value.compose(right.slot(b));
        let slot = out.slot_mut(b);
        *slot = &(&*slot + &first) + &second;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{random_with, OperatorKind};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use BasisDifferential::*;

    fn random_pair(rng: &mut ChaCha8Rng, dim: usize) -> OperatorPair {
        OperatorPair::new(
            random_with(OperatorKind::General, dim, rng),
            random_with(OperatorKind::General, dim, rng),
        )
        .unwrap()
    }

    fn random_qsde(rng: &mut ChaCha8Rng, dim: usize) -> PairQsde {
        PairQsde::new(
            random_pair(rng, dim),
            random_pair(rng, dim),
            random_pair(rng, dim),
            random_pair(rng, dim),
        )
        .unwrap()
    }

    fn close(a: &PairQsde, b: &PairQsde, tol: f64) -> bool {
        BasisDifferential::ALL
            .iter()
            .all(|&s| (a.slot(s) - b.slot(s)).op_norm() <= tol)
    }

    #[test]
    fn table_examples() {
        assert_eq!(table_product(Ann, Cre), Some(Time));
        assert_eq!(table_product(Cre, Ann), None);
        assert_eq!(table_product(Time, Gauge), None);
    }

    #[test]
    fn table_has_exactly_four_nonzero_entries() {
        let nonzero = BasisDifferential::ALL
            .iter()
            .flat_map(|&a| BasisDifferential::ALL.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| table_product(a, b).is_some())
            .count();
        assert_eq!(nonzero, 4);
        for b in BasisDifferential::ALL {
            assert_eq!(table_product(Cre, b), None);
            assert_eq!(table_product(Time, b), None);
            assert_eq!(table_product(b, Time), None);
            assert_eq!(table_product(b, Ann), None);
        }
    }

    #[test]
    fn parse_round_trips_symbols() {
        for b in BasisDifferential::ALL {
            assert_eq!(BasisDifferential::parse(b.symbol()).unwrap(), b);
        }
        assert!(BasisDifferential::parse("dB").is_err());
    }

    #[test]
    fn adjoint_of_zero_is_zero() {
        let z = QsdeCoefficients::zero(2, true);
        assert_eq!(qsde_adjoint(&z), z);
    }

    #[test]
    fn adjoint_of_unitary_evolution_coefficients() {
        // dU = -((iH + L*L/2) dt + L*W dF - L dF† + (1 - W) dΛ) U
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_with(OperatorKind::Hermitian, 2, &mut rng);
        let l = random_with(OperatorKind::General, 2, &mut rng);
        let w = random_with(OperatorKind::Unitary, 2, &mut rng);
        let id = SystemOperator::identity(2);
        let half_ll = (&l.adjoint() * &l).scale_real(0.5);
        let forward = QsdeCoefficients::new(
            -(&id - &w),
            -(&l.adjoint() * &w),
            l.clone(),
            -(&h.scale(C64::new(0.0, 1.0)) + &half_ll),
            true,
        )
        .unwrap();
        let adj = qsde_adjoint(&forward);
        // dU* = -U* ((-iH + L*L/2) dt - L* dF + W*L dF† + (1 - W*) dΛ)
        let tol = 1e-14;
        assert!((&adj.time + &(&h.scale(C64::new(0.0, -1.0)) + &half_ll)).max_abs_entry() < tol);
        assert!((&adj.ann - &l.adjoint()).max_abs_entry() < tol);
        assert!((&adj.cre + &(&w.adjoint() * &l)).max_abs_entry() < tol);
        assert!((&adj.gauge + &(&id - &w.adjoint())).max_abs_entry() < tol);
        assert!(adj.j_dressed);
        assert_eq!(qsde_adjoint(&adj), forward);
    }

    #[test]
    fn product_rule_with_constant_identity_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let left = random_qsde(&mut rng, 2);
        let x = random_pair(&mut rng, 2);
        let out = pair_product_rule(&left, &x, &PairQsde::zero(2), &OperatorPair::identity(2)).unwrap();
        assert!(close(&out, &left, 1e-14));
    }

    #[test]
    fn reflection_squares_to_constant() {
        let dj = reflection_differential(1);
        let j = OperatorPair::reflection(1);
        let out = pair_product_rule(&dj, &j, &dj, &j).unwrap();
        assert!(out.op_norm() < 1e-15);
        // Without the Itô correction the first-order terms alone give -4 dΛ.
        assert!((out.gauge.t_part().get(0, 0).re).abs() < 1e-15);
    }

    #[test]
    fn product_rule_rejects_mismatched_dims() {
        let a = PairQsde::zero(2);
        let b = PairQsde::zero(3);
        assert!(pair_product_rule(&a, &OperatorPair::identity(2), &b, &OperatorPair::identity(3)).is_err());
    }

    proptest! {
        #[test]
        fn ito_product_is_bilinear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dx1 = random_qsde(&mut rng, 2);
            let dx2 = random_qsde(&mut rng, 2);
            let dy = random_qsde(&mut rng, 2);
            let ca = C64::new(a, 0.5 * b);
            let cb = C64::new(b, -a);
            let lhs = ito_product(&dx1.scale(ca).add(&dx2).unwrap(), &dy.scale(cb)).unwrap();
            let rhs = ito_product(&dx1, &dy).unwrap().scale(ca * cb)
                .add(&ito_product(&dx2, &dy).unwrap().scale(cb)).unwrap();
            prop_assert!(close(&lhs, &rhs, 1e-11));
        }

        #[test]
        fn triple_products_associate(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (dx, dy, dz) = (random_qsde(&mut rng, 2), random_qsde(&mut rng, 2), random_qsde(&mut rng, 2));
            let (x, y, z) = (random_pair(&mut rng, 2), random_pair(&mut rng, 2), random_pair(&mut rng, 2));
            let dxy = pair_product_rule(&dx, &x, &dy, &y).unwrap();
            let left = pair_product_rule(&dxy, &x.circ(&y).unwrap(), &dz, &z).unwrap();
            let dyz = pair_product_rule(&dy, &y, &dz, &z).unwrap();
            let right = pair_product_rule(&dx, &x, &dyz, &y.circ(&z).unwrap()).unwrap();
            prop_assert!(close(&left, &right, 1e-12 * (1.0 + left.op_norm())));
        }
    }
}
