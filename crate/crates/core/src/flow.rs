//! Fermion flows `φ_t(T, S) = V_t* (T + S J_t) V_t` and their structure maps.
//!
//! The coefficients of `dφ_t` are derived mechanically: the three-factor
//! product `V* · (T + S J) · V` is expanded with [`pair_product_rule`],
//! using `dV = (α dt + β J dA + γ J dA† + δ dΛ) V` and `dJ = -2 J dΛ`.
//! [`transcribed_theta`] keeps the closed-form maps exactly as they are
//! usually printed so the two can be compared slot by slot.

use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::ito::{pair_product_rule, reflection_differential, BasisDifferential, PairQsde, QsdeCoefficients};
use crate::operator::{anticommutator, commutator, SystemOperator, Tolerance, C64};
use crate::pair::OperatorPair;

/// Coefficient pairs `θ1(x)..θ4(x)` of `dφ_t(x)` along `dt, dA, dA†, dΛ`.
pub type FlowIncrement = PairQsde;

/// `α, β, γ, δ` of `dV = (α dt + β dF + γ dF† + δ dΛ) V`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionCoefficients {
    pub alpha: SystemOperator,
    pub beta: SystemOperator,
    pub gamma: SystemOperator,
    pub delta: SystemOperator,
}

impl EvolutionCoefficients {
    pub fn new(
        alpha: SystemOperator,
        beta: SystemOperator,
        gamma: SystemOperator,
        delta: SystemOperator,
    ) -> Result<Self> {
        let d = alpha.dim();
        check_dim(d, beta.dim())?;
        check_dim(d, gamma.dim())?;
        check_dim(d, delta.dim())?;
        Ok(EvolutionCoefficients {
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    pub fn zero(dim: usize) -> Self {
        let z = SystemOperator::zeros(dim);
        EvolutionCoefficients {
            alpha: z.clone(),
            beta: z.clone(),
            gamma: z.clone(),
            delta: z,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    /// The same evolution as `J`-dressed QSDE coefficients.
    pub fn to_qsde(&self) -> QsdeCoefficients {
        QsdeCoefficients {
            gauge: self.delta.clone(),
            ann: self.beta.clone(),
            cre: self.gamma.clone(),
            time: self.alpha.clone(),
            j_dressed: true,
        }
    }

    pub fn from_qsde(c: &QsdeCoefficients) -> Result<Self> {
        if !c.j_dressed {
            return Err(Error::InvalidArgument(
                "flow coefficients must be J-dressed (dF = J dA, dF† = J dA†)".into(),
            ));
        }
        Ok(EvolutionCoefficients {
            alpha: c.time.clone(),
            beta: c.ann.clone(),
            gamma: c.cre.clone(),
            delta: c.gauge.clone(),
        })
    }

    /// `α + α* + γ*γ`; vanishes for coefficients of a unitary evolution.
    pub fn isometry_defect(&self) -> SystemOperator {
        &(&self.alpha + &self.alpha.adjoint()) + &(&self.gamma.adjoint() * &self.gamma)
    }
}

fn check_hermitian(what: &'static str, op: &SystemOperator, tol: Tolerance) -> Result<()> {
    let deviation = op.hermiticity_defect();
    if deviation > tol.value() {
        return Err(Error::Precondition {
            what,
            property: "Hermitian",
            deviation,
            tolerance: tol.value(),
        });
    }
    Ok(())
}

fn check_unitary(what: &'static str, op: &SystemOperator, tol: Tolerance) -> Result<()> {
    let deviation = op.unitarity_defect();
    if deviation > tol.value() {
        return Err(Error::Precondition {
            what,
            property: "unitary",
            deviation,
            tolerance: tol.value(),
        });
    }
    Ok(())
}

/// Coefficients of the unitary fermion evolution driven by `(H, L, W)`:
/// `α = -(iH + L*L/2)`, `β = -L*W`, `γ = L`, `δ = W - 1`.
pub fn unitary_coefficients(
    h: &SystemOperator,
    l: &SystemOperator,
    w: &SystemOperator,
    tol: Tolerance,
) -> Result<EvolutionCoefficients> {
    check_dim(h.dim(), l.dim())?;
    check_dim(h.dim(), w.dim())?;
    check_hermitian("H", h, tol)?;
    check_unitary("W", w, tol)?;
    let id = SystemOperator::identity(h.dim());
    let l_star = l.adjoint();
    let alpha = -(&h.scale(C64::new(0.0, 1.0)) + &(&l_star * l).scale_real(0.5));
    let beta = -(&l_star * w);
    Ok(EvolutionCoefficients {
        alpha,
        beta,
        gamma: l.clone(),
        delta: w - &id,
    })
}

/// Mechanical derivation of `dφ_t(x)` for `x = (T, S)`.
pub fn derive_flow_increment(c: &EvolutionCoefficients, x: &OperatorPair) -> Result<FlowIncrement> {
    let d = c.dim();
    check_dim(d, x.dim())?;
    let id = OperatorPair::identity(d);
    let generator = c.to_qsde().to_pair_qsde();

    // d(T + S J) = S dJ, as the product of the constant S with J.
    let d_value = pair_product_rule(
        &PairQsde::zero(d),
        &OperatorPair::system(x.j_part().clone()),
        &reflection_differential(d),
        &OperatorPair::reflection(d),
    )?;
    // (T + S J) V, evaluated in the frame where V_t = 1.
    let d_right = pair_product_rule(&d_value, x, &generator, &id)?;
    // V* (T + S J) V
    pair_product_rule(&generator.adjoint(), &id, &d_right, x)
}

/// The structure maps `θ1..θ4` in their commonly printed closed form.
pub fn transcribed_theta(c: &EvolutionCoefficients, x: &OperatorPair) -> Result<FlowIncrement> {
    check_dim(c.dim(), x.dim())?;
    let (a, b, g, dl) = (&c.alpha, &c.beta, &c.gamma, &c.delta);
    let (a_s, b_s, g_s, dl_s) = (a.adjoint(), b.adjoint(), g.adjoint(), dl.adjoint());
    let t = x.t_part();
    let s = x.j_part();
    let two = SystemOperator::scalar(c.dim(), C64::new(2.0, 0.0));

    let theta1 = OperatorPair::new(
        &(&(&a_s * t) + &(t * a)) + &(&(&g_s * t) * g),
        &(&(&a_s * s) + &(s * a)) + &(&(&g_s * s) * g),
    )?;
    let theta2 = OperatorPair::new(
        &(&(&g_s * s) + &(s * b)) - &(&(&g_s * s) * &(&two + dl)),
        &(&(&g_s * t) + &(t * b)) + &(&(&g_s * t) * dl),
    )?;
    let theta3 = OperatorPair::new(
        &(&(&b_s * s) + &(s * g)) - &(&(&dl_s * s) * g),
        &(&(&b_s * t) + &(t * g)) + &(&(&dl_s * t) * g),
    )?;
    let theta4 = OperatorPair::new(
        &(&(&dl_s * t) + &(t * dl)) + &(&(&dl_s * t) * dl),
        -(&(&(&s.scale_real(2.0) + &(s * dl)) + &(&dl_s * s)) + &(&(&dl_s * s) * dl)),
    )?;
    PairQsde::new(theta1, theta2, theta3, theta4)
}

/// One of the eight `(differential, slot)` positions of a flow increment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotDiff {
    pub name: &'static str,
    pub residual: f64,
    pub agree: bool,
}

/// Slot-by-slot comparison of derived and printed structure maps.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffReport {
    pub slots: [SlotDiff; 8],
    pub agree: bool,
    pub tolerance: f64,
}

impl DiffReport {
    pub fn slot(&self, name: &str) -> Option<&SlotDiff> {
        self.slots.iter().find(|s| s.name == name)
    }

    pub fn disagreeing(&self) -> Vec<&'static str> {
        self.slots.iter().filter(|s| !s.agree).map(|s| s.name).collect()
    }
}

pub const SLOT_NAMES: [&str; 8] = [
    "dt.t", "dt.j", "dA.t", "dA.j", "dAdag.t", "dAdag.j", "dL.t", "dL.j",
];

/// Per-slot operator-norm differences between two increments, in
/// [`SLOT_NAMES`] order.
pub fn slot_differences(a: &FlowIncrement, b: &FlowIncrement) -> Result<[f64; 8]> {
    check_dim(a.dim(), b.dim())?;
    let mut out = [0.0; 8];
    for (i, diff) in BasisDifferential::ALL.iter().enumerate() {
        let pa = a.slot(*diff);
        let pb = b.slot(*diff);
        out[2 * i] = (pa.t_part() - pb.t_part()).op_norm();
        out[2 * i + 1] = (pa.j_part() - pb.j_part()).op_norm();
    }
    Ok(out)
}

/// Compares [`derive_flow_increment`] with [`transcribed_theta`].
pub fn compare_with_printed(
    c: &EvolutionCoefficients,
    x: &OperatorPair,
    tol: Tolerance,
) -> Result<DiffReport> {
    let derived = derive_flow_increment(c, x)?;
    let printed = transcribed_theta(c, x)?;
    let diffs = slot_differences(&derived, &printed)?;
    let slots = core::array::from_fn(|i| SlotDiff {
        name: SLOT_NAMES[i],
        residual: diffs[i],
        agree: diffs[i] <= tol.value(),
    });
    let agree = diffs.iter().all(|&r| r <= tol.value());
    Ok(DiffReport {
        slots,
        agree,
        tolerance: tol.value(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowKind {
    /// `j_t(X) = φ_t(X, 0)`
    Flow,
    /// `r_t(X) = j_t(X J_t) = φ_t(0, X)`
    Reflected,
}

/// Flow or reflected-flow increment for the unitary evolution `(H, L, W)`.
pub fn fermion_flow_coeffs(
    h: &SystemOperator,
    l: &SystemOperator,
    w: &SystemOperator,
    x: &SystemOperator,
    which: FlowKind,
    tol: Tolerance,
) -> Result<FlowIncrement> {
    let c = unitary_coefficients(h, l, w, tol)?;
    check_dim(c.dim(), x.dim())?;
    let pair = match which {
        FlowKind::Flow => OperatorPair::system(x.clone()),
        FlowKind::Reflected => OperatorPair::reflected(x.clone()),
    };
    derive_flow_increment(&c, &pair)
}

/// `i[H, X] - (L*L X + X L*L - 2 L* X L) / 2`.
pub fn lindblad_generator(
    h: &SystemOperator,
    l: &SystemOperator,
    x: &SystemOperator,
) -> Result<SystemOperator> {
    check_dim(h.dim(), l.dim())?;
    check_dim(h.dim(), x.dim())?;
    let l_star = l.adjoint();
    let ll = &l_star * l;
    let dissipator = &(&(&ll * x) + &(x * &ll)) - &(&(&l_star * x) * l).scale_real(2.0);
    Ok(&commutator(h, x)?.scale(C64::new(0.0, 1.0)) - &dissipator.scale_real(0.5))
}

/// Closed-form flow equations as usually printed for `j_t(X)` and `r_t(X)`.
pub fn printed_flow_coeffs(
    h: &SystemOperator,
    l: &SystemOperator,
    w: &SystemOperator,
    x: &SystemOperator,
    which: FlowKind,
) -> Result<FlowIncrement> {
    check_dim(h.dim(), w.dim())?;
    let lindblad = lindblad_generator(h, l, x)?;
    let l_star = l.adjoint();
    let w_star = w.adjoint();
    let conj = &(&w_star * x) * w;
    match which {
        FlowKind::Flow => PairQsde::new(
            OperatorPair::system(lindblad),
            OperatorPair::reflected(&commutator(&l_star, x)? * w),
            OperatorPair::reflected(&w_star * &commutator(x, l)?),
            OperatorPair::system(&conj - x),
        ),
        FlowKind::Reflected => PairQsde::new(
            OperatorPair::reflected(lindblad),
            OperatorPair::system(-(&anticommutator(&l_star, x)? * w)),
            OperatorPair::system(-(&(&w_star * &anticommutator(x, l)?) - &(x * l).scale_real(2.0))),
            OperatorPair::reflected(-(&conj + x)),
        ),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaSource {
    Derived,
    Printed,
}

/// Residual norms of the nine structure equations, `values[i]` for `(s{i+1})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureResiduals {
    pub values: [f64; 9],
}

impl StructureResiduals {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn homomorphism(&self) -> &[f64] {
        &self.values[0..4]
    }

    pub fn adjoint(&self) -> &[f64] {
        &self.values[4..8]
    }

    pub fn identity(&self) -> f64 {
        self.values[8]
    }
}

pub fn theta(source: ThetaSource, c: &EvolutionCoefficients, x: &OperatorPair) -> Result<FlowIncrement> {
    match source {
        ThetaSource::Derived => derive_flow_increment(c, x),
        ThetaSource::Printed => transcribed_theta(c, x),
    }
}

/// Residuals of the structure equations at `(x, y)`; `(s9)` is evaluated at
/// the identity. Pair residuals are measured with [`OperatorPair::op_norm`].
///
/// The product terms follow the Itô table: the `dA†` equation pairs
/// `θ4(x)` with `θ3(y)`, because `dΛ·dA† = dA†` while `dA†·dΛ = 0`.
pub fn structure_residuals(
    source: ThetaSource,
    c: &EvolutionCoefficients,
    x: &OperatorPair,
    y: &OperatorPair,
) -> Result<StructureResiduals> {
    let d = c.dim();
    check_dim(d, x.dim())?;
    check_dim(d, y.dim())?;
    let tx = theta(source, c, x)?;
    let ty = theta(source, c, y)?;
    let xy = x.compose(y);
    let txy = theta(source, c, &xy)?;

    let first_order = |b: BasisDifferential| &tx.slot(b).compose(y) + &x.compose(ty.slot(b));
    let s1 = &(&first_order(BasisDifferential::Time) + &tx.ann.compose(&ty.cre)) - &txy.time;
    let s2 = &(&first_order(BasisDifferential::Ann) + &tx.ann.compose(&ty.gauge)) - &txy.ann;
    let s3 = &(&first_order(BasisDifferential::Cre) + &tx.gauge.compose(&ty.cre)) - &txy.cre;
    let s4 = &(&first_order(BasisDifferential::Gauge) + &tx.gauge.compose(&ty.gauge)) - &txy.gauge;

    let tx_adj = theta(source, c, &x.adjoint())?;
    let s5 = &tx_adj.time - &tx.time.adjoint();
    let s6 = &tx_adj.ann - &tx.cre.adjoint();
    let s7 = &tx_adj.cre - &tx.ann.adjoint();
    let s8 = &tx_adj.gauge - &tx.gauge.adjoint();

    let tid = theta(source, c, &OperatorPair::identity(d))?;
    let s9 = tid.op_norm();

    Ok(StructureResiduals {
        values: [
            s1.op_norm(),
            s2.op_norm(),
            s3.op_norm(),
            s4.op_norm(),
            s5.op_norm(),
            s6.op_norm(),
            s7.op_norm(),
            s8.op_norm(),
            s9,
        ],
    })
}

/// The `dA†` homomorphism residual with the factor order `θ3(x) ∘ θ4(y)`,
/// as it appears in the commonly printed form of the structure equations.
pub fn printed_order_cre_residual(
    source: ThetaSource,
    c: &EvolutionCoefficients,
    x: &OperatorPair,
    y: &OperatorPair,
) -> Result<f64> {
    check_dim(c.dim(), x.dim())?;
    check_dim(c.dim(), y.dim())?;
    let tx = theta(source, c, x)?;
    let ty = theta(source, c, y)?;
    let txy = theta(source, c, &x.compose(y))?;
    let lhs = &(&(&tx.cre.compose(y) + &x.compose(&ty.cre)) + &tx.cre.compose(&ty.gauge)) - &txy.cre;
    Ok(lhs.op_norm())
}
