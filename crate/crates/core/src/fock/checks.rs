use alloc::vec::Vec;

use nalgebra::DVector;

use super::state::{reflection_to, sum_inner, FockAmplitudes, ProductState};
use super::Lattice;
use crate::error::{check_dim, Error, Result};
use crate::ito::QsdeCoefficients;
use crate::operator::{SystemOperator, C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseKind {
    /// `B_t = A_t + A†_t`
    Brownian,
    /// `P_t = Λ_t + √λ (A_t + A†_t) + λ t`
    Poisson { intensity: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharacteristicValue {
    pub value: C64,
    /// Time actually used, `⌊t/Δ⌋ Δ`.
    pub effective_time: f64,
    /// Set when `t` was not on the grid and had to be rounded down.
    pub snapped: bool,
}

/// `⟨0| e^{i s (a |1⟩⟨1| + b σx)} |0⟩`.
fn slice_vacuum_exp(s: f64, a: f64, b: f64) -> C64 {
    let r = libm::sqrt(b * b + a * a / 4.0);
    let (sin_term, cos_term) = if r == 0.0 {
        (s, 1.0)
    } else {
        (libm::sin(s * r) / r, libm::cos(s * r))
    };
    let phase = C64::from_polar(1.0, s * a / 2.0);
    phase * C64::new(cos_term, -sin_term * a / 2.0)
}

/// Vacuum characteristic functional `⟨ψ(0), e^{i s X_t} ψ(0)⟩` of the
/// lattice process, evaluated exactly slice by slice (the slice terms
/// commute).
pub fn characteristic_functional(
    kind: NoiseKind,
    s: f64,
    t: f64,
    lattice: &Lattice,
) -> Result<CharacteristicValue> {
    if !s.is_finite() {
        return Err(Error::InvalidArgument("s must be finite".into()));
    }
    let (m, snapped) = lattice.snap(t)?;
    let delta = lattice.step();
    let per_slice = match kind {
        NoiseKind::Brownian => slice_vacuum_exp(s, 0.0, libm::sqrt(delta)),
        NoiseKind::Poisson { intensity } => {
            if !(intensity.is_finite() && intensity > 0.0) {
                return Err(Error::InvalidArgument("Poisson intensity must be positive".into()));
            }
            let drift = C64::from_polar(1.0, s * intensity * delta);
            drift * slice_vacuum_exp(s, 1.0, libm::sqrt(intensity * delta))
        }
    };
    Ok(CharacteristicValue {
        value: per_slice.powu(m as u32),
        effective_time: lattice.time(m),
        snapped,
    })
}

fn fermion_sum<S: FockAmplitudes>(state: &S, m: usize, creation: bool) -> S {
    let mut out = state.zeros_like();
    for k in 1..=m {
        out.axpy(ONE, &state.fermion(k, creation));
    }
    out
}

/// `‖({F_t, F†_t} - t) ψ‖ / ‖ψ‖` with `F_t = Σ_{k ≤ t/Δ} J_{k-1} ΔA_k`.
/// Works on dense and sparse vectors; `t` is rounded down to the grid.
pub fn check_anticommutation<S: FockAmplitudes>(t: f64, state: &S) -> Result<f64> {
    let lattice = *state.lattice();
    let (m, _) = lattice.snap(t)?;
    let norm = state.norm();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("state has zero norm".into()));
    }
    let f_dag = fermion_sum(state, m, true);
    let f = fermion_sum(state, m, false);
    let mut acc = fermion_sum(&f_dag, m, false);
    acc.axpy(ONE, &fermion_sum(&f, m, true));
    acc.axpy(C64::new(-lattice.time(m), 0.0), state);
    Ok(acc.norm() / norm)
}

/// Alias of [`check_anticommutation`] kept for call sites holding a
/// [`super::SparseState`].
pub fn check_anticommutation_sparse(t: f64, state: &super::SparseState) -> Result<f64> {
    check_anticommutation(t, state)
}

/// `‖F†_t F†_t ψ‖`.
pub fn fermion_square_norm<S: FockAmplitudes>(t: f64, state: &S) -> Result<f64> {
    let (m, _) = state.lattice().snap(t)?;
    let once = fermion_sum(state, m, true);
    Ok(fermion_sum(&once, m, true).norm())
}

#[derive(Clone, Debug, PartialEq)]
pub enum LemmaKind {
    /// `⟨uψ(f), M(t) vψ(g)⟩ = ∫ ⟨uψ(f), (f̄g E + g F + f̄ G + H) vψ(g)⟩ ds`
    First,
    /// The inner-product identity for `⟨M(t) uψ(f), M'(t) vψ(g)⟩`, with
    /// `M'` built from these coefficients.
    Second { primed: QsdeCoefficients },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaReport {
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
    pub slices_used: usize,
    pub snapped: bool,
}

/// `(E ΔΛ_k + F ΔA_k + G ΔA†_k + H Δ) J_{k-1}^? ψ` as a list of product
/// states.
fn increment_terms(
    lattice: &Lattice,
    c: &QsdeCoefficients,
    k: usize,
    psi: &ProductState,
    out: &mut Vec<ProductState>,
) -> Result<()> {
    let ops = lattice.slice_operators();
    let pre = if c.j_dressed {
        reflection_to(lattice, k - 1)?.apply_product(psi)?
    } else {
        psi.clone()
    };
    let candidates = [
        pre.apply_slice(k, &ops.num)?.apply_system(&c.gauge)?,
        pre.apply_slice(k, &ops.ann)?.apply_system(&c.ann)?,
        pre.apply_slice(k, &ops.cre)?.apply_system(&c.cre)?,
        pre.apply_system(&c.time.scale_real(lattice.step()))?,
    ];
    out.extend(candidates.into_iter().filter(|p| !p.is_zero()));
    Ok(())
}

/// `(w_ann E + w_f F + w_g G + H)` applied to `J_{k-1}^? ψ`.
fn integrand(
    lattice: &Lattice,
    c: &QsdeCoefficients,
    k: usize,
    weights: [C64; 3],
    psi: &ProductState,
) -> Result<ProductState> {
    let op: SystemOperator = &(&(&c.gauge.scale(weights[0]) + &c.ann.scale(weights[1])) + &c.cre.scale(weights[2])) + &c.time;
    let pre = if c.j_dressed {
        reflection_to(lattice, k - 1)?.apply_product(psi)?
    } else {
        psi.clone()
    };
    pre.apply_system(&op)
}

/// Compares the discrete stochastic integral with the fundamental lemma
/// evaluated as a left-endpoint Riemann sum; the residual is `|lhs - rhs|`.
#[allow(clippy::too_many_arguments)]
pub fn check_fundamental_lemma(
    kind: &LemmaKind,
    c: &QsdeCoefficients,
    lattice: &Lattice,
    u: &DVector<C64>,
    v: &DVector<C64>,
    f: &[C64],
    g: &[C64],
    t: f64,
) -> Result<LemmaReport> {
    let d = lattice.system_dim();
    check_dim(d, c.dim())?;
    if let LemmaKind::Second { primed } = kind {
        check_dim(d, primed.dim())?;
    }
    let (m, snapped) = lattice.snap(t)?;
    let delta = C64::new(lattice.step(), 0.0);
    let psi_f = ProductState::exponential(lattice, u, f)?;
    let psi_g = ProductState::exponential(lattice, v, g)?;

    let (lhs, rhs) = match kind {
        LemmaKind::First => {
            let mut terms = Vec::new();
            let mut rhs = ZERO;
            for k in 1..=m {
                increment_terms(lattice, c, k, &psi_g, &mut terms)?;
                let (fk, gk) = (f[k - 1], g[k - 1]);
                let w = [fk.conj() * gk, gk, fk.conj()];
                rhs += delta * psi_f.inner(&integrand(lattice, c, k, w, &psi_g)?);
            }
            let lhs = terms.iter().map(|p| psi_f.inner(p)).fold(ZERO, |a, b| a + b);
            (lhs, rhs)
        }
        LemmaKind::Second { primed } => {
            let mut m_f: Vec<ProductState> = Vec::new();
            let mut m_g: Vec<ProductState> = Vec::new();
            let mut rhs = ZERO;
            for k in 1..=m {
                let (fk, gk) = (f[k - 1], g[k - 1]);
                let right = integrand(lattice, primed, k, [fk.conj() * gk, gk, fk.conj()], &psi_g)?;
                let left = integrand(lattice, c, k, [gk.conj() * fk, fk, gk.conj()], &psi_f)?;
                let mut gauge_left = integrand(lattice, c, k, [fk, ZERO, ONE], &psi_f)?;
                let mut gauge_right = integrand(lattice, primed, k, [gk, ZERO, ONE], &psi_g)?;
                // (f E + G) and (g E' + G') carry no time part
                let strip_time = |p: &ProductState, coeffs: &QsdeCoefficients| -> Result<ProductState> {
                    let pre = if coeffs.j_dressed {
                        reflection_to(lattice, k - 1)?.apply_product(p)?
                    } else {
                        p.clone()
                    };
                    pre.apply_system(&coeffs.time)
                };
                let tl = strip_time(&psi_f, c)?;
                let tr = strip_time(&psi_g, primed)?;
                gauge_left.system -= &tl.system;
                gauge_right.system -= &tr.system;

                let mut term = sum_inner(&m_f, core::slice::from_ref(&right));
                term += sum_inner(core::slice::from_ref(&left), &m_g);
                term += gauge_left.inner(&gauge_right);
                rhs += delta * term;

                increment_terms(lattice, c, k, &psi_f, &mut m_f)?;
                increment_terms(lattice, primed, k, &psi_g, &mut m_g)?;
            }
            (sum_inner(&m_f, &m_g), rhs)
        }
    };
    Ok(LemmaReport {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        slices_used: m,
        snapped,
    })
}
