//! The Riccati equation `i[H, Π] ± Π² + X² = 0` and a Newton solver.

use alloc::vec::Vec;

use super::sylvester::solve_sylvester;
use crate::error::{check_dim, Error, Result};
use crate::operator::{commutator, sqrt_psd, SystemOperator, Tolerance, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RiccatiSign {
    /// `i[H, Π] + Π² + X² = 0`
    Plus,
    /// `i[H, Π] - Π² + X² = 0`
    Minus,
}

impl RiccatiSign {
    pub fn value(self) -> f64 {
        match self {
            RiccatiSign::Plus => 1.0,
            RiccatiSign::Minus => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RiccatiSign::Plus => "plus",
            RiccatiSign::Minus => "minus",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(RiccatiSign::Plus),
            "minus" | "-" => Ok(RiccatiSign::Minus),
            _ => Err(Error::InvalidArgument(alloc::format!("unknown Riccati sign `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiProblem {
    h: SystemOperator,
    x: SystemOperator,
    sign: RiccatiSign,
}

fn require_hermitian(what: &'static str, op: &SystemOperator, tol: Tolerance) -> Result<()> {
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

impl RiccatiProblem {
    pub fn new(h: SystemOperator, x: SystemOperator, sign: RiccatiSign, tol: Tolerance) -> Result<Self> {
        check_dim(h.dim(), x.dim())?;
        require_hermitian("H", &h, tol)?;
        require_hermitian("X", &x, tol)?;
        Ok(RiccatiProblem { h, x, sign })
    }

    pub fn h(&self) -> &SystemOperator {
        &self.h
    }

    pub fn x(&self) -> &SystemOperator {
        &self.x
    }

    pub fn sign(&self) -> RiccatiSign {
        self.sign
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }
}

/// `i[H, Π] + sign·Π² + X²`.
pub fn riccati_residual(p: &RiccatiProblem, pi: &SystemOperator) -> Result<SystemOperator> {
    check_dim(p.dim(), pi.dim())?;
    let comm = commutator(&p.h, pi)?.scale(C64::new(0.0, 1.0));
    Ok(&(&comm + &(pi * pi).scale_real(p.sign.value())) + &(&p.x * &p.x))
}

/// `|tr R(Π) - sign·tr Π² - tr X²|`; zero up to rounding because the
/// commutator is traceless.
pub fn trace_identity_defect(p: &RiccatiProblem, pi: &SystemOperator) -> Result<f64> {
    let r = riccati_residual(p, pi)?;
    let expected = (pi * pi).trace() * p.sign.value() + (&p.x * &p.x).trace();
    Ok((r.trace() - expected).norm())
}

#[derive(Clone, Debug, PartialEq)]
pub enum RiccatiFailure {
    /// A Newton step hit a singular Sylvester operator.
    SingularSylvester { detail: alloc::string::String },
    /// No convergence within the iteration budget.
    MaxIterations { residual: f64 },
    /// With the plus sign, `tr R(Π) = tr Π² + tr X² ≥ tr X² > 0`, so no
    /// solution exists unless `X = 0`.
    TraceObstruction { trace_x_squared: f64, residual: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiSolution {
    pub pi: SystemOperator,
    pub residual: f64,
    pub iterations: usize,
    pub positive: bool,
    pub sign: RiccatiSign,
    /// Residual norm before each step and after the last one.
    pub history: Vec<f64>,
    pub failure: Option<RiccatiFailure>,
}

impl RiccatiSolution {
    pub fn converged(&self) -> bool {
        self.failure.is_none()
    }
}

/// `sqrt(X² + 1e-6)`.
pub fn default_initial_guess(p: &RiccatiProblem) -> Result<SystemOperator> {
    let x2 = &p.x * &p.x;
    sqrt_psd(&(&x2 + &SystemOperator::scalar(p.dim(), C64::new(1e-6, 0.0))), Tolerance::DEFAULT)
}

/// Newton iteration: each step solves
/// `(iH + sΠ) Δ + Δ (sΠ - iH) = -R(Π)` and symmetrizes `Π + Δ`.
pub fn newton_solve(
    p: &RiccatiProblem,
    pi0: Option<&SystemOperator>,
    tol: Tolerance,
    max_iter: usize,
) -> Result<RiccatiSolution> {
    let mut pi = match pi0 {
        Some(p0) => {
            check_dim(p.dim(), p0.dim())?;
            require_hermitian("initial Π", p0, Tolerance::DEFAULT)?;
            p0.clone()
        }
        None => default_initial_guess(p)?,
    };
    let s = p.sign.value();
    let ih = p.h.scale(C64::new(0.0, 1.0));
    let psd_tol = Tolerance::new(1e-10)?;
    let finish = |pi: SystemOperator, iterations: usize, history: Vec<f64>, failure: Option<RiccatiFailure>| {
        let residual = *history.last().unwrap_or(&f64::NAN);
        let failure = match failure {
            Some(f) if p.sign == RiccatiSign::Plus => {
                let trace_x_squared = (&p.x * &p.x).trace().re;
                if trace_x_squared > tol.value() {
                    Some(RiccatiFailure::TraceObstruction {
                        trace_x_squared,
                        residual,
                    })
                } else {
                    Some(f)
                }
            }
            other => other,
        };
        RiccatiSolution {
            positive: pi.is_positive_semidefinite(psd_tol),
            pi,
            residual,
            iterations,
            sign: p.sign,
            history,
            failure,
        }
    };

    let mut history = Vec::new();
    for iter in 0..=max_iter {
        let r = riccati_residual(p, &pi)?;
        let norm = r.op_norm();
        history.push(norm);
        if !norm.is_finite() {
            return Ok(finish(pi, iter, history, Some(RiccatiFailure::MaxIterations { residual: norm })));
        }
        if norm <= tol.value() {
            return Ok(finish(pi, iter, history, None));
        }
        if iter == max_iter {
            break;
        }
        let a = &ih + &pi.scale_real(s);
        let b = &pi.scale_real(s) - &ih;
        let delta = match solve_sylvester(&a, &b, &(-&r)) {
            Ok(d) => d,
            Err(Error::Singular { detail, .. }) => {
                return Ok(finish(pi, iter, history, Some(RiccatiFailure::SingularSylvester { detail })));
            }
            Err(e) => return Err(e),
        };
        pi = (&pi + &delta).hermitian_part();
    }
    let residual = *history.last().unwrap();
    Ok(finish(pi, max_iter, history, Some(RiccatiFailure::MaxIterations { residual })))
}
