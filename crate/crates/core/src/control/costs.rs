use crate::error::{check_dim, Result};
use crate::fock::sector::{flow_series_many, sandwich_series};
use crate::fock::{Lattice, ProductState};
use crate::flow::unitary_coefficients;
use crate::operator::{SystemOperator, Tolerance, C64};
use crate::pair::OperatorPair;

/// `∫ [‖X·ξ_t‖² + ¼‖L*L·ξ_t‖²] dt + ½‖L·ξ_T‖²`, split into its parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostBreakdown {
    pub running_x: f64,
    pub running_l: f64,
    pub terminal: f64,
    pub total: f64,
}

impl CostBreakdown {
    fn new(running_x: f64, running_l: f64, terminal: f64) -> Self {
        CostBreakdown {
            running_x,
            running_l,
            terminal,
            total: running_x + running_l + terminal,
        }
    }
}

/// The evolution functional `Q` and its flow (`J`) and reflected-flow
/// (`R`) counterparts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostReport {
    pub q: CostBreakdown,
    pub j: CostBreakdown,
    pub r: CostBreakdown,
}

impl CostReport {
    /// `|Q - J| / Q` and `|Q - R| / Q`.
    pub fn relative_gaps(&self) -> (f64, f64) {
        let q = self.q.total;
        (libm::fabs(q - self.j.total) / q, libm::fabs(q - self.r.total) / q)
    }
}

/// Left-endpoint sums over the Euler grid. `Q` uses `‖O U_t ξ‖²`; `J` and
/// `R` use `‖U_t* O U_t ξ‖²` and `‖U_t* O J_t U_t ξ‖²` with the discrete
/// adjoint propagator.
pub fn evaluate_costs(
    h: &SystemOperator,
    l: &SystemOperator,
    w: &SystemOperator,
    x: &SystemOperator,
    xi: &ProductState,
    lattice: &Lattice,
    tol: Tolerance,
) -> Result<CostReport> {
    check_dim(h.dim(), x.dim())?;
    let c = unitary_coefficients(h, l, w, tol)?.to_qsde();
    let n = lattice.slices();
    let delta = lattice.step();
    let ll = &l.adjoint() * l;
    let riemann = |s: &[C64]| s[..n].iter().map(|z| z.re).sum::<f64>() * delta;

    let q_series = flow_series_many(
        lattice,
        &c,
        xi,
        xi,
        &[
            OperatorPair::system(x * x),
            OperatorPair::system(&ll * &ll),
            OperatorPair::system(ll.clone()),
        ],
    )?;
    let q = CostBreakdown::new(
        riemann(&q_series[0]),
        0.25 * riemann(&q_series[1]),
        0.5 * q_series[2][n].re,
    );

    let flow_cost = |wrap: fn(SystemOperator) -> OperatorPair| -> Result<CostBreakdown> {
        let norm_sq = |o: OperatorPair| sandwich_series(lattice, &c, xi, xi, &o, &o);
        let sx = norm_sq(wrap(x.clone()))?;
        let sl = norm_sq(wrap(ll.clone()))?;
        let st = norm_sq(wrap(l.clone()))?;
        Ok(CostBreakdown::new(riemann(&sx), 0.25 * riemann(&sl), 0.5 * st[n].re))
    };
    Ok(CostReport {
        q,
        j: flow_cost(OperatorPair::system)?,
        r: flow_cost(OperatorPair::reflected)?,
    })
}
