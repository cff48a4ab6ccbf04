use alloc::vec::Vec;

use super::state::{reflection_sign, LatticeState};
use super::Lattice;
use crate::error::{check_dim, Error, Result};
use crate::ito::QsdeCoefficients;
use crate::operator::{SystemOperator, C64};
use crate::pair::OperatorPair;

/// The Euler step on `H ⊗ slice` as a 2×2 block of system operators,
/// `g[out][in]`, for a fixed value `p = ±1` of the reflection on earlier
/// slices:
///
/// ```text
/// g00 = 1 + Δ time        g01 = p √Δ ann
/// g10 = p √Δ cre          g11 = 1 + Δ time + gauge
/// ```
///
/// Without `J`-dressing `p` is always `1`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepBlocks {
    pub g: [[SystemOperator; 2]; 2],
}

pub fn step_blocks(c: &QsdeCoefficients, step: f64, parity_sign: f64) -> StepBlocks {
    let d = c.dim();
    let p = if c.j_dressed { parity_sign } else { 1.0 };
    let r = libm::sqrt(step);
    let id = SystemOperator::identity(d);
    let g00 = &id + &c.time.scale_real(step);
    let g11 = &g00 + &c.gauge;
    StepBlocks {
        g: [
            [g00, c.ann.scale_real(p * r)],
            [c.cre.scale_real(p * r), g11],
        ],
    }
}

impl StepBlocks {
    /// Blocks of the adjoint step: `(g*)[s][t] = g[t][s]†`.
    pub fn adjoint(&self) -> StepBlocks {
        StepBlocks {
            g: [
                [self.g[0][0].adjoint(), self.g[1][0].adjoint()],
                [self.g[0][1].adjoint(), self.g[1][1].adjoint()],
            ],
        }
    }
}

/// Blocks for `p = +1` and `p = -1`.
pub(crate) fn parity_blocks(c: &QsdeCoefficients, step: f64) -> [StepBlocks; 2] {
    [step_blocks(c, step, 1.0), step_blocks(c, step, -1.0)]
}

/// Applies the step acting on slice `j` (1-based), controlled by the
/// parity of slices `1..j`.
pub(crate) fn apply_step(state: &LatticeState, blocks: &[StepBlocks; 2], j: usize) -> LatticeState {
    let lattice = *state.lattice();
    let d = lattice.system_dim();
    let bit = 1usize << (j - 1);
    let mut out = state.clone();
    let src = state.amplitudes().as_slice();
    let dst = out.amplitudes_mut().as_mut_slice();
    for m in 0..(1usize << lattice.slices()) {
        if m & bit != 0 {
            continue;
        }
        let m1 = m | bit;
        let b = if reflection_sign(m as u64, j - 1) > 0.0 {
            &blocks[0]
        } else {
            &blocks[1]
        };
        let x0 = &src[d * m..d * m + d];
        let x1 = &src[d * m1..d * m1 + d];
        for i in 0..d {
            let mut y0 = C64::new(0.0, 0.0);
            let mut y1 = C64::new(0.0, 0.0);
            for l in 0..d {
                y0 += b.g[0][0].matrix()[(i, l)] * x0[l] + b.g[0][1].matrix()[(i, l)] * x1[l];
                y1 += b.g[1][0].matrix()[(i, l)] * x0[l] + b.g[1][1].matrix()[(i, l)] * x1[l];
            }
            dst[i + d * m] = y0;
            dst[i + d * m1] = y1;
        }
    }
    out
}

/// States `U_k ξ` for `k = 0..=n` of an Euler-stepped QSDE.
#[derive(Clone, Debug)]
pub struct Trajectory {
    lattice: Lattice,
    coefficients: QsdeCoefficients,
    times: Vec<f64>,
    states: Vec<LatticeState>,
}

impl Trajectory {
    #[inline]
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    #[inline]
    pub fn coefficients(&self) -> &QsdeCoefficients {
        &self.coefficients
    }

    #[inline]
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    #[inline]
    pub fn states(&self) -> &[LatticeState] {
        &self.states
    }

    pub fn final_state(&self) -> &LatticeState {
        self.states.last().expect("trajectory has at least the initial state")
    }

    pub fn norms(&self) -> Vec<f64> {
        self.states.iter().map(LatticeState::norm).collect()
    }

    /// `|‖ξ_n‖ - ‖ξ_0‖|`.
    pub fn norm_defect(&self) -> f64 {
        libm::fabs(self.final_state().norm() - self.states[0].norm())
    }
}

/// Euler stepping `ξ_{k+1} = ξ_k + (time Δ + ann J_k ΔA_{k+1} +
/// cre J_k ΔA†_{k+1} + gauge ΔΛ_{k+1}) ξ_k`, with `J_k` dropped when the
/// coefficients are not `J`-dressed.
pub fn simulate_evolution(
    lattice: Lattice,
    c: &QsdeCoefficients,
    initial: &LatticeState,
) -> Result<Trajectory> {
    check_dim(lattice.system_dim(), c.dim())?;
    if initial.lattice() != &lattice {
        return Err(Error::InvalidArgument("initial state lives on a different lattice".into()));
    }
    let blocks = parity_blocks(c, lattice.step());
    let mut states = Vec::with_capacity(lattice.slices() + 1);
    states.push(initial.clone());
    for j in 1..=lattice.slices() {
        let next = apply_step(&states[j - 1], &blocks, j);
        states.push(next);
    }
    Ok(Trajectory {
        lattice,
        coefficients: c.clone(),
        times: lattice.times(),
        states,
    })
}

/// `⟨U_k a, (T + S J_k) U_k b⟩` for `k = 0..=n`, from the two forward
/// simulations of `a` and `b`.
pub fn flow_matrix_elements(bra: &Trajectory, ket: &Trajectory, x: &OperatorPair) -> Result<Vec<C64>> {
    if bra.lattice != ket.lattice {
        return Err(Error::InvalidArgument("trajectories live on different lattices".into()));
    }
    check_dim(bra.lattice.system_dim(), x.dim())?;
    bra.states
        .iter()
        .zip(&ket.states)
        .enumerate()
        .map(|(k, (a, b))| Ok(a.inner(&b.apply_pair(x, k)?)))
        .collect()
}

/// `⟨U_k ξ, (T + S J_k) U_k ξ⟩` along one trajectory.
pub fn flow_observable(traj: &Trajectory, x: &OperatorPair) -> Result<Vec<C64>> {
    flow_matrix_elements(traj, traj, x)
}

/// `φ_k(x) ξ = U_k* (T + S J_k) U_k ξ`, with `U_k*` the adjoint of the
/// discrete propagator.
pub fn apply_flow(
    c: &QsdeCoefficients,
    k: usize,
    x: &OperatorPair,
    state: &LatticeState,
) -> Result<LatticeState> {
    let lattice = *state.lattice();
    check_dim(lattice.system_dim(), c.dim())?;
    check_dim(lattice.system_dim(), x.dim())?;
    if k > lattice.slices() {
        return Err(Error::OutOfRange {
            index: k,
            max: lattice.slices(),
        });
    }
    let blocks = parity_blocks(c, lattice.step());
    let adjoint = [blocks[0].adjoint(), blocks[1].adjoint()];
    let mut psi = state.clone();
    for j in 1..=k {
        psi = apply_step(&psi, &blocks, j);
    }
    psi = psi.apply_pair(x, k)?;
    for j in (1..=k).rev() {
        psi = apply_step(&psi, &adjoint, j);
    }
    Ok(psi)
}
