//! Quantum linear regulator: coefficient conditions, instance factory,
//! simulation-backed minimality check and optimal noise coefficients.

use alloc::vec::Vec;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::fock::sector::flow_series_many;
use crate::fock::{Lattice, ProductState};
use crate::ito::QsdeCoefficients;
use crate::operator::{commutator, random_with, sqrt_psd, OperatorKind, SystemOperator, Tolerance, C64};
use crate::pair::OperatorPair;

/// Coefficients of `dU = (F U + u) dt + Ψ U dF + Φ U dF† + Z U dΛ`, the
/// weight `X` and the candidate `Π`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegulatorInstance {
    pub f: SystemOperator,
    pub psi: SystemOperator,
    pub phi: SystemOperator,
    pub z: SystemOperator,
    pub x: SystemOperator,
    pub pi: SystemOperator,
}

fn precondition(what: &'static str, property: &'static str, deviation: f64, tol: Tolerance) -> Result<()> {
    if deviation > tol.value() {
        Err(Error::Precondition {
            what,
            property,
            deviation,
            tolerance: tol.value(),
        })
    } else {
        Ok(())
    }
}

impl RegulatorInstance {
    pub fn new(
        f: SystemOperator,
        psi: SystemOperator,
        phi: SystemOperator,
        z: SystemOperator,
        x: SystemOperator,
        pi: SystemOperator,
        tol: Tolerance,
    ) -> Result<Self> {
        let d = f.dim();
        for op in [&psi, &phi, &z, &x, &pi] {
            check_dim(d, op.dim())?;
        }
        precondition("X", "Hermitian", x.hermiticity_defect(), tol)?;
        precondition("Π", "Hermitian", pi.hermiticity_defect(), tol)?;
        precondition("Π", "positive semidefinite", (-pi.min_eigenvalue()).max(0.0), tol)?;
        Ok(RegulatorInstance { f, psi, phi, z, x, pi })
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }
}

/// Operator norms of
/// `ΠF + F*Π + Φ*ΠΦ - Π² + X²`, `ΠΨ + Φ*Π + Φ*ΠZ` and `ΠZ + Z*Π + Z*ΠZ`.
pub fn regulator_residuals(inst: &RegulatorInstance) -> [f64; 3] {
    let (pi, f, psi, phi, z, x) = (&inst.pi, &inst.f, &inst.psi, &inst.phi, &inst.z, &inst.x);
    let phi_s = phi.adjoint();
    let z_s = z.adjoint();
    let r0 = &(&(&(&(pi * f) + &(&f.adjoint() * pi)) + &(&(&phi_s * pi) * phi)) - &(pi * pi)) + &(x * x);
    let r1 = &(&(pi * psi) + &(&phi_s * pi)) + &(&(&phi_s * pi) * z);
    let r2 = &(&(pi * z) + &(&z_s * pi)) + &(&(&z_s * pi) * z);
    [r0.op_norm(), r1.op_norm(), r2.op_norm()]
}

/// Builds an instance satisfying the regulator conditions: `Z = 0`,
/// `Ψ = -Π⁻¹Φ*Π`, `F = Π⁻¹(S/2 + K)` with `S = Π² - X² - Φ*ΠΦ`.
pub fn construct_instance(
    pi: &SystemOperator,
    phi: &SystemOperator,
    x: &SystemOperator,
    k: &SystemOperator,
    tol: Tolerance,
) -> Result<RegulatorInstance> {
    let d = pi.dim();
    for op in [phi, x, k] {
        check_dim(d, op.dim())?;
    }
    precondition("Π", "Hermitian", pi.hermiticity_defect(), tol)?;
    precondition("X", "Hermitian", x.hermiticity_defect(), tol)?;
    precondition("K", "anti-Hermitian", (k + &k.adjoint()).op_norm(), tol)?;
    if pi.min_eigenvalue() <= tol.value() {
        return Err(Error::Singular {
            what: "Π",
            detail: alloc::format!("smallest eigenvalue {:.3e} is not positive", pi.min_eigenvalue()),
        });
    }
    let pi_inv = pi.inverse()?;
    let phi_s = phi.adjoint();
    let s = &(&(pi * pi) - &(x * x)) - &(&(&phi_s * pi) * phi);
    let f = &pi_inv * &(&s.scale_real(0.5) + k);
    let psi = -(&(&pi_inv * &phi_s) * pi);
    RegulatorInstance::new(f, psi, phi.clone(), SystemOperator::zeros(d), x.clone(), pi.clone(), tol)
}

/// `L = √2 Π^{1/2} W₁`, `W = W₂`.
pub fn optimal_lw(
    pi: &SystemOperator,
    w1: &SystemOperator,
    w2: &SystemOperator,
    tol: Tolerance,
) -> Result<(SystemOperator, SystemOperator)> {
    check_dim(pi.dim(), w1.dim())?;
    check_dim(pi.dim(), w2.dim())?;
    precondition("W1", "unitary", w1.unitarity_defect(), tol)?;
    precondition("W2", "unitary", w2.unitarity_defect(), tol)?;
    precondition("[W1, Π]", "zero", commutator(w1, pi)?.op_norm(), tol)?;
    precondition("[W2, Π]", "zero", commutator(w2, pi)?.op_norm(), tol)?;
    let root = sqrt_psd(pi, tol)?;
    Ok(((&root * w1).scale_real(core::f64::consts::SQRT_2), w2.clone()))
}

/// Norms of `½L*L - Π`, `[L, Π]`, `[W, Π]` and `[L, L*]`.
pub fn optimal_lw_defects(pi: &SystemOperator, l: &SystemOperator, w: &SystemOperator) -> Result<[f64; 4]> {
    let half = &(&l.adjoint() * l).scale_real(0.5) - pi;
    Ok([
        half.op_norm(),
        commutator(l, pi)?.op_norm(),
        commutator(w, pi)?.op_norm(),
        commutator(l, &l.adjoint())?.op_norm(),
    ])
}

/// Perturbations `u = -(Π + εE) U` to try.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationGrid {
    pub epsilons: Vec<f64>,
    pub directions: usize,
    pub seed: u64,
}

impl PerturbationGrid {
    pub fn standard(seed: u64) -> Self {
        PerturbationGrid {
            epsilons: alloc::vec![0.0, -0.05, 0.05, -0.1, 0.1, -0.2, 0.2],
            directions: 3,
            seed,
        }
    }
}

/// Random Hermitian direction of unit operator norm.
pub fn perturbation_direction(dim: usize, seed: u64) -> SystemOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = random_with(OperatorKind::Hermitian, dim, &mut rng);
    let n = e.op_norm();
    e.scale_real(1.0 / n)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridRow {
    pub epsilon: f64,
    pub direction_seed: u64,
    pub total: f64,
    /// `Σ Δ ⟨U ξ, X² U ξ⟩`
    pub running_x: f64,
    /// `Σ Δ ‖u ξ‖²`
    pub running_control: f64,
    /// `-⟨u_T ξ, U_T ξ⟩` with the endpoint value `u_T = -Π U_T`
    pub terminal: f64,
    /// `⟨U_T ξ, (Π + εE) U_T ξ⟩`, the terminal term if the perturbed feedback
    /// were also applied at the endpoint
    pub terminal_perturbed: f64,
    pub identity_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimumReport {
    pub rows: Vec<GridRow>,
    /// `⟨ξ, Π ξ⟩`
    pub baseline: f64,
    pub minimum_at_zero: bool,
}

impl MinimumReport {
    pub fn zero_rows(&self) -> impl Iterator<Item = &GridRow> {
        self.rows.iter().filter(|r| r.epsilon == 0.0)
    }

    pub fn max_identity_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.identity_residual).fold(0.0, f64::max)
    }
}

/// Cost of the feedback `u = -K U` on the lattice: running parts, terminal
/// weight under `Π` and under `K`, and `Σ Δ ⟨U ξ, E² U ξ⟩`.
fn feedback_cost(
    inst: &RegulatorInstance,
    k: &SystemOperator,
    e: &SystemOperator,
    xi: &ProductState,
    lattice: &Lattice,
) -> Result<(f64, f64, f64, f64, f64)> {
    let c = QsdeCoefficients::new(inst.z.clone(), inst.psi.clone(), inst.phi.clone(), &inst.f - k, true)?;
    let obs = [
        OperatorPair::system(&inst.x * &inst.x),
        OperatorPair::system(&k.adjoint() * k),
        OperatorPair::system(k.clone()),
        OperatorPair::system(e * e),
        OperatorPair::system(inst.pi.clone()),
    ];
    let series = flow_series_many(lattice, &c, xi, xi, &obs)?;
    let n = lattice.slices();
    let delta = lattice.step();
    let riemann = |s: &[C64]| s[..n].iter().map(|z| z.re).sum::<f64>() * delta;
    Ok((
        riemann(&series[0]),
        riemann(&series[1]),
        series[4][n].re,
        series[2][n].re,
        riemann(&series[3]),
    ))
}

/// Simulates the controlled evolution for `u = -(Π + εE) U` over the grid
/// and evaluates `Q = ∫ ⟨Uξ, X²Uξ⟩ + ‖uξ‖² dt - ⟨u_T ξ, U_T ξ⟩` and the
/// residual of `Q = ∫ ‖(u + ΠU)ξ‖² dt + ⟨ξ, Πξ⟩`.
///
/// The perturbation acts on `[0, T)`; the endpoint value is `u_T = -Π U_T`.
/// A single-time value does not change the dynamics, and the decomposition
/// holds only with this endpoint: with `u_T = -(Π + εE) U_T` the total picks
/// up `ε ⟨U_T ξ, E U_T ξ⟩`, which is linear in `ε`. That variant is kept in
/// `terminal_perturbed`.
pub fn verify_minimum(
    inst: &RegulatorInstance,
    xi: &ProductState,
    lattice: &Lattice,
    grid: &PerturbationGrid,
    tol: Tolerance,
) -> Result<MinimumReport> {
    let d = inst.dim();
    check_dim(d, lattice.system_dim())?;
    check_dim(d, xi.system().len())?;
    let res = regulator_residuals(inst);
    let worst = res.iter().copied().fold(0.0, f64::max);
    precondition("regulator instance", "a solution of the regulator equations", worst, tol)?;
    if grid.directions == 0 || grid.epsilons.is_empty() {
        return Err(Error::InvalidArgument("perturbation grid is empty".into()));
    }
    let baseline = quadratic_value(&inst.pi, xi);

    let mut rows = Vec::new();
    for j in 0..grid.directions {
        let seed = grid.seed.wrapping_add(j as u64);
        let e = perturbation_direction(d, seed);
        for &eps in &grid.epsilons {
            let k = &inst.pi + &e.scale_real(eps);
            let (running_x, running_control, terminal, terminal_perturbed, e_sq) =
                feedback_cost(inst, &k, &e, xi, lattice)?;
            let total = running_x + running_control + terminal;
            rows.push(GridRow {
                epsilon: eps,
                direction_seed: seed,
                total,
                running_x,
                running_control,
                terminal,
                terminal_perturbed,
                identity_residual: libm::fabs(total - eps * eps * e_sq - baseline),
            });
        }
    }
    let best = rows.iter().map(|r| r.total).fold(f64::INFINITY, f64::min);
    let zero_best = rows
        .iter()
        .filter(|r| r.epsilon == 0.0)
        .map(|r| r.total)
        .fold(f64::INFINITY, f64::min);
    Ok(MinimumReport {
        rows,
        baseline,
        minimum_at_zero: zero_best <= best,
    })
}

/// `⟨ξ, Π ξ⟩` for a product state `ξ = u ⊗ φ`.
pub fn quadratic_value(pi: &SystemOperator, xi: &ProductState) -> f64 {
    let u: &DVector<C64> = xi.system();
    let field = xi.inner(xi).re / u.norm_squared();
    pi.matrix_element(u, u).re * field
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{random_vector, ONE};

    fn scalar_ops(rng: &mut ChaCha8Rng, d: usize) -> (SystemOperator, SystemOperator) {
        let phi = random_with(OperatorKind::General, d, rng);
        let k = random_with(OperatorKind::Hermitian, d, rng).scale(C64::new(0.0, 1.0));
        (phi, k)
    }

    #[test]
    fn residual_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let pi = SystemOperator::real_diagonal(&[1.0, 2.0]);
        let phi = random_with(OperatorKind::General, 2, &mut rng);
        let psi = -(&(&pi.inverse().unwrap() * &phi.adjoint()) * &pi);
        let inst = RegulatorInstance::new(
            random_with(OperatorKind::General, 2, &mut rng),
            psi,
            phi,
            SystemOperator::zeros(2),
            SystemOperator::zeros(2),
            pi,
            Tolerance::DEFAULT,
        )
        .unwrap();
        let r = regulator_residuals(&inst);
        assert_eq!(r[2], 0.0);
        assert!(r[1] <= 1e-12);
    }

    #[test]
    fn construct_identity_instance() {
        let id = SystemOperator::identity(2);
        let z = SystemOperator::zeros(2);
        let inst = construct_instance(&id, &z, &z, &z, Tolerance::DEFAULT).unwrap();
        assert!((&inst.f - &id.scale_real(0.5)).op_norm() < 1e-15);
        assert_eq!(inst.psi.op_norm(), 0.0);
        assert_eq!(regulator_residuals(&inst), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn constructed_instances_satisfy_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        for d in 1..=3 {
            for _ in 0..10 {
                let pi = &random_with(OperatorKind::Positive, d, &mut rng) + &SystemOperator::identity(d).scale_real(0.1);
                let x = random_with(OperatorKind::Hermitian, d, &mut rng);
                let (phi, k) = scalar_ops(&mut rng, d);
                let inst = construct_instance(&pi, &phi, &x, &k, Tolerance::DEFAULT).unwrap();
                let r = regulator_residuals(&inst);
                assert!(r.iter().all(|&v| v <= 1e-10), "{r:?}");
                let sym = &(&pi * &inst.f) + &(&inst.f.adjoint() * &pi);
                assert!(sym.hermiticity_defect() < 1e-10);
            }
        }
    }

    #[test]
    fn construct_rejects_bad_inputs() {
        let z = SystemOperator::zeros(2);
        let id = SystemOperator::identity(2);
        assert!(matches!(
            construct_instance(&SystemOperator::real_diagonal(&[1.0, 0.0]), &z, &z, &z, Tolerance::DEFAULT),
            Err(Error::Singular { .. })
        ));
        assert!(construct_instance(&id, &z, &z, &id, Tolerance::DEFAULT).is_err());
    }

    #[test]
    fn optimal_lw_examples() {
        let id = SystemOperator::identity(2);
        let (l, w) = optimal_lw(&id, &id, &id, Tolerance::DEFAULT).unwrap();
        assert!((&l - &id.scale_real(core::f64::consts::SQRT_2)).op_norm() < 1e-15);
        assert_eq!(w, id);

        let pi = SystemOperator::real_diagonal(&[1.0, 4.0]);
        let w1 = SystemOperator::real_diagonal(&[1.0, -1.0]);
        let (l, _) = optimal_lw(&pi, &w1, &id, Tolerance::DEFAULT).unwrap();
        let s2 = core::f64::consts::SQRT_2;
        assert!((&l - &SystemOperator::real_diagonal(&[s2, -2.0 * s2])).op_norm() < 1e-14);
        assert!(optimal_lw_defects(&pi, &l, &id).unwrap().iter().all(|&v| v < 1e-14));
    }

    #[test]
    fn optimal_lw_names_offending_commutator() {
        let pi = SystemOperator::real_diagonal(&[1.0, 4.0]);
        let swap = SystemOperator::from_rows(&[alloc::vec![C64::new(0.0, 0.0), ONE], alloc::vec![ONE, C64::new(0.0, 0.0)]]).unwrap();
        let id = SystemOperator::identity(2);
        assert!(matches!(
            optimal_lw(&pi, &swap, &id, Tolerance::DEFAULT),
            Err(Error::Precondition { what: "[W1, Π]", .. })
        ));
    }

    #[test]
    fn minimum_on_small_lattice() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let pi = SystemOperator::real_diagonal(&[1.0, 2.0]);
        let phi = random_with(OperatorKind::General, 2, &mut rng).scale_real(0.5);
        let z = SystemOperator::zeros(2);
        let inst = construct_instance(&pi, &phi, &z, &z, Tolerance::DEFAULT).unwrap();
        let l = Lattice::new(32, 1.0, 2).unwrap();
        let u = random_vector(2, &mut rng).normalize();
        let xi = ProductState::vacuum(&l, &u).unwrap();
        let report = verify_minimum(&inst, &xi, &l, &PerturbationGrid::standard(5), Tolerance::new(1e-9).unwrap()).unwrap();
        assert!((report.baseline - quadratic_value(&pi, &xi)).abs() < 1e-14);
        for row in report.zero_rows() {
            assert!((row.total - report.baseline).abs() <= 0.05 * report.baseline, "{row:?}");
        }
    }
}
