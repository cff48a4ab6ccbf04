//! Quadratic costs, the regulator conditions and the Riccati equation.

mod costs;
mod regulator;
mod riccati;
mod sylvester;

pub use costs::{evaluate_costs, CostBreakdown, CostReport};
pub use regulator::{
    construct_instance, optimal_lw, optimal_lw_defects, perturbation_direction, quadratic_value,
    regulator_residuals, verify_minimum, GridRow, MinimumReport, PerturbationGrid,
    RegulatorInstance,
};
pub use riccati::{
    default_initial_guess, newton_solve, riccati_residual, trace_identity_defect, RiccatiFailure,
    RiccatiProblem, RiccatiSign, RiccatiSolution,
};
pub use sylvester::solve_sylvester;
