use fermiflow_core::control::{
    construct_instance, evaluate_costs, newton_solve, verify_minimum, CostBreakdown, PerturbationGrid, RiccatiProblem,
    RiccatiSign,
};
use fermiflow_core::fock::{Lattice, ProductState};
use fermiflow_core::{SystemOperator, Tolerance};

use super::{optional_operator, require, system_vector, tolerance};
use crate::cli::{ControlOptions, CostOptions, RiccatiOptions, Verdict};
use crate::error::{CliError, CliResult};
use crate::format::{cost_csv, describe_failure, emit, read_operator, to_json, RiccatiJson};

pub fn riccati_solve(o: RiccatiOptions) -> CliResult<Verdict> {
    let tol = tolerance(o.tol, 1e-12)?;
    let sign = RiccatiSign::parse(o.sign.as_deref().unwrap_or("minus"))?;
    let x = read_operator(require(&o.x, "X")?)?;
    let h = optional_operator(&o.h)?.unwrap_or_else(|| SystemOperator::zeros(x.dim()));
    let pi0 = optional_operator(&o.pi0)?;
    let max_iter = o.max_iter.unwrap_or(50);
    let problem = RiccatiProblem::new(h, x, sign, Tolerance::DEFAULT)?;
    let solution = newton_solve(&problem, pi0.as_ref(), tol, max_iter)?;
    emit(o.out.as_deref(), &to_json(&RiccatiJson::from_solution(&solution)))?;
    match &solution.failure {
        Some(f) => {
            eprintln!("riccati solve: {}", describe_failure(f, sign));
            Ok(Verdict::Fail)
        }
        None => {
            if o.out.is_some() {
                println!(
                    "riccati solve: converged in {} iterations, residual {:e}, positive {}",
                    solution.iterations, solution.residual, solution.positive
                );
            }
            Ok(Verdict::Pass)
        }
    }
}

pub fn control_verify(o: ControlOptions) -> CliResult<Verdict> {
    let rel = tolerance(o.tol, 0.05)?.value();
    let pi = read_operator(require(&o.pi, "pi")?)?;
    let phi = read_operator(require(&o.phi, "phi")?)?;
    let d = pi.dim();
    let x = optional_operator(&o.x)?.unwrap_or_else(|| SystemOperator::zeros(d));
    let k = optional_operator(&o.k)?.unwrap_or_else(|| SystemOperator::zeros(d));
    let inst = construct_instance(&pi, &phi, &x, &k, Tolerance::DEFAULT)?;
    let seed = o.seed.unwrap_or(0);
    let lattice = Lattice::new(o.slices.unwrap_or(32), o.horizon.unwrap_or(1.0), d)?;
    let u = system_vector(&o.u, d, seed)?;
    let xi = ProductState::vacuum(&lattice, &u)?;
    let mut grid = PerturbationGrid::standard(seed);
    grid.directions = o.trials.unwrap_or(grid.directions);
    let report = verify_minimum(&inst, &xi, &lattice, &grid, Tolerance::new(1e-9)?)?;
    emit(o.out.as_deref(), &cost_csv(&report.rows)?)?;

    let q0 = report
        .zero_rows()
        .next()
        .map(|r| r.total)
        .ok_or_else(|| CliError::usage("perturbation grid has no ε = 0 point"))?;
    let base = report.baseline;
    let mut failed = Vec::new();
    if !report.minimum_at_zero {
        failed.push("grid minimum not at ε=0".to_string());
    }
    if (q0 - base).abs() > rel * base.abs() {
        failed.push(format!("|Q(0) - <ξ,Πξ>| = {:e} exceeds {rel} <ξ,Πξ>", (q0 - base).abs()));
    }
    let max_id = report.max_identity_residual();
    if max_id > rel * base.abs() {
        failed.push(format!("identity residual {max_id:e} exceeds {rel} <ξ,Πξ>"));
    }
    if failed.is_empty() {
        if o.out.is_some() {
            println!("control verify: Q(0) = {q0}, <ξ,Πξ> = {base}, minimum at ε=0");
        }
        Ok(Verdict::Pass)
    } else {
        eprintln!("control verify: {}", failed.join("; "));
        Ok(Verdict::Fail)
    }
}

pub fn cost_evaluate(o: CostOptions) -> CliResult<Verdict> {
    let rel = tolerance(o.tol, 0.05)?.value();
    let l = read_operator(require(&o.l, "L")?)?;
    let x = read_operator(require(&o.x, "X")?)?;
    let d = l.dim();
    let h = optional_operator(&o.h)?.unwrap_or_else(|| SystemOperator::zeros(d));
    let w = optional_operator(&o.w)?.unwrap_or_else(|| SystemOperator::identity(d));
    let lattice = Lattice::new(o.slices.unwrap_or(32), o.horizon.unwrap_or(1.0), d)?;
    let u = system_vector(&o.u, d, o.seed.unwrap_or(0))?;
    let xi = ProductState::vacuum(&lattice, &u)?;
    let report = evaluate_costs(&h, &l, &w, &x, &xi, &lattice, Tolerance::new(1e-9)?)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let row = |name: &str, c: &CostBreakdown| {
        [
            name.to_string(),
            c.running_x.to_string(),
            c.running_l.to_string(),
            c.terminal.to_string(),
            c.total.to_string(),
        ]
    };
    let csv_err = |e: csv::Error| CliError::usage(format!("csv: {e}"));
    w.write_record(["functional", "running_x", "running_l", "terminal", "total"])
        .map_err(csv_err)?;
    for (name, c) in [("Q", &report.q), ("J", &report.j), ("R", &report.r)] {
        w.write_record(row(name, c)).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::usage(format!("csv: {e}")))?;
    emit(o.out.as_deref(), &String::from_utf8_lossy(&bytes))?;

    let (gj, gr) = report.relative_gaps();
    let pass = gj <= rel && gr <= rel;
    if pass {
        if o.out.is_some() {
            println!("cost evaluate: |Q-J|/Q = {gj:e}, |Q-R|/Q = {gr:e}");
        }
    } else {
        eprintln!("cost evaluate: |Q-J|/Q = {gj:e}, |Q-R|/Q = {gr:e}, tolerance {rel}");
    }
    Ok(Verdict::from_pass(pass))
}
