use std::collections::BTreeMap;

use fermiflow_core::flow::{compare_with_printed, structure_residuals, unitary_coefficients, ThetaSource};
use fermiflow_core::ito::{table_product, BasisDifferential};
use fermiflow_core::operator::{random_with, OperatorKind};
use fermiflow_core::OperatorPair;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{evolution_source, require, tolerance};
use crate::cli::{DeriveOptions, StructureOptions, Verdict};
use crate::error::{CliError, CliResult};
use crate::format::{emit, read_pair, to_json, DiffReportJson};

pub fn ito_mult(left: &str, right: &str) -> CliResult<Verdict> {
    let a = BasisDifferential::parse(left)?;
    let b = BasisDifferential::parse(right)?;
    match table_product(a, b) {
        Some(p) => println!("{p}"),
        None => println!("0"),
    }
    Ok(Verdict::Pass)
}

pub fn derive_flow(o: DeriveOptions) -> CliResult<Verdict> {
    let tol = tolerance(o.tol, 1e-12)?;
    let source = evolution_source(&o.coeffs, &o.h, &o.l, &o.w, tolerance(None, 1e-9)?)?
        .ok_or_else(|| CliError::usage("missing --coeffs (or --L with optional --H, --W)"))?;
    let c = source.evolution()?;
    let x = read_pair(require(&o.pair, "pair")?)?;
    let report = compare_with_printed(&c, &x, tol)?;
    emit(o.out.as_deref(), &to_json(&DiffReportJson::from_report(&report)))?;
    if o.out.is_some() {
        let disagree = report.disagreeing();
        if disagree.is_empty() {
            println!("derive flow: all 8 slots agree within {:e}", tol.value());
        } else {
            println!("derive flow: slots {} disagree", disagree.join(", "));
        }
    }
    Ok(Verdict::from_pass(report.agree))
}

#[derive(Serialize)]
struct StructureReport {
    theta: &'static str,
    dim: usize,
    trials: usize,
    seed: u64,
    tolerance: f64,
    max_residuals: BTreeMap<String, f64>,
    failing_trials: usize,
    passed: bool,
}

pub fn check_structure(o: StructureOptions) -> CliResult<Verdict> {
    let tol = tolerance(o.tol, 1e-10)?;
    let (source, theta_name) = match o.theta.as_deref().unwrap_or("derived") {
        "derived" => (ThetaSource::Derived, "derived"),
        "printed" => (ThetaSource::Printed, "printed"),
        other => return Err(CliError::usage(format!("unknown --theta {other:?} (expected derived or printed)"))),
    };
    let trials = o.trials.unwrap_or(100);
    let seed = o.seed.unwrap_or(0);
    let fixed = evolution_source(&o.coeffs, &o.h, &o.l, &o.w, tolerance(None, 1e-9)?)?
        .map(|s| s.evolution())
        .transpose()?;
    let dim = match (&fixed, o.dim) {
        (Some(c), Some(d)) if c.dim() != d => {
            return Err(CliError::usage(format!("--dim {d} differs from the coefficient dimension {}", c.dim())))
        }
        (Some(c), _) => c.dim(),
        (None, d) => d.unwrap_or(2),
    };
    if dim == 0 {
        return Err(CliError::usage("--dim must be positive"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 9];
    let mut failing = 0;
    for _ in 0..trials {
        let c = match &fixed {
            Some(c) => c.clone(),
            None => unitary_coefficients(
                &random_with(OperatorKind::Hermitian, dim, &mut rng),
                &random_with(OperatorKind::General, dim, &mut rng),
                &random_with(OperatorKind::Unitary, dim, &mut rng),
                tolerance(None, 1e-9)?,
            )?,
        };
        let mut pair = || {
            OperatorPair::new(
                random_with(OperatorKind::General, dim, &mut rng),
                random_with(OperatorKind::General, dim, &mut rng),
            )
        };
        let x = pair()?;
        let y = pair()?;
        let r = structure_residuals(source, &c, &x, &y)?;
        for (w, v) in worst.iter_mut().zip(r.values) {
            *w = w.max(v);
        }
        if r.max() > tol.value() {
            failing += 1;
        }
    }
    let report = StructureReport {
        theta: theta_name,
        dim,
        trials,
        seed,
        tolerance: tol.value(),
        max_residuals: worst.iter().enumerate().map(|(i, v)| (format!("s{}", i + 1), *v)).collect(),
        failing_trials: failing,
        passed: failing == 0,
    };
    emit(o.out.as_deref(), &to_json(&report))?;
    if o.out.is_some() {
        println!("check structure: {failing} of {trials} trials exceed {:e}", tol.value());
    }
    Ok(Verdict::from_pass(failing == 0))
}
