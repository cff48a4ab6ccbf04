pub mod algebra;
pub mod control;
pub mod lattice;

use std::path::{Path, PathBuf};

use fermiflow_core::flow::{unitary_coefficients, EvolutionCoefficients};
use fermiflow_core::ito::QsdeCoefficients;
use fermiflow_core::operator::random_vector;
use fermiflow_core::{SystemOperator, Tolerance, C64};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};
use crate::format::{read_coefficients, read_operator, read_vector};

pub(crate) fn require<'a>(value: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| CliError::usage(format!("missing --{flag}")))
}

pub(crate) fn tolerance(value: Option<f64>, default: f64) -> CliResult<Tolerance> {
    Ok(Tolerance::new(value.unwrap_or(default))?)
}

pub(crate) fn optional_operator(path: &Option<PathBuf>) -> CliResult<Option<SystemOperator>> {
    path.as_deref().map(read_operator).transpose()
}

/// Where the evolution coefficients come from.
pub(crate) enum Source {
    Coefficients(QsdeCoefficients),
    Unitary(EvolutionCoefficients),
}

impl Source {
    pub(crate) fn qsde(&self) -> QsdeCoefficients {
        match self {
            Source::Coefficients(c) => c.clone(),
            Source::Unitary(c) => c.to_qsde(),
        }
    }

    pub(crate) fn evolution(&self) -> CliResult<EvolutionCoefficients> {
        match self {
            Source::Coefficients(c) => Ok(EvolutionCoefficients::from_qsde(c)?),
            Source::Unitary(c) => Ok(c.clone()),
        }
    }
}

/// `--coeffs`, or `--L` with optional `--H` (default 0) and `--W`
/// (default 1). Returns `None` when none of them is given.
pub(crate) fn evolution_source(
    coeffs: &Option<PathBuf>,
    h: &Option<PathBuf>,
    l: &Option<PathBuf>,
    w: &Option<PathBuf>,
    tol: Tolerance,
) -> CliResult<Option<Source>> {
    let any_hlw = h.is_some() || l.is_some() || w.is_some();
    match (coeffs, any_hlw) {
        (Some(_), true) => Err(CliError::usage("give either --coeffs or --H/--L/--W, not both")),
        (Some(p), false) => Ok(Some(Source::Coefficients(read_coefficients(p)?))),
        (None, true) => {
            let l = read_operator(require(l, "L")?)?;
            let d = l.dim();
            let h = optional_operator(h)?.unwrap_or_else(|| SystemOperator::zeros(d));
            let w = optional_operator(w)?.unwrap_or_else(|| SystemOperator::identity(d));
            Ok(Some(Source::Unitary(unitary_coefficients(&h, &l, &w, tol)?)))
        }
        (None, false) => Ok(None),
    }
}

/// `--u` when given, otherwise a seeded random unit vector.
pub(crate) fn system_vector(path: &Option<PathBuf>, dim: usize, seed: u64) -> CliResult<DVector<C64>> {
    let u = match path {
        Some(p) => read_vector(p)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_vector(dim, &mut rng).normalize()
        }
    };
    if u.len() != dim {
        return Err(CliError::usage(format!(
            "system vector has {} entries, operators have dimension {dim}",
            u.len()
        )));
    }
    if u.norm() == 0.0 {
        return Err(CliError::usage("system vector is zero"));
    }
    Ok(u)
}

pub(crate) fn describe(path: &Option<PathBuf>, default: &str) -> String {
    path.as_deref()
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| default.to_string())
}
