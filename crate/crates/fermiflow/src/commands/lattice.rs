use fermiflow_core::fock::sector::flow_series_many;
use fermiflow_core::fock::{
    characteristic_functional, check_anticommutation, check_fundamental_lemma, fermion_square_norm, Lattice,
    LemmaKind, NoiseKind, ProductState, SparseState, SPARSE_MAX_SLICES,
};
use fermiflow_core::ito::QsdeCoefficients;
use fermiflow_core::operator::{random_vector, random_with, OperatorKind};
use fermiflow_core::{OperatorPair, C64};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{describe, evolution_source, tolerance, Source};
use crate::cli::{FermionOptions, SimulateOptions, Verdict};
use crate::error::{CliError, CliResult};
use crate::format::{emit, read_pair, read_vector, to_json, trajectory_csv};

pub fn simulate_evolution(o: SimulateOptions) -> CliResult<Verdict> {
    let tol = tolerance(o.tol, 1e-9)?;
    let source = evolution_source(&o.coeffs, &o.h, &o.l, &o.w, tol)?
        .ok_or_else(|| CliError::usage("missing --coeffs (or --L with optional --H, --W)"))?;
    let c = source.qsde();
    let d = c.dim();
    let lattice = Lattice::new(o.slices.unwrap_or(32), o.horizon.unwrap_or(1.0), d)?;
    let u = match &o.u {
        Some(p) => read_vector(p)?,
        None => DVector::from_fn(d, |i, _| if i == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }),
    };
    if u.len() != d {
        return Err(CliError::usage(format!("--u has {} entries, coefficients have dimension {d}", u.len())));
    }
    let xi = ProductState::vacuum(&lattice, &u)?;
    let mut observables = vec![OperatorPair::identity(d)];
    if let Some(p) = &o.pair {
        observables.push(read_pair(p)?);
    }
    let series = flow_series_many(&lattice, &c, &xi, &xi, &observables)?;

    let origin = match &source {
        Source::Coefficients(_) => format!("coefficients {}", describe(&o.coeffs, "")),
        Source::Unitary(_) => format!(
            "unitary coefficients H={} L={} W={}",
            describe(&o.h, "0"),
            describe(&o.l, ""),
            describe(&o.w, "1")
        ),
    };
    let comments = vec![
        format!(
            "lattice slices={} horizon={} step={} system_dim={d}",
            lattice.slices(),
            lattice.horizon(),
            lattice.step()
        ),
        format!("{origin} j_dressed={}", c.j_dressed),
        format!("initial state u ⊗ vacuum, u={}", describe(&o.u, "e0")),
        format!("norm_sq = <U ξ, U ξ>; flow = <ξ, U* (T + S J) U ξ> for pair {}", describe(&o.pair, "none")),
    ];
    let mut named: Vec<(&str, &[C64])> = vec![("norm_sq", &series[0])];
    if series.len() > 1 {
        named.push(("flow", &series[1]));
    }
    let csv = trajectory_csv(&comments, &lattice.times(), &named)?;
    emit(o.out.as_deref(), &csv)?;
    if o.out.is_some() {
        let last = series[0][lattice.slices()].re;
        println!(
            "simulate evolution: {} steps, final squared norm {last} (initial {})",
            lattice.slices(),
            series[0][0].re
        );
    }
    Ok(Verdict::Pass)
}

#[derive(Serialize)]
struct CheckRow {
    name: &'static str,
    /// value at `--slices`
    coarse: f64,
    /// value at twice `--slices`
    fine: f64,
    ratio: Option<f64>,
    criterion: String,
    pass: bool,
}

#[derive(Serialize)]
struct FermionReport {
    slices: usize,
    horizon: f64,
    seed: u64,
    checks: Vec<CheckRow>,
    passed: bool,
}

fn halving(name: &'static str, coarse: f64, fine: f64) -> CheckRow {
    let ratio = fine / coarse;
    let pass = ratio.is_finite() && (0.25..=0.75).contains(&ratio);
    CheckRow {
        name,
        coarse,
        fine,
        ratio: ratio.is_finite().then_some(ratio),
        criterion: "fine/coarse in [0.25, 0.75]".into(),
        pass,
    }
}

fn exact(name: &'static str, coarse: f64, fine: f64, tol: f64) -> CheckRow {
    CheckRow {
        name,
        coarse,
        fine,
        ratio: None,
        criterion: format!("both <= {tol:e}"),
        pass: coarse <= tol && fine <= tol,
    }
}

pub fn verify_fermion(o: FermionOptions) -> CliResult<Verdict> {
    let n = o.slices.unwrap_or(32);
    let t = o.horizon.unwrap_or(1.0);
    let intensity = o.intensity.unwrap_or(1.0);
    let seed = o.seed.unwrap_or(0);
    let tol = tolerance(o.tol, 1e-9)?.value();
    if n == 0 || 2 * n > SPARSE_MAX_SLICES {
        return Err(CliError::usage(format!(
            "--slices must be between 1 and {} (checks also run at twice the slices)",
            SPARSE_MAX_SLICES / 2
        )));
    }
    let one = DVector::from_element(1, C64::new(1.0, 0.0));
    let lattices = [Lattice::new(n, t, 1)?, Lattice::new(2 * n, t, 1)?];

    let mut car = [0.0; 2];
    let mut square = [0.0; 2];
    for (i, l) in lattices.iter().enumerate() {
        let vac = SparseState::vacuum(*l, &one)?;
        car[i] = check_anticommutation(t, &vac)?;
        square[i] = fermion_square_norm(t, &vac)?;
    }

    let brownian_target = C64::new((-0.5 * t).exp(), 0.0);
    let poisson_target = ((C64::from_polar(1.0, 1.0) - C64::new(1.0, 0.0)) * (intensity * t)).exp();
    let char_err = |kind: NoiseKind, target: C64| -> CliResult<[f64; 2]> {
        let mut e = [0.0; 2];
        for (i, l) in lattices.iter().enumerate() {
            e[i] = (characteristic_functional(kind, 1.0, t, l)?.value - target).norm();
        }
        Ok(e)
    };
    let brownian = char_err(NoiseKind::Brownian, brownian_target)?;
    let poisson = char_err(NoiseKind::Poisson { intensity }, poisson_target)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = || -> CliResult<QsdeCoefficients> {
        let mut op = || random_with(OperatorKind::General, 2, &mut rng);
        Ok(QsdeCoefficients::new(op(), op(), op(), op(), false)?)
    };
    let c = coeffs()?;
    let primed = coeffs()?;
    let u = random_vector(2, &mut rng);
    let v = random_vector(2, &mut rng);
    let lemma = |kind: &LemmaKind| -> CliResult<[f64; 2]> {
        let mut r = [0.0; 2];
        for (i, m) in [n, 2 * n].into_iter().enumerate() {
            let l = Lattice::new(m, t, 2)?;
            let f = l.sample(|_| C64::new(1.0, 0.0));
            let g = l.sample(|_| C64::new(0.0, 1.0));
            r[i] = check_fundamental_lemma(kind, &c, &l, &u, &v, &f, &g, t)?.residual;
        }
        Ok(r)
    };
    let first = lemma(&LemmaKind::First)?;
    let second = lemma(&LemmaKind::Second { primed })?;

    let checks = vec![
        exact("anticommutation", car[0], car[1], tol),
        exact("fermion_square", square[0], square[1], tol),
        halving("brownian_characteristic", brownian[0], brownian[1]),
        halving("poisson_characteristic", poisson[0], poisson[1]),
        halving("first_lemma", first[0], first[1]),
        halving("second_lemma", second[0], second[1]),
    ];
    let passed = checks.iter().all(|c| c.pass);
    let failing: Vec<_> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    let report = FermionReport {
        slices: n,
        horizon: t,
        seed,
        checks,
        passed,
    };
    emit(o.out.as_deref(), &to_json(&report))?;
    if !passed {
        eprintln!("verify fermion: failed checks: {}", failing.join(", "));
    }
    Ok(Verdict::from_pass(passed))
}
