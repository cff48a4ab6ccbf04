//! Argument parsing, configuration files and exit codes.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::commands;
use crate::error::{CliError, CliResult};
use crate::format::read_json;

/// Exit code when every check passed.
pub const EXIT_OK: u8 = 0;
/// Exit code when checks ran and at least one failed.
pub const EXIT_CHECK_FAILED: u8 = 1;
/// Exit code for input and usage errors.
pub const EXIT_USAGE: u8 = 2;

/// Result of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Declares an options struct whose fields are both `--flag`s and keys of the
/// JSON configuration, under the same name.
macro_rules! options {
    ($(#[$meta:meta])* $name:ident { $( $(#[doc = $doc:literal])* $field:ident : $ty:ty = $key:literal ),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Debug, Default, PartialEq, clap::Args, serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                $(#[doc = $doc])*
                #[arg(long = $key)]
                #[serde(rename = $key, default)]
                pub $field: Option<$ty>,
            )*
        }

        impl $name {
            /// Values given as flags win over the configuration file.
            #[allow(unused_variables)]
            pub fn over(self, config: Self) -> Self {
                Self { $( $field: self.$field.or(config.$field), )* }
            }
        }
    };
}

options!(ItoOptions {});

options!(DeriveOptions {
    /// QSDE coefficient JSON (keys gauge, ann, cre, time, j_dressed)
    coeffs: PathBuf = "coeffs",
    /// Hamiltonian matrix JSON (instead of --coeffs; default 0)
    h: PathBuf = "H",
    /// Coupling matrix JSON (instead of --coeffs)
    l: PathBuf = "L",
    /// Scattering unitary matrix JSON (instead of --coeffs; default 1)
    w: PathBuf = "W",
    /// Operator pair JSON {"t": <matrix>, "s": <matrix>}
    pair: PathBuf = "pair",
    /// Slot agreement threshold [default: 1e-12]
    tol: f64 = "tol",
    /// Diff report JSON path (stdout when absent)
    out: PathBuf = "out",
});

options!(StructureOptions {
    /// QSDE coefficient JSON; random unitary coefficients per trial when absent
    coeffs: PathBuf = "coeffs",
    /// Hamiltonian matrix JSON (instead of --coeffs; default 0)
    h: PathBuf = "H",
    /// Coupling matrix JSON (instead of --coeffs)
    l: PathBuf = "L",
    /// Scattering unitary matrix JSON (instead of --coeffs; default 1)
    w: PathBuf = "W",
    /// Structure maps to test: derived or printed [default: derived]
    theta: String = "theta",
    /// System dimension for random instances [default: 2]
    dim: usize = "dim",
    /// Number of random (x, y) pairs [default: 100]
    trials: usize = "trials",
    /// Seed for random instances [default: 0]
    seed: u64 = "seed",
    /// Residual threshold [default: 1e-10]
    tol: f64 = "tol",
    /// Report JSON path (stdout when absent)
    out: PathBuf = "out",
});

options!(SimulateOptions {
    /// QSDE coefficient JSON (keys gauge, ann, cre, time, j_dressed)
    coeffs: PathBuf = "coeffs",
    /// Hamiltonian matrix JSON (instead of --coeffs; default 0)
    h: PathBuf = "H",
    /// Coupling matrix JSON (instead of --coeffs)
    l: PathBuf = "L",
    /// Scattering unitary matrix JSON (instead of --coeffs; default 1)
    w: PathBuf = "W",
    /// Observable pair JSON; adds a "flow" series <ξ, U* (T + S J) U ξ>
    pair: PathBuf = "pair",
    /// Initial system vector JSON [[re, im], ...] [default: first basis vector]
    u: PathBuf = "u",
    /// Number of lattice slices [default: 32]
    slices: usize = "slices",
    /// Time horizon [default: 1]
    horizon: f64 = "horizon",
    /// Tolerance for the unitarity checks on H and W [default: 1e-9]
    tol: f64 = "tol",
    /// Trajectory CSV path (stdout when absent)
    out: PathBuf = "out",
});

options!(FermionOptions {
    /// Number of lattice slices; every check also runs at twice this [default: 32]
    slices: usize = "slices",
    /// Evaluation time t [default: 1]
    horizon: f64 = "horizon",
    /// Poisson intensity [default: 1]
    intensity: f64 = "intensity",
    /// Seed for the random lemma coefficients [default: 0]
    seed: u64 = "seed",
    /// Threshold for the exact anticommutation checks [default: 1e-9]
    tol: f64 = "tol",
    /// Report JSON path (stdout when absent)
    out: PathBuf = "out",
});

options!(RiccatiOptions {
    /// Hamiltonian matrix JSON [default: 0]
    h: PathBuf = "H",
    /// Cost operator matrix JSON (Hermitian)
    x: PathBuf = "X",
    /// Sign of the quadratic term: plus or minus [default: minus]
    sign: String = "sign",
    /// Initial guess matrix JSON [default: sqrt(X² + 1e-6)]
    pi0: PathBuf = "pi0",
    /// Residual target [default: 1e-12]
    tol: f64 = "tol",
    /// Newton iteration budget [default: 50]
    max_iter: usize = "max-iter",
    /// Solution JSON path (stdout when absent)
    out: PathBuf = "out",
});

options!(ControlOptions {
    /// Riccati solution Π matrix JSON (positive definite)
    pi: PathBuf = "pi",
    /// Creation coefficient Φ matrix JSON
    phi: PathBuf = "phi",
    /// Cost operator X matrix JSON (Hermitian) [default: 0]
    x: PathBuf = "X",
    /// Anti-Hermitian K matrix JSON [default: 0]
    k: PathBuf = "K",
    /// System vector JSON [[re, im], ...] [default: random from --seed]
    u: PathBuf = "u",
    /// Number of lattice slices [default: 32]
    slices: usize = "slices",
    /// Time horizon [default: 1]
    horizon: f64 = "horizon",
    /// Seed for directions and the default vector [default: 0]
    seed: u64 = "seed",
    /// Number of random perturbation directions [default: 3]
    trials: usize = "trials",
    /// Relative tolerance for Q(0) and the identity residual [default: 0.05]
    tol: f64 = "tol",
    /// Cost report CSV path (stdout when absent)
    out: PathBuf = "out",
});

options!(CostOptions {
    /// Hamiltonian matrix JSON [default: 0]
    h: PathBuf = "H",
    /// Coupling matrix JSON
    l: PathBuf = "L",
    /// Scattering unitary matrix JSON [default: 1]
    w: PathBuf = "W",
    /// Cost operator matrix JSON (Hermitian)
    x: PathBuf = "X",
    /// System vector JSON [[re, im], ...] [default: random from --seed]
    u: PathBuf = "u",
    /// Number of lattice slices [default: 32]
    slices: usize = "slices",
    /// Time horizon [default: 1]
    horizon: f64 = "horizon",
    /// Seed for the default vector [default: 0]
    seed: u64 = "seed",
    /// Relative tolerance for |Q - J| and |Q - R| [default: 0.05]
    tol: f64 = "tol",
    /// Cost CSV path (stdout when absent)
    out: PathBuf = "out",
});

#[derive(Debug, Parser)]
#[command(name = "fermiflow", version, about = "Quantum stochastic calculus workbench for fermion flows")]
pub struct Cli {
    /// JSON run configuration; keys mirror the flag names and flags win
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Itô multiplication table
    #[command(subcommand)]
    Ito(ItoCommand),
    /// Derivation of the flow equation
    #[command(subcommand)]
    Derive(DeriveCommand),
    /// Structure equations
    #[command(subcommand)]
    Check(CheckCommand),
    /// Lattice simulation
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Fermion process checks on the lattice
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Algebraic Riccati equation
    #[command(subcommand)]
    Riccati(RiccatiCommand),
    /// Regulator minimality
    #[command(subcommand)]
    Control(ControlCommand),
    /// Quadratic cost functionals
    #[command(subcommand)]
    Cost(CostCommand),
}

#[derive(Debug, Subcommand)]
pub enum ItoCommand {
    /// Product of two basis differentials (dt, dA, dAdag, dL); prints 0 for zero
    Mult {
        left: String,
        right: String,
        #[command(flatten)]
        opts: ItoOptions,
    },
}

#[derive(Debug, Subcommand)]
pub enum DeriveCommand {
    /// Derive the flow increment of a pair and compare with the printed structure maps
    Flow(DeriveOptions),
}

#[derive(Debug, Subcommand)]
pub enum CheckCommand {
    /// Residuals of the nine structure equations on random pairs
    Structure(StructureOptions),
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Euler evolution from u ⊗ vacuum; writes a trajectory CSV
    Evolution(SimulateOptions),
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Anticommutation, characteristic functionals and fundamental lemmas
    Fermion(FermionOptions),
}

#[derive(Debug, Subcommand)]
pub enum RiccatiCommand {
    /// Newton solve of i[H, Π] ± Π² + X² = 0
    Solve(RiccatiOptions),
}

#[derive(Debug, Subcommand)]
pub enum ControlCommand {
    /// Perturb the optimal feedback and check that ε = 0 minimizes the cost
    Verify(ControlOptions),
}

#[derive(Debug, Subcommand)]
pub enum CostCommand {
    /// Evaluate the Q, J and R functionals on the lattice
    Evaluate(CostOptions),
}

/// Reads a configuration for `command`. A `"command"` key, when present,
/// must name the invoked subcommand.
fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>, command: &str) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let mut value: serde_json::Value = read_json(path)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::parse(path, "configuration must be a JSON object"))?;
    if let Some(c) = obj.remove("command") {
        match c.as_str() {
            Some(name) if name == command => {}
            Some(name) => {
                return Err(CliError::usage(format!(
                    "configuration is for `{name}` but `{command}` was invoked"
                )))
            }
            None => return Err(CliError::parse(path, "\"command\" must be a string")),
        }
    }
    serde_json::from_value(value).map_err(|e| CliError::parse(path, e))
}

fn execute(cli: Cli) -> CliResult<Verdict> {
    let cfg = cli.config.as_deref();
    match cli.command {
        Command::Ito(ItoCommand::Mult { left, right, opts }) => {
            let _ = opts.over(load_config(cfg, "ito mult")?);
            commands::algebra::ito_mult(&left, &right)
        }
        Command::Derive(DeriveCommand::Flow(o)) => commands::algebra::derive_flow(o.over(load_config(cfg, "derive flow")?)),
        Command::Check(CheckCommand::Structure(o)) => {
            commands::algebra::check_structure(o.over(load_config(cfg, "check structure")?))
        }
        Command::Simulate(SimulateCommand::Evolution(o)) => {
            commands::lattice::simulate_evolution(o.over(load_config(cfg, "simulate evolution")?))
        }
        Command::Verify(VerifyCommand::Fermion(o)) => {
            commands::lattice::verify_fermion(o.over(load_config(cfg, "verify fermion")?))
        }
        Command::Riccati(RiccatiCommand::Solve(o)) => {
            commands::control::riccati_solve(o.over(load_config(cfg, "riccati solve")?))
        }
        Command::Control(ControlCommand::Verify(o)) => {
            commands::control::control_verify(o.over(load_config(cfg, "control verify")?))
        }
        Command::Cost(CostCommand::Evaluate(o)) => {
            commands::control::cost_evaluate(o.over(load_config(cfg, "cost evaluate")?))
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses `args` (including the program name), runs one subcommand and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    use clap::error::ErrorKind;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    EXIT_OK
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    eprintln!("fermiflow: missing subcommand (see --help)");
                    EXIT_USAGE
                }
                _ => {
                    let text = e.to_string();
                    let first = text.lines().next().unwrap_or("invalid arguments");
                    eprintln!("fermiflow: {}", one_line(first.trim_start_matches("error: ")));
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli) {
        Ok(Verdict::Pass) => EXIT_OK,
        Ok(Verdict::Fail) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("fermiflow: {}", one_line(&e.to_string()));
            EXIT_USAGE
        }
    }
}
