//! JSON and CSV file formats.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use fermiflow_core::control::{GridRow, RiccatiFailure, RiccatiSign, RiccatiSolution};
use fermiflow_core::flow::DiffReport;
use fermiflow_core::ito::QsdeCoefficients;
use fermiflow_core::{OperatorPair, SystemOperator, C64};
use nalgebra::DVector;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// `{"rows": n, "cols": n, "data": [[[re, im], ...], ...]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl MatrixJson {
    pub fn from_operator(op: &SystemOperator) -> Self {
        let n = op.dim();
        let data = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let z = op.get(i, j);
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        MatrixJson { rows: n, cols: n, data }
    }

    pub fn to_operator(&self) -> Result<SystemOperator, String> {
        if self.rows != self.cols {
            return Err(format!("matrix is not square ({}x{})", self.rows, self.cols));
        }
        if self.rows == 0 {
            return Err("matrix is empty".into());
        }
        if self.data.len() != self.rows {
            return Err(format!("declared {} rows, found {}", self.rows, self.data.len()));
        }
        let mut rows = Vec::with_capacity(self.rows);
        for (i, row) in self.data.iter().enumerate() {
            if row.len() != self.cols {
                return Err(format!("row {i} has {} entries, expected {}", row.len(), self.cols));
            }
            let mut out = Vec::with_capacity(row.len());
            for (j, [re, im]) in row.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    return Err(format!("entry ({i}, {j}) is not finite"));
                }
                out.push(C64::new(*re, *im));
            }
            rows.push(out);
        }
        SystemOperator::from_rows(&rows).map_err(|e| e.to_string())
    }
}

/// QSDE coefficients: four named matrices and the `J`-dressing flag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsJson {
    pub gauge: MatrixJson,
    pub ann: MatrixJson,
    pub cre: MatrixJson,
    pub time: MatrixJson,
    pub j_dressed: bool,
}

impl CoefficientsJson {
    pub fn from_coefficients(c: &QsdeCoefficients) -> Self {
        CoefficientsJson {
            gauge: MatrixJson::from_operator(&c.gauge),
            ann: MatrixJson::from_operator(&c.ann),
            cre: MatrixJson::from_operator(&c.cre),
            time: MatrixJson::from_operator(&c.time),
            j_dressed: c.j_dressed,
        }
    }

    pub fn to_coefficients(&self) -> Result<QsdeCoefficients, String> {
        let op = |name: &str, m: &MatrixJson| m.to_operator().map_err(|e| format!("{name}: {e}"));
        QsdeCoefficients::new(
            op("gauge", &self.gauge)?,
            op("ann", &self.ann)?,
            op("cre", &self.cre)?,
            op("time", &self.time)?,
            self.j_dressed,
        )
        .map_err(|e| e.to_string())
    }
}

/// Operator pair `(T, S)` standing for `T + S J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairJson {
    pub t: MatrixJson,
    pub s: MatrixJson,
}

impl PairJson {
    pub fn from_pair(x: &OperatorPair) -> Self {
        PairJson {
            t: MatrixJson::from_operator(x.t_part()),
            s: MatrixJson::from_operator(x.j_part()),
        }
    }

    pub fn to_pair(&self) -> Result<OperatorPair, String> {
        let t = self.t.to_operator().map_err(|e| format!("t: {e}"))?;
        let s = self.s.to_operator().map_err(|e| format!("s: {e}"))?;
        OperatorPair::new(t, s).map_err(|e| e.to_string())
    }
}

/// System vector as `[[re, im], ...]`.
pub fn vector_from_json(entries: &[[f64; 2]]) -> Result<DVector<C64>, String> {
    if entries.is_empty() {
        return Err("vector is empty".into());
    }
    if entries.iter().flatten().any(|x| !x.is_finite()) {
        return Err("vector has non-finite entries".into());
    }
    Ok(DVector::from_iterator(entries.len(), entries.iter().map(|[re, im]| C64::new(*re, *im))))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffSlots {
    #[serde(rename = "dt.t")]
    pub dt_t: f64,
    #[serde(rename = "dt.j")]
    pub dt_j: f64,
    #[serde(rename = "dA.t")]
    pub da_t: f64,
    #[serde(rename = "dA.j")]
    pub da_j: f64,
    #[serde(rename = "dAdag.t")]
    pub dadag_t: f64,
    #[serde(rename = "dAdag.j")]
    pub dadag_j: f64,
    #[serde(rename = "dL.t")]
    pub dl_t: f64,
    #[serde(rename = "dL.j")]
    pub dl_j: f64,
}

/// `{"slots": {"dt.t": r, ...}, "agree": bool}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffReportJson {
    pub slots: DiffSlots,
    pub agree: bool,
}

impl DiffReportJson {
    pub fn from_report(r: &DiffReport) -> Self {
        let v = |i: usize| r.slots[i].residual;
        DiffReportJson {
            slots: DiffSlots {
                dt_t: v(0),
                dt_j: v(1),
                da_t: v(2),
                da_j: v(3),
                dadag_t: v(4),
                dadag_j: v(5),
                dl_t: v(6),
                dl_j: v(7),
            },
            agree: r.agree,
        }
    }
}

/// `{"pi": <matrix>, "residual": r, "iterations": k, "positive": bool,
/// "sign": "plus"|"minus"}`, plus `"failure"` when the solve failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiccatiJson {
    pub pi: MatrixJson,
    pub residual: f64,
    pub iterations: usize,
    pub positive: bool,
    pub sign: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

pub fn describe_failure(f: &RiccatiFailure, sign: RiccatiSign) -> String {
    match f {
        RiccatiFailure::SingularSylvester { detail } => format!("singular Newton step: {detail}"),
        RiccatiFailure::MaxIterations { residual } => {
            format!("no convergence within the iteration budget (residual {residual:.3e})")
        }
        RiccatiFailure::TraceObstruction { trace_x_squared, residual } => format!(
            "trace identity obstruction for sign {}: tr R(Π) = tr Π² + tr X² ≥ tr X² = {trace_x_squared:.6e} > 0, so R(Π) = 0 has no Hermitian solution (last residual {residual:.3e})",
            sign.name()
        ),
    }
}

impl RiccatiJson {
    pub fn from_solution(s: &RiccatiSolution) -> Self {
        RiccatiJson {
            pi: MatrixJson::from_operator(&s.pi),
            residual: s.residual,
            iterations: s.iterations,
            positive: s.positive,
            sign: s.sign.name().to_string(),
            failure: s.failure.as_ref().map(|f| describe_failure(f, s.sign)),
        }
    }
}

pub const COST_HEADER: [&str; 7] = [
    "epsilon",
    "direction_seed",
    "Q_total",
    "Q_running_x",
    "Q_running_l",
    "Q_terminal",
    "identity_residual",
];

/// Cost report CSV, one row per grid point in grid order.
pub fn cost_csv(rows: &[GridRow]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::usage(format!("csv: {e}"));
    w.write_record(COST_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.epsilon.to_string(),
            r.direction_seed.to_string(),
            r.total.to_string(),
            r.running_x.to_string(),
            r.running_control.to_string(),
            r.terminal.to_string(),
            r.identity_residual.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish_csv(w)
}

/// Trajectory CSV: `#` comment lines, then `t,name,re,im`.
pub fn trajectory_csv(comments: &[String], times: &[f64], series: &[(&str, &[C64])]) -> CliResult<String> {
    let mut out = String::new();
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::usage(format!("csv: {e}"));
    w.write_record(["t", "name", "re", "im"]).map_err(csv_err)?;
    for (k, t) in times.iter().enumerate() {
        for (name, values) in series {
            let z = values[k];
            w.write_record([t.to_string(), (*name).to_string(), z.re.to_string(), z.im.to_string()])
                .map_err(csv_err)?;
        }
    }
    out.push_str(&finish_csv(w)?);
    Ok(out)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w.into_inner().map_err(|e| CliError::usage(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::usage(format!("csv: {e}")))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))
}

pub fn read_operator(path: &Path) -> CliResult<SystemOperator> {
    let m: MatrixJson = read_json(path)?;
    m.to_operator().map_err(|e| CliError::parse(path, e))
}

pub fn read_pair(path: &Path) -> CliResult<OperatorPair> {
    let p: PairJson = read_json(path)?;
    p.to_pair().map_err(|e| CliError::parse(path, e))
}

pub fn read_coefficients(path: &Path) -> CliResult<QsdeCoefficients> {
    let c: CoefficientsJson = read_json(path)?;
    c.to_coefficients().map_err(|e| CliError::parse(path, e))
}

pub fn read_vector(path: &Path) -> CliResult<DVector<C64>> {
    let v: Vec<[f64; 2]> = read_json(path)?;
    vector_from_json(&v).map_err(|e| CliError::parse(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Writes to `out` when given, otherwise to stdout.
pub fn emit(out: Option<&Path>, contents: &str) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}
