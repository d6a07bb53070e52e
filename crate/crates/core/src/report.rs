//! Machine-readable check reports.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Outcome of one named verification check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub n: usize,
    pub points: usize,
    pub max_violation: f64,
    pub mean_violation: f64,
    pub tangent_rank: Option<usize>,
    pub ambient_dim: Option<usize>,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: Option<u64>,
    /// Wall-clock time; left empty unless timing was requested, so that
    /// reports stay byte-identical across runs.
    pub wall_ms: Option<f64>,
    /// Echo of the parameters the check ran with.
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
}

impl CheckReport {
    pub fn new(check: &str, n: usize, points: usize, tolerance: f64) -> Self {
        Self {
            check: check.to_string(),
            n,
            points,
            max_violation: 0.0,
            mean_violation: 0.0,
            tangent_rank: None,
            ambient_dim: None,
            tolerance,
            pass: false,
            seed: None,
            wall_ms: None,
            params: BTreeMap::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    /// Sets `max_violation`, `mean_violation` from per-point violations.
    pub fn with_violations(mut self, violations: &[f64]) -> Self {
        self.max_violation = violations.iter().copied().fold(0.0, f64::max);
        self.mean_violation = if violations.is_empty() {
            0.0
        } else {
            crate::linalg::pairwise_sum(violations) / violations.len() as f64
        };
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Parse(format!("unknown report format `{other}`"))),
        }
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    check: &'a str,
    n: usize,
    points: usize,
    max_violation: f64,
    mean_violation: f64,
    tangent_rank: Option<usize>,
    ambient_dim: Option<usize>,
    tolerance: f64,
    pass: bool,
    seed: Option<u64>,
    wall_ms: Option<f64>,
}

/// Writes reports as a JSON array or as CSV with one row per report
/// (parameters omitted). Output always ends with a newline.
pub fn emit<W: Write + ?Sized>(reports: &[CheckReport], format: ReportFormat, out: &mut W) -> Result<()> {
    match format {
        ReportFormat::Json => {
            let text = serde_json::to_string_pretty(reports).map_err(|e| Error::Parse(e.to_string()))?;
            out.write_all(text.as_bytes())?;
            out.write_all(b"\n")?;
        }
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            w.write_record([
                "check",
                "n",
                "points",
                "max_violation",
                "mean_violation",
                "tangent_rank",
                "ambient_dim",
                "tolerance",
                "pass",
                "seed",
                "wall_ms",
            ])
            .map_err(csv_error)?;
            for r in reports {
                w.serialize(CsvRow {
                    check: &r.check,
                    n: r.n,
                    points: r.points,
                    max_violation: r.max_violation,
                    mean_violation: r.mean_violation,
                    tangent_rank: r.tangent_rank,
                    ambient_dim: r.ambient_dim,
                    tolerance: r.tolerance,
                    pass: r.pass,
                    seed: r.seed,
                    wall_ms: r.wall_ms,
                })
                .map_err(csv_error)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
            out.write_all(&bytes)?;
        }
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}
