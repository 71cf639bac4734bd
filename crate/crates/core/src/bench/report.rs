use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::provgen::Strategy;

/// Medians for one program under one strategy. Times are microseconds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchCell {
    pub query: String,
    pub strategy: Strategy,
    /// Original query, including any materialization the strategy does.
    pub oq_us: u64,
    /// Plan selection (O2 only; zero otherwise).
    pub plan_us: u64,
    /// Per base occurrence.
    pub provenance_us: BTreeMap<String, u64>,
    /// Mean of `provenance_us`, rounded.
    pub ap_us: u64,
    /// Minimum of `provenance_us`.
    pub mp_us: u64,
    pub join_counts: BTreeMap<String, usize>,
    pub rows_r: usize,
    /// Rows of RK (O2) or of the top eager store (G).
    pub rows_rk: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchReport {
    pub cells: Vec<BenchCell>,
}

impl BenchReport {
    pub fn cell(&self, query: &str, strategy: Strategy) -> Option<&BenchCell> {
        self.cells.iter().find(|c| c.query == query && c.strategy == strategy)
    }

    /// Long format: `query,strategy,metric,occurrence,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["query", "strategy", "metric", "occurrence", "value"])?;
        for c in &self.cells {
            let s = c.strategy.name();
            let mut row = |metric: &str, occ: &str, value: String| {
                w.write_record([c.query.as_str(), s, metric, occ, value.as_str()])
            };
            row("oq_us", "", c.oq_us.to_string())?;
            row("plan_us", "", c.plan_us.to_string())?;
            row("ap_us", "", c.ap_us.to_string())?;
            row("mp_us", "", c.mp_us.to_string())?;
            row("rows_r", "", c.rows_r.to_string())?;
            if let Some(n) = c.rows_rk {
                row("rows_rk", "", n.to_string())?;
            }
            for (occ, us) in &c.provenance_us {
                row("provenance_us", occ, us.to_string())?;
            }
            for (occ, j) in &c.join_counts {
                row("join_count", occ, j.to_string())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<BenchReport> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<ReportFormat> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Dataset(format!("unknown report format `{other}`"))),
        }
    }
}

/// Writes to `path`, or stdout when `path` is `None`.
pub fn emit_report(report: &BenchReport, format: ReportFormat, path: Option<&Path>) -> Result<()> {
    let mut buf = Vec::new();
    match format {
        ReportFormat::Csv => report.write_csv(&mut buf)?,
        ReportFormat::Json => {
            buf.extend_from_slice(report.to_json()?.as_bytes());
            buf.push(b'\n');
        }
    }
    match path {
        Some(p) => std::fs::write(p, buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}
