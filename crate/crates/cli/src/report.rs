//! Run reports and their CSV and JSON encodings.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Solver settings used for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub n_basis: usize,
    pub dt: f64,
    pub tol: f64,
    pub jacobian_mode: String,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sample {
    pub t: f64,
    pub state: Vec<f64>,
}

/// Work done by the Dormand-Prince reference run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSummary {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub total_rhs_evals: u64,
    /// Reference solution at each LVIM sample time.
    pub samples: Vec<Sample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub problem: String,
    pub config: ConfigEcho,
    /// Independent variable first, then the state components.
    pub labels: Vec<String>,
    pub samples: Vec<Sample>,
    pub total_iterations: usize,
    pub total_rhs_evals: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_discrepancy: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
    /// Largest relative change of the problem's conserved quantity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariant_drift: Option<f64>,
    pub notes: Vec<String>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl RunReport {
    /// Header is `t` followed by the state labels; compare reports add an
    /// `oracle_<label>` column per component.
    pub fn csv_header(&self) -> Vec<String> {
        let mut header = vec!["t".to_string()];
        header.extend(self.labels.iter().skip(1).cloned());
        if self.oracle.is_some() {
            header.extend(self.labels.iter().skip(1).map(|l| format!("oracle_{l}")));
        }
        header
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.csv_header())?;
        for (i, s) in self.samples.iter().enumerate() {
            let mut row = vec![fmt_f64(s.t)];
            row.extend(s.state.iter().map(|&v| fmt_f64(v)));
            if let Some(o) = &self.oracle {
                row.extend(o.samples[i].state.iter().map(|&v| fmt_f64(v)));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }
}

/// A numeric table as read back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn read_csv<R: Read>(input: R) -> Result<Self, CliError> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| CliError::usage(format!("bad number {f:?}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| fmt_f64(v)))?;
        }
        w.flush()?;
        Ok(())
    }
}
