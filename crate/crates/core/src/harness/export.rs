//! CSV and JSON output. Every file embeds the resolved run configuration:
//! as `#` comment lines in CSV and as a `config` field in JSON.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::{Method, Model, RunConfig};
use super::delta::ErrorReport;
use super::sweep::{sentinel, SweepResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// One CSV line of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub network: String,
    pub model: Model,
    pub method: Method,
    pub p: f64,
    pub beta: Option<f64>,
    pub order_parameter: f64,
    #[serde(with = "sentinel")]
    pub susceptibility: Option<f64>,
    pub stderr: Option<f64>,
    pub converged: Option<bool>,
    pub iterations: Option<usize>,
}

pub fn sweep_rows(result: &SweepResult) -> Vec<SweepRow> {
    result
        .series
        .iter()
        .flat_map(|s| {
            s.points.iter().map(move |pt| SweepRow {
                network: result.network.clone(),
                model: result.model,
                method: s.method,
                p: pt.p,
                beta: pt.beta,
                order_parameter: pt.order_parameter,
                susceptibility: pt.susceptibility,
                stderr: pt.stderr,
                converged: pt.converged,
                iterations: pt.iterations,
            })
        })
        .collect()
}

fn config_comment(config: Option<&RunConfig>, extra: &[String]) -> String {
    let mut out = String::new();
    for line in extra {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    if let Some(cfg) = config {
        out.push_str("# config:\n");
        for line in cfg.to_toml().lines() {
            out.push_str("#   ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

fn rows_to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

const SWEEP_HEADER: [&str; 10] = [
    "network",
    "model",
    "method",
    "p",
    "beta",
    "order_parameter",
    "susceptibility",
    "stderr",
    "converged",
    "iterations",
];

pub fn sweep_to_csv(result: &SweepResult, config: Option<&RunConfig>) -> Result<String> {
    let source = match result.source {
        Some(x) => x.to_string(),
        None => "none".into(),
    };
    let mut out = config_comment(config, &[format!("source node: {source}")]);
    out.push_str(&rows_to_csv(&sweep_rows(result), &SWEEP_HEADER)?);
    Ok(out)
}

pub fn read_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub config: Option<RunConfig>,
    pub result: SweepResult,
}

pub fn sweep_to_json(result: &SweepResult, config: Option<&RunConfig>) -> Result<String> {
    let doc = SweepDocument {
        config: config.cloned(),
        result: result.clone(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn read_sweep_json(text: &str) -> Result<SweepDocument> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRowCsv {
    pub network: String,
    pub domain: String,
    pub model: Model,
    pub n: usize,
    pub m: usize,
    pub cyclomatic: usize,
    pub mean_degree: f64,
    pub source: Option<usize>,
    pub method: Method,
    pub delta: f64,
    pub mc_mean_stderr: f64,
}

pub fn report_to_csv(report: &ErrorReport, config: Option<&RunConfig>) -> Result<String> {
    let failures: Vec<String> = report
        .failures
        .iter()
        .map(|f| format!("failed: {}: {}", f.network, f.message))
        .collect();
    let rows: Vec<ErrorRowCsv> = report
        .rows
        .iter()
        .flat_map(|r| {
            r.deltas.iter().map(move |(&method, &delta)| ErrorRowCsv {
                network: r.network.clone(),
                domain: r.domain.clone(),
                model: report.model,
                n: r.stats.n,
                m: r.stats.m,
                cyclomatic: r.stats.cyclomatic,
                mean_degree: r.stats.mean_degree,
                source: r.source,
                method,
                delta,
                mc_mean_stderr: r.mc_mean_stderr,
            })
        })
        .collect();
    let header = [
        "network",
        "domain",
        "model",
        "n",
        "m",
        "cyclomatic",
        "mean_degree",
        "source",
        "method",
        "delta",
        "mc_mean_stderr",
    ];
    let mut out = config_comment(config, &failures);
    out.push_str(&rows_to_csv(&rows, &header)?);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub config: Option<RunConfig>,
    pub report: ErrorReport,
}

pub fn report_to_json(report: &ErrorReport, config: Option<&RunConfig>) -> Result<String> {
    let doc = ReportDocument {
        config: config.cloned(),
        report: report.clone(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
