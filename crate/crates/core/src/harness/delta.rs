use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{stats, GraphStats};

use super::config::{Method, Model, RunConfig};
use super::dataset::{load_dataset, DatasetManifest, FetchOptions};
use super::grid::SweepGrid;
use super::sweep::{sweep, SweepPoint};

/// Trapezoidal integral of `|a - b|` over the grid points.
pub fn trapezoid_abs_diff(grid: &SweepGrid, a: &[f64], b: &[f64]) -> Result<f64> {
    let x = grid.points();
    for got in [a.len(), b.len()] {
        if got != x.len() {
            return Err(Error::GridMismatch {
                expected: x.len(),
                got,
            });
        }
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(u, v)| (u - v).abs()).collect();
    Ok(x.windows(2)
        .zip(d.windows(2))
        .map(|(xs, ds)| 0.5 * (xs[1] - xs[0]) * (ds[0] + ds[1]))
        .sum())
}

/// Area between the order-parameter curves of `method` and `mc`, integrated
/// over the sampled grid only (no extrapolation to 0 or 1).
pub fn delta_error(method: &[SweepPoint], mc: &[SweepPoint], grid: &SweepGrid) -> Result<f64> {
    for series in [method, mc] {
        if series.len() != grid.len() {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                got: series.len(),
            });
        }
        if series.iter().zip(grid.points()).any(|(pt, &p)| pt.p != p) {
            return Err(Error::InvalidParameter("series was not sampled on this grid".into()));
        }
    }
    let a: Vec<f64> = method.iter().map(|pt| pt.order_parameter).collect();
    let b: Vec<f64> = mc.iter().map(|pt| pt.order_parameter).collect();
    trapezoid_abs_diff(grid, &a, &b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub network: String,
    pub domain: String,
    pub stats: GraphStats,
    pub source: Option<usize>,
    /// Delta against conventional Monte Carlo, per method.
    pub deltas: BTreeMap<Method, f64>,
    /// Mean order-parameter standard error of the Monte Carlo series.
    pub mc_mean_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkFailure {
    pub network: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub model: Model,
    pub rows: Vec<ErrorRow>,
    pub failures: Vec<BenchmarkFailure>,
}

impl ErrorReport {
    pub fn row(&self, network: &str) -> Option<&ErrorRow> {
        self.rows.iter().find(|r| r.network == network)
    }
}

pub const BENCHMARK_METHODS: [Method; 4] = [Method::Bp, Method::Snbp, Method::Mfa, Method::Mc];

/// Delta rows for one network, from a graph already in memory.
pub fn benchmark_graph(
    network: &str,
    domain: &str,
    g: &crate::graph::Graph,
    model: Model,
    cfg: &RunConfig,
) -> Result<ErrorRow> {
    let grid = cfg.grid.build()?;
    let st = stats(g)?;
    let res = sweep(network, g, model, &BENCHMARK_METHODS, &grid, cfg)?;
    let mc = &res.series(Method::Mc).expect("mc series").points;
    let mut deltas = BTreeMap::new();
    for m in [Method::Bp, Method::Snbp, Method::Mfa] {
        deltas.insert(m, delta_error(&res.series(m).expect("requested series").points, mc, &grid)?);
    }
    let mc_mean_stderr = mc.iter().filter_map(|pt| pt.stderr).sum::<f64>() / mc.len() as f64;
    Ok(ErrorRow {
        network: network.to_string(),
        domain: domain.to_string(),
        stats: st,
        source: res.source,
        deltas,
        mc_mean_stderr,
    })
}

/// Run BP, SNBP, MFA and MC on every manifest entry. Entries that fail to
/// load or solve are recorded in `failures` and skipped.
pub fn batch_benchmark(
    manifest: &DatasetManifest,
    model: Model,
    cfg: &RunConfig,
    fetch: &FetchOptions,
) -> Result<ErrorReport> {
    cfg.validate()?;
    let base = manifest.base_dir.as_deref();
    let outcomes: Vec<std::result::Result<ErrorRow, BenchmarkFailure>> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            load_dataset(entry, base, fetch)
                .and_then(|g| benchmark_graph(&entry.name, &entry.domain, &g, model, cfg))
                .map_err(|e| BenchmarkFailure {
                    network: entry.name.clone(),
                    message: e.to_string(),
                })
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => rows.push(r),
            Err(f) => failures.push(f),
        }
    }
    Ok(ErrorReport { model, rows, failures })
}
