use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ising::{
    beta_from_p, ising_mfa_susceptibility, ising_susceptibility, solve_ising, solve_ising_mfa, Temperature,
};
use crate::montecarlo::{enumerate_ising, enumerate_percolation, mc_ising_run, mc_percolation, McStats, Observable};
use crate::percolation::{
    percolation_mfa_susceptibility, percolation_susceptibility, solve_percolation, solve_percolation_mfa,
};
use crate::rng::Seed;

use super::config::{Method, Model, RunConfig};
use super::grid::SweepGrid;

/// One method evaluated at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub p: f64,
    /// Inverse temperature for Ising rows.
    pub beta: Option<f64>,
    pub order_parameter: f64,
    /// `+inf` marks a divergent response; `None` when not defined.
    #[serde(with = "sentinel")]
    pub susceptibility: Option<f64>,
    /// Standard error of the order parameter for sampled methods.
    pub stderr: Option<f64>,
    pub converged: Option<bool>,
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub method: Method,
    pub points: Vec<SweepPoint>,
}

impl Series {
    pub fn order_parameters(&self) -> Vec<f64> {
        self.points.iter().map(|pt| pt.order_parameter).collect()
    }

    pub fn susceptibilities(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|pt| pt.susceptibility).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub network: String,
    pub model: Model,
    pub source: Option<usize>,
    pub grid: SweepGrid,
    pub series: Vec<Series>,
}

impl SweepResult {
    pub fn series(&self, method: Method) -> Option<&Series> {
        self.series.iter().find(|s| s.method == method)
    }
}

/// `+inf` is written as the string `"inf"`, since JSON has no infinity.
pub(crate) mod sentinel {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    pub const TOKEN: &str = "inf";

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(x) if *x == f64::INFINITY => s.serialize_str(TOKEN),
            Some(x) => s.serialize_f64(*x),
        }
    }

    struct V;

    impl<'de> Visitor<'de> for V {
        type Value = Option<f64>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            write!(f, "a number, \"{TOKEN}\" or null")
        }

        fn visit_none<E: de::Error>(self) -> Result<Self::Value, E> {
            Ok(None)
        }

        fn visit_unit<E: de::Error>(self) -> Result<Self::Value, E> {
            Ok(None)
        }

        fn visit_some<D: Deserializer<'de>>(self, d: D) -> Result<Self::Value, D::Error> {
            d.deserialize_any(V)
        }

        fn visit_f64<E: de::Error>(self, x: f64) -> Result<Self::Value, E> {
            Ok(Some(x))
        }

        fn visit_i64<E: de::Error>(self, x: i64) -> Result<Self::Value, E> {
            Ok(Some(x as f64))
        }

        fn visit_u64<E: de::Error>(self, x: u64) -> Result<Self::Value, E> {
            Ok(Some(x as f64))
        }

        fn visit_str<E: de::Error>(self, s: &str) -> Result<Self::Value, E> {
            if s == TOKEN {
                Ok(Some(f64::INFINITY))
            } else {
                Err(E::invalid_value(de::Unexpected::Str(s), &self))
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        d.deserialize_option(V)
    }
}

fn point_seed(base: Seed, model: Model, k: usize) -> Seed {
    base.derive(model as u64).derive(k as u64)
}

/// Monte Carlo estimates for both the conventional and source-node methods
/// come from the same run, sampled once per grid point.
fn mc_point(g: &Graph, model: Model, p: f64, k: usize, source: Option<usize>, cfg: &RunConfig) -> Result<McStats> {
    let seed = point_seed(cfg.seed, model, k);
    match model {
        Model::Percolation => mc_percolation(g, p, cfg.montecarlo.realizations, seed, source),
        Model::Ising => {
            let opts = cfg.montecarlo.ising.with_seed(seed);
            mc_ising_run(g, beta_from_p(p)?, &opts, source).map(|r| r.stats)
        }
    }
}

fn sampled_point(p: f64, beta: Option<f64>, stats: &McStats, order: Observable, chi: Observable) -> Result<SweepPoint> {
    let missing = |o: Observable| Error::Unsupported(format!("Monte Carlo run has no {o} estimate"));
    let op = stats.get(order).ok_or_else(|| missing(order))?;
    let sus = stats.get(chi).ok_or_else(|| missing(chi))?;
    Ok(SweepPoint {
        p,
        beta,
        order_parameter: op.mean,
        susceptibility: Some(sus.mean),
        stderr: Some(op.stderr),
        converged: None,
        iterations: None,
    })
}

fn evaluate(
    g: &Graph,
    model: Model,
    method: Method,
    p: f64,
    source: Option<usize>,
    mc: Option<&McStats>,
    cfg: &RunConfig,
) -> Result<SweepPoint> {
    let opts = &cfg.solver;
    let src = if method.needs_source() { source } else { None };
    match model {
        Model::Percolation => match method {
            Method::Bp | Method::Snbp => {
                let sol = percolation_susceptibility(g, &solve_percolation(g, p, src, opts)?, opts)?;
                let resp = sol.response.as_ref().expect("response was just computed");
                Ok(SweepPoint {
                    p,
                    beta: None,
                    order_parameter: sol.order_parameter,
                    susceptibility: Some(resp.susceptibility),
                    stderr: None,
                    converged: Some(sol.convergence.converged),
                    iterations: Some(sol.convergence.iterations),
                })
            }
            Method::Mfa | Method::Snmfa => {
                let sol = solve_percolation_mfa(g, p, src, opts)?;
                let chi = match src {
                    None => percolation_mfa_susceptibility(g, &sol, opts)?.susceptibility(),
                    Some(_) => None,
                };
                Ok(SweepPoint {
                    p,
                    beta: None,
                    order_parameter: sol.order_parameter,
                    susceptibility: chi,
                    stderr: None,
                    converged: Some(sol.convergence.converged),
                    iterations: Some(sol.convergence.iterations),
                })
            }
            Method::Mc => sampled_point(p, None, mc.expect("mc stats"), Observable::S1, Observable::ChiPractical),
            Method::Snmc => sampled_point(p, None, mc.expect("mc stats"), Observable::SX, Observable::ChiSource),
            Method::Exact => {
                let e = enumerate_percolation(g, p, source)?;
                let (op, chi) = match source {
                    Some(_) => (e.s_x.unwrap_or_default(), e.chi_source),
                    None => (e.s1, Some(e.chi_practical)),
                };
                Ok(SweepPoint {
                    p,
                    beta: None,
                    order_parameter: op,
                    susceptibility: chi,
                    stderr: None,
                    converged: None,
                    iterations: None,
                })
            }
        },
        Model::Ising => {
            let temp: Temperature = beta_from_p(p)?;
            let beta = Some(temp.beta());
            match method {
                Method::Bp | Method::Snbp => {
                    let sol = ising_susceptibility(g, &solve_ising(g, temp, src, opts)?, opts)?;
                    Ok(SweepPoint {
                        p,
                        beta,
                        order_parameter: sol.magnetization.abs(),
                        susceptibility: sol.susceptibility(),
                        stderr: None,
                        converged: Some(sol.convergence.converged),
                        iterations: Some(sol.convergence.iterations),
                    })
                }
                Method::Mfa | Method::Snmfa => {
                    let sol = solve_ising_mfa(g, temp, src, opts)?;
                    let chi = match src {
                        None => ising_mfa_susceptibility(g, &sol, opts)?.susceptibility(),
                        Some(_) => None,
                    };
                    Ok(SweepPoint {
                        p,
                        beta,
                        order_parameter: sol.magnetization.abs(),
                        susceptibility: chi,
                        stderr: None,
                        converged: Some(sol.convergence.converged),
                        iterations: Some(sol.convergence.iterations),
                    })
                }
                Method::Mc => sampled_point(p, beta, mc.expect("mc stats"), Observable::AbsM, Observable::ChiPractical),
                Method::Snmc => {
                    sampled_point(p, beta, mc.expect("mc stats"), Observable::MSigmaX, Observable::ChiSource)
                }
                Method::Exact => {
                    let e = enumerate_ising(g, temp, source)?;
                    let (op, chi) = match source {
                        Some(_) => (e.m_sigma_x.unwrap_or_default(), e.chi_source),
                        None => (e.abs_m, Some(e.chi_practical)),
                    };
                    Ok(SweepPoint {
                        p,
                        beta,
                        order_parameter: op,
                        susceptibility: chi,
                        stderr: None,
                        converged: None,
                        iterations: None,
                    })
                }
            }
        }
    }
}

/// Evaluate `methods` at every grid point. The source is resolved once from
/// `cfg.source` and shared by all source-node methods (and by EXACT).
pub fn sweep(
    network: &str,
    g: &Graph,
    model: Model,
    methods: &[Method],
    grid: &SweepGrid,
    cfg: &RunConfig,
) -> Result<SweepResult> {
    if g.n() == 0 {
        return Err(Error::EmptyInput);
    }
    if !g.is_connected() {
        let components = g.components().into_iter().max().map_or(0, |c| c + 1);
        return Err(Error::Disconnected { components });
    }
    let source = cfg.source.resolve(g)?;
    if source.is_none() {
        if let Some(m) = methods.iter().find(|m| m.needs_source()) {
            return Err(Error::Config(format!("method {m} needs a source node, but source = none")));
        }
    }
    let wants_mc = methods.iter().any(|m| matches!(m, Method::Mc | Method::Snmc));
    let mc_source = if methods.contains(&Method::Snmc) { source } else { None };

    let tasks: Vec<(usize, f64)> = grid.points().iter().copied().enumerate().collect();
    let rows: Vec<Vec<SweepPoint>> = tasks
        .par_iter()
        .map(|&(k, p)| {
            let mc = if wants_mc {
                Some(mc_point(g, model, p, k, mc_source, cfg).map_err(|e| wrap(Method::Mc, p, e))?)
            } else {
                None
            };
            methods
                .iter()
                .map(|&m| evaluate(g, model, m, p, source, mc.as_ref(), cfg).map_err(|e| wrap(m, p, e)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let series = methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| Series {
            method,
            points: rows.iter().map(|row| row[mi].clone()).collect(),
        })
        .collect();
    Ok(SweepResult {
        network: network.to_string(),
        model,
        source,
        grid: grid.clone(),
        series,
    })
}

fn wrap(method: Method, p: f64, e: Error) -> Error {
    Error::Sweep {
        method: method.to_string(),
        p,
        source: Box::new(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::SourceChoice;

    fn small_cfg() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.montecarlo.realizations = 2000;
        cfg.montecarlo.ising.measurements = Some(500);
        cfg
    }

    #[test]
    fn two_node_snbp_matches_exact() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let grid = SweepGrid::default();
        let cfg = small_cfg();
        let res = sweep("edge", &g, Model::Percolation, &[Method::Snbp, Method::Exact], &grid, &cfg).unwrap();
        let a = res.series(Method::Snbp).unwrap();
        let b = res.series(Method::Exact).unwrap();
        for (x, y) in a.points.iter().zip(&b.points) {
            assert!((x.order_parameter - y.order_parameter).abs() < 1e-10);
        }
    }

    #[test]
    fn ising_rows_carry_beta() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let grid = SweepGrid::linspace(0.1, 0.9, 5).unwrap();
        let res = sweep("path", &g, Model::Ising, &[Method::Snbp, Method::Snmc], &grid, &small_cfg()).unwrap();
        for s in &res.series {
            for pt in &s.points {
                let b = pt.beta.unwrap();
                assert!((pt.p - (1.0 - (-2.0 * b).exp())).abs() < 1e-12);
            }
        }
        assert_eq!(res.source, Some(1));
    }

    #[test]
    fn source_methods_need_a_source() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let mut cfg = small_cfg();
        cfg.source = SourceChoice::None;
        let grid = SweepGrid::default();
        assert!(sweep("edge", &g, Model::Percolation, &[Method::Snbp], &grid, &cfg).is_err());
        assert!(sweep("edge", &g, Model::Percolation, &[Method::Bp], &grid, &cfg).is_ok());
    }

    #[test]
    fn errors_name_the_offending_point() {
        let big = crate::netgen::square_lattice(6, 6).unwrap();
        let grid = SweepGrid::new(vec![0.5]).unwrap();
        match sweep("grid", &big, Model::Percolation, &[Method::Exact], &grid, &small_cfg()) {
            Err(Error::Sweep { method, p, .. }) => {
                assert_eq!(method, "exact");
                assert_eq!(p, 0.5);
            }
            other => panic!("expected sweep error, got {other:?}"),
        }
    }
}
