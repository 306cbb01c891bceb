//! Message passing for bond percolation.
//!
//! `mu[i <- j]` is the probability that `j` belongs to the source cluster
//! (or, without a source, the giant cluster) once `i` is removed:
//!
//! ```text
//! mu[i <- j] = 1 - (1 - [j == x]) * prod_{k in N(j) \ i} (1 - p mu[j <- k])
//! mu[i]      = 1 - (1 - [i == x]) * prod_{j in N(i)}     (1 - p mu[i <- j])
//! ```
//!
//! With no source the indicator terms vanish and this is ordinary BP.
//! Susceptibilities come from the linear-response messages
//!
//! ```text
//! chi[i <- j] = (1 + sum_{k in N(j) \ i} p chi[j <- k] / (1 - p mu[j <- k])) (1 - mu[i <- j])
//! chi[i]      = (1 + sum_{j in N(i)}     p chi[i <- j] / (1 - p mu[i <- j])) (1 - mu[i])
//! ```
//!
//! The mean-field variants drop the cavity and keep one value per node.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::solver::{iterate, iterate_linear, Convergence, Init, MessageField, Schedule, SolverOptions};

/// Denominators `1 - p mu` at or below this are treated as singular.
pub const DENOMINATOR_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approximation {
    BeliefPropagation,
    MeanField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercSolution {
    pub approximation: Approximation,
    pub p: f64,
    pub source: Option<usize>,
    /// Empty for mean-field solutions.
    pub mu_messages: MessageField,
    pub mu_node: Vec<f64>,
    pub order_parameter: f64,
    pub convergence: Convergence,
    pub response: Option<PercResponse>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercResponse {
    /// Empty for mean-field solutions.
    pub chi_messages: MessageField,
    pub chi_node: Vec<f64>,
    /// `+inf` when the linear response diverges.
    pub susceptibility: f64,
    /// Slots (or nodes, for mean field) whose denominator hit the guard.
    pub divergent: Vec<usize>,
    pub convergence: Convergence,
}

impl PercSolution {
    pub fn susceptibility(&self) -> Option<f64> {
        self.response.as_ref().map(|r| r.susceptibility)
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {p}")))
    }
}

fn check_source(g: &Graph, source: Option<usize>) -> Result<()> {
    match source {
        Some(x) if x >= g.n() => Err(Error::NodeOutOfRange { node: x, n: g.n() }),
        _ => Ok(()),
    }
}

fn indicator(node: usize, source: Option<usize>) -> f64 {
    if source == Some(node) {
        1.0
    } else {
        0.0
    }
}

fn initial_values(len: usize, init: Init) -> Vec<f64> {
    match init {
        Init::Ones => vec![1.0; len],
        Init::Zeros => vec![0.0; len],
        Init::UniformRandom(seed) => {
            let mut rng = seed.rng();
            (0..len).map(|_| rng.gen::<f64>()).collect()
        }
    }
}

/// New value of message slot `d` (`i <- j`) given the current messages.
#[inline]
fn message_update(g: &Graph, p: f64, source: Option<usize>, mu: &[f64], d: usize) -> f64 {
    let j = g.sender(d);
    let skip = g.reverse(d);
    let mut prod = 1.0;
    for e in g.incoming(j) {
        if e != skip {
            prod *= 1.0 - p * mu[e];
        }
    }
    1.0 - (1.0 - indicator(j, source)) * prod
}

/// One sweep over all messages; returns the max-abs change.
pub fn percolation_sweep(
    g: &Graph,
    p: f64,
    source: Option<usize>,
    mu: &mut MessageField,
    opts: &SolverOptions,
    scratch: &mut Vec<f64>,
) -> f64 {
    let mut residual: f64 = 0.0;
    match opts.schedule {
        Schedule::Sequential => {
            let mu = mu.as_mut_slice();
            for d in 0..mu.len() {
                let new = opts.relax(mu[d], message_update(g, p, source, mu, d));
                residual = residual.max((new - mu[d]).abs());
                mu[d] = new;
            }
        }
        Schedule::Synchronous => {
            let old = mu.as_slice();
            scratch.clear();
            scratch.extend((0..old.len()).map(|d| opts.relax(old[d], message_update(g, p, source, old, d))));
            for (d, &new) in scratch.iter().enumerate() {
                residual = residual.max((new - old[d]).abs());
            }
            mu.as_mut_slice().copy_from_slice(scratch);
        }
    }
    debug_assert!(mu.iter().all(|&v| (0.0..=1.0).contains(&v)), "percolation message left [0, 1]");
    residual
}

/// Node marginals from converged messages.
pub fn percolation_marginals(g: &Graph, p: f64, source: Option<usize>, mu: &MessageField) -> Vec<f64> {
    (0..g.n())
        .map(|i| {
            let prod: f64 = g.incoming(i).map(|d| 1.0 - p * mu[d]).product();
            1.0 - (1.0 - indicator(i, source)) * prod
        })
        .collect()
}

/// Conventional BP (`source = None`) or source-node BP for bond percolation.
/// Non-convergence is reported through `convergence`, not as an error.
pub fn solve_percolation(
    g: &Graph,
    p: f64,
    source: Option<usize>,
    opts: &SolverOptions,
) -> Result<PercSolution> {
    check_p(p)?;
    check_source(g, source)?;
    opts.validate()?;

    let mut mu = MessageField::from_vec(initial_values(g.num_directed(), opts.init));
    let mut scratch = Vec::new();
    let convergence = if mu.is_empty() {
        Convergence {
            iterations: 0,
            max_residual: 0.0,
            converged: true,
        }
    } else {
        iterate(opts, || percolation_sweep(g, p, source, &mut mu, opts, &mut scratch))
    };
    let mu_node = percolation_marginals(g, p, source, &mu);
    let order_parameter = mean(&mu_node);
    Ok(PercSolution {
        approximation: Approximation::BeliefPropagation,
        p,
        source,
        mu_messages: mu,
        mu_node,
        order_parameter,
        convergence,
        response: None,
    })
}

/// Add susceptibility messages to a converged BP/SNBP solution.
pub fn percolation_susceptibility(
    g: &Graph,
    sol: &PercSolution,
    opts: &SolverOptions,
) -> Result<PercSolution> {
    if sol.approximation != Approximation::BeliefPropagation {
        return Err(Error::InvalidParameter(
            "percolation_susceptibility expects a message-passing solution; use percolation_mfa_susceptibility".into(),
        ));
    }
    opts.validate()?;
    let p = sol.p;
    let source = sol.source;
    let mu = &sol.mu_messages;
    let len = g.num_directed();

    // Response weights w[d] = p / (1 - p mu[d]). Messages leaving the source
    // are clamped, so their chi is identically zero and they carry no weight.
    let mut divergent = Vec::new();
    let weight: Vec<f64> = (0..len)
        .map(|d| {
            if Some(g.sender(d)) == source {
                return 0.0;
            }
            let den = 1.0 - p * mu[d];
            if den <= DENOMINATOR_GUARD {
                divergent.push(d);
                0.0
            } else {
                p / den
            }
        })
        .collect();

    let mut chi = MessageField::filled(len, 0.0);
    let mut scratch = vec![0.0; len];
    let outcome = if divergent.is_empty() && len > 0 {
        let update = |chi: &[f64], d: usize| -> f64 {
            let j = g.sender(d);
            let skip = g.reverse(d);
            let mut acc = 1.0;
            for e in g.incoming(j) {
                if e != skip {
                    acc += weight[e] * chi[e];
                }
            }
            acc * (1.0 - mu[d])
        };
        Some(iterate_linear(opts, transient_sweeps(g), || {
            let mut residual: f64 = 0.0;
            let mut top: f64 = 0.0;
            match opts.schedule {
                Schedule::Sequential => {
                    let c = chi.as_mut_slice();
                    for d in 0..len {
                        let new = update(c, d);
                        residual = residual.max((new - c[d]).abs());
                        top = top.max(new.abs());
                        c[d] = new;
                    }
                }
                Schedule::Synchronous => {
                    for d in 0..len {
                        scratch[d] = update(chi.as_slice(), d);
                    }
                    let c = chi.as_mut_slice();
                    for d in 0..len {
                        residual = residual.max((scratch[d] - c[d]).abs());
                        top = top.max(scratch[d].abs());
                        c[d] = scratch[d];
                    }
                }
            }
            (residual, top)
        }))
    } else {
        None
    };

    let diverged = !divergent.is_empty() || outcome.as_ref().is_some_and(|o| o.diverged);
    let convergence = match &outcome {
        Some(o) => o.convergence,
        None => Convergence {
            iterations: 0,
            max_residual: if divergent.is_empty() { 0.0 } else { f64::INFINITY },
            converged: divergent.is_empty(),
        },
    };

    let (chi_node, susceptibility) = if diverged {
        let chi_node = (0..g.n())
            .map(|i| if sol.mu_node[i] < 1.0 { f64::INFINITY } else { 0.0 })
            .collect();
        (chi_node, f64::INFINITY)
    } else {
        let chi_node: Vec<f64> = (0..g.n())
            .map(|i| {
                let acc: f64 = 1.0 + g.incoming(i).map(|d| weight[d] * chi[d]).sum::<f64>();
                acc * (1.0 - sol.mu_node[i])
            })
            .collect();
        let s = mean(&chi_node);
        (chi_node, if s.is_finite() { s } else { f64::INFINITY })
    };

    let mut out = sol.clone();
    out.response = Some(PercResponse {
        chi_messages: chi,
        chi_node,
        susceptibility,
        divergent,
        convergence,
    });
    Ok(out)
}

/// Node-indexed mean-field percolation, optionally with a clamped source.
pub fn solve_percolation_mfa(
    g: &Graph,
    p: f64,
    source: Option<usize>,
    opts: &SolverOptions,
) -> Result<PercSolution> {
    check_p(p)?;
    check_source(g, source)?;
    opts.validate()?;
    let mut mu = initial_values(g.n(), opts.init);
    let mut scratch = vec![0.0; g.n()];
    let update = |mu: &[f64], i: usize| -> f64 {
        let prod: f64 = g.neighbors(i).iter().map(|&j| 1.0 - p * mu[j]).product();
        1.0 - (1.0 - indicator(i, source)) * prod
    };
    let convergence = iterate(opts, || {
        let mut residual: f64 = 0.0;
        match opts.schedule {
            Schedule::Sequential => {
                for i in 0..mu.len() {
                    let new = opts.relax(mu[i], update(&mu, i));
                    residual = residual.max((new - mu[i]).abs());
                    mu[i] = new;
                }
            }
            Schedule::Synchronous => {
                for i in 0..mu.len() {
                    scratch[i] = opts.relax(mu[i], update(&mu, i));
                }
                for i in 0..mu.len() {
                    residual = residual.max((scratch[i] - mu[i]).abs());
                    mu[i] = scratch[i];
                }
            }
        }
        residual
    });
    let order_parameter = mean(&mu);
    Ok(PercSolution {
        approximation: Approximation::MeanField,
        p,
        source,
        mu_messages: MessageField::default(),
        mu_node: mu,
        order_parameter,
        convergence,
        response: None,
    })
}

/// Mean-field susceptibility. Only defined without a source.
pub fn percolation_mfa_susceptibility(
    g: &Graph,
    sol: &PercSolution,
    opts: &SolverOptions,
) -> Result<PercSolution> {
    if sol.approximation != Approximation::MeanField {
        return Err(Error::InvalidParameter(
            "percolation_mfa_susceptibility expects a mean-field solution".into(),
        ));
    }
    if sol.source.is_some() {
        return Err(Error::Unsupported(
            "susceptibility is not defined for source-node mean field".into(),
        ));
    }
    opts.validate()?;
    let p = sol.p;
    let mu = &sol.mu_node;
    let n = g.n();
    let mut divergent = Vec::new();
    let weight: Vec<f64> = (0..n)
        .map(|j| {
            let den = 1.0 - p * mu[j];
            if den <= DENOMINATOR_GUARD {
                divergent.push(j);
                0.0
            } else {
                p / den
            }
        })
        .collect();

    let mut chi = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let update = |chi: &[f64], i: usize| -> f64 {
        let acc: f64 = 1.0 + g.neighbors(i).iter().map(|&j| weight[j] * chi[j]).sum::<f64>();
        acc * (1.0 - mu[i])
    };
    let outcome = if divergent.is_empty() {
        Some(iterate_linear(opts, transient_sweeps(g), || {
            let mut residual: f64 = 0.0;
            let mut top: f64 = 0.0;
            match opts.schedule {
                Schedule::Sequential => {
                    for i in 0..n {
                        let new = update(&chi, i);
                        residual = residual.max((new - chi[i]).abs());
                        top = top.max(new.abs());
                        chi[i] = new;
                    }
                }
                Schedule::Synchronous => {
                    for i in 0..n {
                        scratch[i] = update(&chi, i);
                    }
                    for i in 0..n {
                        residual = residual.max((scratch[i] - chi[i]).abs());
                        top = top.max(scratch[i].abs());
                        chi[i] = scratch[i];
                    }
                }
            }
            (residual, top)
        }))
    } else {
        None
    };
    let diverged = !divergent.is_empty() || outcome.as_ref().is_some_and(|o| o.diverged);
    let convergence = match &outcome {
        Some(o) => o.convergence,
        None => Convergence {
            iterations: 0,
            max_residual: f64::INFINITY,
            converged: false,
        },
    };
    let susceptibility = if diverged {
        chi.iter_mut().for_each(|c| *c = f64::INFINITY);
        f64::INFINITY
    } else {
        mean(&chi)
    };
    let mut out = sol.clone();
    out.response = Some(PercResponse {
        chi_messages: MessageField::default(),
        chi_node: chi,
        susceptibility,
        divergent,
        convergence,
    });
    Ok(out)
}

pub(crate) fn transient_sweeps(g: &Graph) -> usize {
    (10 * g.n()).max(1000)
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}
