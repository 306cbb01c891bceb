//! Message passing for the zero-field ferromagnetic Ising model (J = 1).
//!
//! Messages are stored as `t[i <- j] = tanh(beta h[i <- j])`:
//!
//! ```text
//! t[i <- j] = tanh(beta) * tanh( sum_{k in N(j) \ i} artanh t[j <- k] )
//! m[i]      = tanh( sum_{j in N(i)} artanh t[i <- j] )
//! ```
//!
//! A source node `x` carries an infinite field. Messages into it are clamped
//! to `t = 1` (flagged, never passed through `artanh`), every message it
//! sends is `tanh(beta)`, and `m[x] = 1`. Linear response to a uniform field
//! uses
//!
//! ```text
//! q[i <- j] = Q[i <- j] (1 + sum_{k in N(j) \ i} q[j <- k])
//! Q[i <- j] = tanh(beta) (1 - t^2 / tanh^2(beta)) / (1 - t^2)
//! chi[i]    = beta (1 - m[i]^2) (1 + sum_{j in N(i)} q[i <- j])
//! ```
//!
//! with `q = 0` on clamped messages.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::percolation::{mean, transient_sweeps, Approximation};
use crate::solver::{iterate, iterate_linear, Convergence, Init, MessageField, Schedule, SolverOptions};

/// Largest magnitude passed to `artanh` for an unclamped value.
pub const ARTANH_GUARD: f64 = 1.0 - 1e-15;

/// Inverse temperature with the coupling absorbed.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Temperature {
    beta: f64,
}

impl Temperature {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta >= 0.0 {
            Ok(Temperature { beta })
        } else {
            Err(Error::InvalidParameter(format!(
                "beta must be finite and >= 0, got {beta}"
            )))
        }
    }

    pub fn beta(self) -> f64 {
        self.beta
    }

    /// Equivalent bond occupation probability `1 - exp(-2 beta)`.
    pub fn p(self) -> f64 {
        p_from_beta(self.beta)
    }
}

/// `beta = -ln(1 - p) / 2`, the inverse of the random-cluster map.
pub fn beta_from_p(p: f64) -> Result<Temperature> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "p must lie in [0, 1) to map to a finite beta, got {p}"
        )));
    }
    Temperature::new(-0.5 * (-p).ln_1p())
}

/// `p = 1 - exp(-2 beta)`.
pub fn p_from_beta(beta: f64) -> f64 {
    -(-2.0 * beta).exp_m1()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingSolution {
    pub approximation: Approximation,
    pub beta: f64,
    pub source: Option<usize>,
    /// `tanh(beta h)` per slot; empty for mean-field solutions.
    pub t_messages: MessageField,
    pub m_node: Vec<f64>,
    pub magnetization: f64,
    pub convergence: Convergence,
    pub response: Option<IsingResponse>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingResponse {
    /// Per slot for BP, per node for mean field.
    pub q_messages: MessageField,
    pub chi_node: Vec<f64>,
    /// `+inf` when the linear response diverges.
    pub susceptibility: f64,
    pub diverged: bool,
    pub convergence: Convergence,
}

impl IsingSolution {
    pub fn susceptibility(&self) -> Option<f64> {
        self.response.as_ref().map(|r| r.susceptibility)
    }
}

fn check_source(g: &Graph, source: Option<usize>) -> Result<()> {
    match source {
        Some(x) if x >= g.n() => Err(Error::NodeOutOfRange { node: x, n: g.n() }),
        _ => Ok(()),
    }
}

#[inline]
fn artanh(t: f64) -> f64 {
    t.clamp(-ARTANH_GUARD, ARTANH_GUARD).atanh()
}

/// Working state of the message iteration. `field[d]` caches `artanh t[d]`
/// for unclamped slots.
struct Messages<'g> {
    g: &'g Graph,
    tb: f64,
    source: Option<usize>,
    t: Vec<f64>,
    field: Vec<f64>,
    clamped: Vec<bool>,
}

impl<'g> Messages<'g> {
    fn new(g: &'g Graph, beta: f64, source: Option<usize>, init: Init) -> Self {
        let tb = beta.tanh();
        let len = g.num_directed();
        let mut clamped = vec![false; len];
        if let Some(x) = source {
            for d in g.incoming(x) {
                clamped[d] = true;
            }
        }
        let mut t = match init {
            Init::Ones => vec![tb; len],
            Init::Zeros => vec![0.0; len],
            Init::UniformRandom(seed) => {
                let mut rng = seed.rng();
                (0..len).map(|_| tb * rng.gen::<f64>()).collect()
            }
        };
        for d in 0..len {
            if clamped[d] {
                t[d] = 1.0;
            } else if Some(g.sender(d)) == source {
                t[d] = tb;
            }
        }
        let field = t.iter().zip(&clamped).map(|(&v, &c)| if c { f64::INFINITY } else { artanh(v) }).collect();
        Messages {
            g,
            tb,
            source,
            t,
            field,
            clamped,
        }
    }

    #[inline]
    fn update(&self, field: &[f64], d: usize) -> f64 {
        let j = self.g.sender(d);
        if Some(j) == self.source {
            // the clamped spin always sends the saturated message
            return self.tb;
        }
        let skip = self.g.reverse(d);
        let mut h = 0.0;
        for e in self.g.incoming(j) {
            if e != skip {
                h += field[e];
            }
        }
        self.tb * h.tanh()
    }

    fn sweep(&mut self, opts: &SolverOptions, scratch: &mut Vec<f64>) -> f64 {
        let len = self.t.len();
        let mut residual: f64 = 0.0;
        match opts.schedule {
            Schedule::Sequential => {
                for d in 0..len {
                    if self.clamped[d] {
                        continue;
                    }
                    let new = opts.relax(self.t[d], self.update(&self.field, d));
                    residual = residual.max((new - self.t[d]).abs());
                    self.t[d] = new;
                    self.field[d] = artanh(new);
                }
            }
            Schedule::Synchronous => {
                scratch.clear();
                scratch.extend((0..len).map(|d| {
                    if self.clamped[d] {
                        1.0
                    } else {
                        opts.relax(self.t[d], self.update(&self.field, d))
                    }
                }));
                for d in 0..len {
                    if self.clamped[d] {
                        continue;
                    }
                    residual = residual.max((scratch[d] - self.t[d]).abs());
                    self.t[d] = scratch[d];
                    self.field[d] = artanh(scratch[d]);
                }
            }
        }
        debug_assert!(
            (0..len).all(|d| self.clamped[d] || self.t[d].abs() <= self.tb),
            "Ising message exceeded tanh(beta)"
        );
        residual
    }

    fn marginals(&self) -> Vec<f64> {
        (0..self.g.n())
            .map(|i| {
                if Some(i) == self.source {
                    1.0
                } else {
                    let h: f64 = self.g.incoming(i).map(|d| self.field[d]).sum();
                    h.tanh()
                }
            })
            .collect()
    }
}

/// One sweep of the message update over `t`, exposed for property tests.
/// Clamped slots (messages into the source) must already hold 1.
pub fn ising_sweep(
    g: &Graph,
    beta: f64,
    source: Option<usize>,
    t: &mut MessageField,
    opts: &SolverOptions,
) -> f64 {
    let mut msgs = Messages::new(g, beta, source, Init::Zeros);
    for d in 0..t.len() {
        if !msgs.clamped[d] {
            msgs.t[d] = t[d];
            msgs.field[d] = artanh(t[d]);
        }
    }
    let r = msgs.sweep(opts, &mut Vec::new());
    t.as_mut_slice().copy_from_slice(&msgs.t);
    r
}

/// Conventional BP (`source = None`) or source-node BP for the Ising model.
pub fn solve_ising(
    g: &Graph,
    temp: Temperature,
    source: Option<usize>,
    opts: &SolverOptions,
) -> Result<IsingSolution> {
    check_source(g, source)?;
    opts.validate()?;
    let mut msgs = Messages::new(g, temp.beta(), source, opts.init);
    let mut scratch = Vec::new();
    let free = msgs.clamped.iter().filter(|&&c| !c).count();
    let convergence = if free == 0 {
        Convergence {
            iterations: 0,
            max_residual: 0.0,
            converged: true,
        }
    } else {
        iterate(opts, || msgs.sweep(opts, &mut scratch))
    };
    let m_node = msgs.marginals();
    Ok(IsingSolution {
        approximation: Approximation::BeliefPropagation,
        beta: temp.beta(),
        source,
        magnetization: mean(&m_node),
        t_messages: MessageField::from_vec(msgs.t),
        m_node,
        convergence,
        response: None,
    })
}

/// Response coefficient `Q` for a message value `t`, given `tb = tanh(beta)`.
fn response_coefficient(t: f64, tb: f64) -> f64 {
    if tb == 0.0 {
        return 0.0;
    }
    let ratio = (t * t) / (tb * tb);
    let inner = (1.0 - ratio).max(0.0);
    tb * inner / (1.0 - t * t)
}

/// Add susceptibility-propagation messages to a BP/SNBP solution.
pub fn ising_susceptibility(
    g: &Graph,
    sol: &IsingSolution,
    opts: &SolverOptions,
) -> Result<IsingSolution> {
    if sol.approximation != Approximation::BeliefPropagation {
        return Err(Error::InvalidParameter(
            "ising_susceptibility expects a message-passing solution; use ising_mfa_susceptibility".into(),
        ));
    }
    opts.validate()?;
    let beta = sol.beta;
    let tb = beta.tanh();
    let len = g.num_directed();
    let t = &sol.t_messages;
    let coeff: Vec<f64> = (0..len)
        .map(|d| {
            let (i, _) = g.endpoints(d);
            if Some(i) == sol.source {
                0.0
            } else {
                response_coefficient(t[d], tb)
            }
        })
        .collect();

    let mut q = MessageField::filled(len, 0.0);
    let mut scratch = vec![0.0; len];
    let update = |q: &[f64], d: usize| -> f64 {
        if coeff[d] == 0.0 {
            return 0.0;
        }
        let j = g.sender(d);
        let skip = g.reverse(d);
        let mut acc = 1.0;
        for e in g.incoming(j) {
            if e != skip {
                acc += q[e];
            }
        }
        coeff[d] * acc
    };
    let outcome = if len > 0 {
        Some(iterate_linear(opts, transient_sweeps(g), || {
            let mut residual: f64 = 0.0;
            let mut top: f64 = 0.0;
            match opts.schedule {
                Schedule::Sequential => {
                    let qs = q.as_mut_slice();
                    for d in 0..len {
                        let new = update(qs, d);
                        residual = residual.max((new - qs[d]).abs());
                        top = top.max(new.abs());
                        qs[d] = new;
                    }
                }
                Schedule::Synchronous => {
                    for d in 0..len {
                        scratch[d] = update(q.as_slice(), d);
                    }
                    let qs = q.as_mut_slice();
                    for d in 0..len {
                        residual = residual.max((scratch[d] - qs[d]).abs());
                        top = top.max(scratch[d].abs());
                        qs[d] = scratch[d];
                    }
                }
            }
            (residual, top)
        }))
    } else {
        None
    };
    let diverged = outcome.as_ref().is_some_and(|o| o.diverged);
    let convergence = outcome.map(|o| o.convergence).unwrap_or(Convergence {
        iterations: 0,
        max_residual: 0.0,
        converged: true,
    });

    let chi_node: Vec<f64> = (0..g.n())
        .map(|i| {
            let m = sol.m_node[i];
            if diverged && m < 1.0 {
                f64::INFINITY
            } else {
                let acc: f64 = 1.0 + g.incoming(i).map(|d| q[d]).sum::<f64>();
                beta * (1.0 - m * m) * acc
            }
        })
        .collect();
    let susceptibility = if diverged { f64::INFINITY } else { mean(&chi_node) };

    let mut out = sol.clone();
    out.response = Some(IsingResponse {
        q_messages: q,
        chi_node,
        susceptibility,
        diverged,
        convergence,
    });
    Ok(out)
}

/// Node-indexed mean field, `m_i = tanh(sum_j artanh(tanh(beta) m_j))`,
/// with `m_x = 1` for a source.
pub fn solve_ising_mfa(
    g: &Graph,
    temp: Temperature,
    source: Option<usize>,
    opts: &SolverOptions,
) -> Result<IsingSolution> {
    check_source(g, source)?;
    opts.validate()?;
    let tb = temp.beta().tanh();
    let n = g.n();
    let mut m: Vec<f64> = match opts.init {
        Init::Ones => vec![1.0; n],
        Init::Zeros => vec![0.0; n],
        Init::UniformRandom(seed) => {
            let mut rng = seed.rng();
            (0..n).map(|_| rng.gen::<f64>()).collect()
        }
    };
    if let Some(x) = source {
        m[x] = 1.0;
    }
    let mut scratch = vec![0.0; n];
    let update = |m: &[f64], i: usize| -> f64 {
        if Some(i) == source {
            return 1.0;
        }
        let h: f64 = g.neighbors(i).iter().map(|&j| artanh(tb * m[j])).sum();
        h.tanh()
    };
    let convergence = iterate(opts, || {
        let mut residual: f64 = 0.0;
        match opts.schedule {
            Schedule::Sequential => {
                for i in 0..n {
                    let new = opts.relax(m[i], update(&m, i));
                    residual = residual.max((new - m[i]).abs());
                    m[i] = new;
                }
            }
            Schedule::Synchronous => {
                for i in 0..n {
                    scratch[i] = opts.relax(m[i], update(&m, i));
                }
                for i in 0..n {
                    residual = residual.max((scratch[i] - m[i]).abs());
                    m[i] = scratch[i];
                }
            }
        }
        residual
    });
    Ok(IsingSolution {
        approximation: Approximation::MeanField,
        beta: temp.beta(),
        source,
        t_messages: MessageField::default(),
        magnetization: mean(&m),
        m_node: m,
        convergence,
        response: None,
    })
}

/// Mean-field susceptibility; not defined with a source.
pub fn ising_mfa_susceptibility(
    g: &Graph,
    sol: &IsingSolution,
    opts: &SolverOptions,
) -> Result<IsingSolution> {
    if sol.approximation != Approximation::MeanField {
        return Err(Error::InvalidParameter(
            "ising_mfa_susceptibility expects a mean-field solution".into(),
        ));
    }
    if sol.source.is_some() {
        return Err(Error::Unsupported(
            "susceptibility is not defined for source-node mean field".into(),
        ));
    }
    opts.validate()?;
    let beta = sol.beta;
    let tb = beta.tanh();
    let n = g.n();
    let coeff: Vec<f64> = sol
        .m_node
        .iter()
        .map(|&m| {
            tb * (1.0 - m * m) / (1.0 - m * m * tb * tb)
        })
        .collect();
    let mut q = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let update = |q: &[f64], i: usize| -> f64 {
        let acc: f64 = 1.0 + g.neighbors(i).iter().map(|&j| q[j]).sum::<f64>();
        coeff[i] * acc
    };
    let outcome = iterate_linear(opts, transient_sweeps(g), || {
        let mut residual: f64 = 0.0;
        let mut top: f64 = 0.0;
        match opts.schedule {
            Schedule::Sequential => {
                for i in 0..n {
                    let new = update(&q, i);
                    residual = residual.max((new - q[i]).abs());
                    top = top.max(new.abs());
                    q[i] = new;
                }
            }
            Schedule::Synchronous => {
                for i in 0..n {
                    scratch[i] = update(&q, i);
                }
                for i in 0..n {
                    residual = residual.max((scratch[i] - q[i]).abs());
                    top = top.max(scratch[i].abs());
                    q[i] = scratch[i];
                }
            }
        }
        (residual, top)
    });
    let chi_node: Vec<f64> = (0..n)
        .map(|i| {
            if outcome.diverged {
                f64::INFINITY
            } else {
                let m = sol.m_node[i];
                let acc: f64 = 1.0 + g.neighbors(i).iter().map(|&j| q[j]).sum::<f64>();
                beta * (1.0 - m * m) * acc
            }
        })
        .collect();
    let susceptibility = if outcome.diverged { f64::INFINITY } else { mean(&chi_node) };
    let mut out = sol.clone();
    out.response = Some(IsingResponse {
        q_messages: MessageField::from_vec(q),
        chi_node,
        susceptibility,
        diverged: outcome.diverged,
        convergence: outcome.convergence,
    });
    Ok(out)
}
