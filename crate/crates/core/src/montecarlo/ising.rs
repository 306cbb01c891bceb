//! Hybrid Wolff/Metropolis sampler for the zero-field Ising model.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::{mean, Estimate, McStats, Observable};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ising::{p_from_beta, Temperature};
use crate::rng::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IsingMcOptions {
    /// Upper bound on thermalization macro-steps.
    pub macro_steps: usize,
    /// Metropolis flips per macro-step and per measurement, in units of N.
    pub metropolis_sweeps_per_macro: usize,
    pub smoothing_alpha: f64,
    /// The base measurement count `round(8e5 / sqrt(N))` is divided by this.
    pub measurement_divisor: f64,
    /// Replaces the base measurement count when set.
    pub measurements: Option<usize>,
    /// Measurements are multiplied by 5 once the thermalized `|m|` reaches this.
    pub scale_threshold: f64,
    pub seed: Seed,
}

impl Default for IsingMcOptions {
    fn default() -> Self {
        IsingMcOptions {
            macro_steps: 100,
            metropolis_sweeps_per_macro: 50,
            smoothing_alpha: 0.3,
            measurement_divisor: 10.0,
            measurements: None,
            scale_threshold: 0.9,
            seed: Seed(0),
        }
    }
}

impl IsingMcOptions {
    pub fn paper_scale(seed: Seed) -> Self {
        IsingMcOptions {
            measurement_divisor: 1.0,
            seed,
            ..Default::default()
        }
    }

    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if self.macro_steps == 0 {
            return bad("macro_steps must be >= 1");
        }
        if self.metropolis_sweeps_per_macro == 0 {
            return bad("metropolis_sweeps_per_macro must be >= 1");
        }
        if !(self.smoothing_alpha > 0.0 && self.smoothing_alpha <= 1.0) {
            return bad("smoothing_alpha must lie in (0, 1]");
        }
        if !(self.measurement_divisor >= 1.0) {
            return bad("measurement_divisor must be >= 1");
        }
        if self.measurements.is_some_and(|k| k < 2) {
            return bad("measurements must be >= 2");
        }
        if !(self.scale_threshold > 0.0) {
            return bad("scale_threshold must be > 0");
        }
        Ok(())
    }

    /// Base measurement count for `n` nodes, before the ordered-phase factor.
    pub fn base_measurements(&self, n: usize) -> usize {
        self.measurements.unwrap_or_else(|| {
            let k = (8e5 / (n as f64).sqrt()).round();
            ((k / self.measurement_divisor).round() as usize).max(2)
        })
    }
}

/// Sampler output with the thermalization diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingMcRun {
    pub stats: McStats,
    pub thermalization_steps: usize,
    /// Mean `|m|` over the tail window of thermalization.
    pub m_final: f64,
    pub measurements: usize,
}

struct Chain<'g> {
    g: &'g Graph,
    spins: Vec<i8>,
    total: i64,
    rng: ChaCha8Rng,
    /// Nodes with at least one neighbor, the Wolff seed candidates.
    active: Vec<usize>,
    add_prob: f64,
    /// Acceptance for `k = s_i * sum_j s_j`, stored at `k + max_degree`.
    accept: Vec<f64>,
    max_degree: usize,
    stack: Vec<usize>,
}

impl<'g> Chain<'g> {
    fn new(g: &'g Graph, beta: f64, seed: Seed) -> Self {
        let mut rng = seed.rng();
        let spins: Vec<i8> = (0..g.n()).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        let total = spins.iter().map(|&s| s as i64).sum();
        let max_degree = (0..g.n()).map(|i| g.degree(i)).max().unwrap_or(0);
        let accept = (0..=2 * max_degree)
            .map(|idx| {
                let k = idx as f64 - max_degree as f64;
                (-2.0 * beta * k).exp().min(1.0)
            })
            .collect();
        Chain {
            g,
            spins,
            total,
            rng,
            active: (0..g.n()).filter(|&i| g.degree(i) > 0).collect(),
            add_prob: p_from_beta(beta),
            accept,
            max_degree,
            stack: Vec::new(),
        }
    }

    fn local_field(&self, i: usize) -> i64 {
        self.g.neighbors(i).iter().map(|&j| self.spins[j] as i64).sum()
    }

    fn energy(&self) -> f64 {
        let twice: i64 = (0..self.g.n()).map(|i| self.spins[i] as i64 * self.local_field(i)).sum();
        -0.5 * twice as f64
    }

    fn magnetization(&self) -> f64 {
        self.total as f64 / self.g.n() as f64
    }

    /// Grow and flip one cluster. Members are flipped as they join, so the
    /// like-spin test also excludes nodes already in the cluster.
    fn wolff(&mut self) {
        if self.active.is_empty() {
            return;
        }
        let seed = self.active[self.rng.gen_range(0..self.active.len())];
        let s = self.spins[seed];
        self.spins[seed] = -s;
        self.stack.push(seed);
        let mut size = 1i64;
        while let Some(u) = self.stack.pop() {
            for &v in self.g.neighbors(u) {
                if self.spins[v] == s && self.rng.gen::<f64>() < self.add_prob {
                    self.spins[v] = -s;
                    self.stack.push(v);
                    size += 1;
                }
            }
        }
        self.total -= 2 * s as i64 * size;
    }

    fn metropolis(&mut self, flips: usize) {
        let n = self.g.n();
        for _ in 0..flips {
            let i = self.rng.gen_range(0..n);
            let s = self.spins[i] as i64;
            let k = s * self.local_field(i);
            if k <= 0 || self.rng.gen::<f64>() < self.accept[(k + self.max_degree as i64) as usize] {
                self.spins[i] = -self.spins[i];
                self.total -= 2 * s;
            }
        }
    }
}

/// Run the hybrid sampler: thermalize with early stopping, then measure
/// `|m|`, `m^2` and, with a source, `m * s_x`.
pub fn mc_ising_run(
    g: &Graph,
    temp: Temperature,
    opts: &IsingMcOptions,
    source: Option<usize>,
) -> Result<IsingMcRun> {
    opts.validate()?;
    let n = g.n();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if !g.is_connected() {
        let components = g.components().into_iter().max().map_or(0, |c| c + 1);
        return Err(Error::Disconnected { components });
    }
    if let Some(x) = source {
        if x >= n {
            return Err(Error::NodeOutOfRange { node: x, n });
        }
    }
    let beta = temp.beta();
    let mut chain = Chain::new(g, beta, opts.seed);
    let flips = opts.metropolis_sweeps_per_macro * n;
    let alpha = opts.smoothing_alpha;

    let mut smoothed = chain.energy();
    let mut history = Vec::with_capacity(opts.macro_steps);
    let mut ordered_run = 0;
    let mut flat_run = 0;
    for i in 1..=opts.macro_steps {
        chain.wolff();
        chain.metropolis(flips);
        let abs_m = chain.magnetization().abs();
        history.push(abs_m);
        let e = chain.energy();
        let previous = smoothed;
        smoothed = if i <= 2 { e } else { alpha * e + (1.0 - alpha) * smoothed };
        ordered_run = if abs_m > 0.95 { ordered_run + 1 } else { 0 };
        if ordered_run >= 2 {
            break;
        }
        if i > 2 {
            flat_run = if smoothed - previous > -0.001 * smoothed.abs() { flat_run + 1 } else { 0 };
            if flat_run >= 6 {
                break;
            }
        }
    }
    let steps = history.len();
    let window = match steps {
        s if s >= 12 => 7,
        s if s >= 10 => 5,
        s if s >= 8 => 3,
        _ => 2,
    }
    .min(steps);
    let m_final = mean(&history[steps - window..]);

    let factor = if m_final < opts.scale_threshold { 1 } else { 5 };
    let count = opts.base_measurements(n) * factor;
    let mut abs_m = Vec::with_capacity(count);
    let mut m_sq = Vec::with_capacity(count);
    let mut m_sx = Vec::with_capacity(if source.is_some() { count } else { 0 });
    for _ in 0..count {
        chain.wolff();
        chain.metropolis(flips);
        let m = chain.magnetization();
        abs_m.push(m.abs());
        m_sq.push(m * m);
        if let Some(x) = source {
            m_sx.push(m * chain.spins[x] as f64);
        }
    }

    let scale = beta * n as f64;
    let mut stats = McStats::default();
    let e_abs = Estimate::from_samples(&abs_m)?;
    let e_sq = Estimate::from_samples(&m_sq)?;
    let chi_true: Vec<f64> = m_sq.iter().map(|v| scale * v).collect();
    stats.insert(Observable::ChiTrue, Estimate::from_linearized(scale * e_sq.mean, &chi_true)?);
    // first-order influence of <m^2> - <X>^2 on each sample
    let centered = |x: &[f64], x_mean: f64| -> Vec<f64> {
        m_sq.iter().zip(x).map(|(q, v)| scale * (q - 2.0 * x_mean * v)).collect()
    };
    stats.insert(
        Observable::ChiPractical,
        Estimate::from_linearized(
            scale * (e_sq.mean - e_abs.mean * e_abs.mean),
            &centered(&abs_m, e_abs.mean),
        )?,
    );
    if source.is_some() {
        let e_sx = Estimate::from_samples(&m_sx)?;
        stats.insert(
            Observable::ChiSource,
            Estimate::from_linearized(scale * (e_sq.mean - e_sx.mean * e_sx.mean), &centered(&m_sx, e_sx.mean))?,
        );
        stats.insert(Observable::MSigmaX, e_sx);
    }
    stats.insert(Observable::AbsM, e_abs);
    stats.insert(Observable::MSq, e_sq);
    Ok(IsingMcRun {
        stats,
        thermalization_steps: steps,
        m_final,
        measurements: count,
    })
}

pub fn mc_ising(g: &Graph, temp: Temperature, opts: &IsingMcOptions, source: Option<usize>) -> Result<McStats> {
    mc_ising_run(g, temp, opts, source).map(|r| r.stats)
}
