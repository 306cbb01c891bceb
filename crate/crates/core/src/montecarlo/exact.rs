//! Exhaustive enumeration over all bond or spin configurations of small
//! graphs. These are the reference values the samplers are tested against.

use serde::{Deserialize, Serialize};

use super::percolation::{summarize, UnionFind};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ising::Temperature;

pub const MAX_PERCOLATION_EDGES: usize = 24;
pub const MAX_ISING_NODES: usize = 20;

/// Exact bond-percolation averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactPercolation {
    pub s1: f64,
    pub chi_true: f64,
    pub chi_practical: f64,
    pub s_x: Option<f64>,
    pub chi_source: Option<f64>,
    /// Probability that node `i` is connected to the source.
    pub connect_probability: Option<Vec<f64>>,
}

/// Exact Boltzmann averages for the zero-field Ising model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactIsing {
    pub abs_m: f64,
    pub m_sq: f64,
    pub chi_true: f64,
    pub chi_practical: f64,
    pub m_sigma_x: Option<f64>,
    pub chi_source: Option<f64>,
    /// `<s_i | s_x = +1>` per node.
    pub conditional_means: Option<Vec<f64>>,
}

fn check_source(g: &Graph, source: Option<usize>) -> Result<()> {
    match source {
        Some(x) if x >= g.n() => Err(Error::NodeOutOfRange { node: x, n: g.n() }),
        _ => Ok(()),
    }
}

pub fn enumerate_percolation(g: &Graph, p: f64, source: Option<usize>) -> Result<ExactPercolation> {
    let m = g.m();
    if m > MAX_PERCOLATION_EDGES {
        return Err(Error::TooLarge {
            what: "edges for exact percolation",
            value: m,
            limit: MAX_PERCOLATION_EDGES,
        });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
    }
    if g.n() == 0 {
        return Err(Error::EmptyInput);
    }
    check_source(g, source)?;
    let n = g.n();
    let nf = n as f64;
    let weight: Vec<f64> = (0..=m).map(|k| p.powi(k as i32) * (1.0 - p).powi((m - k) as i32)).collect();
    let mut uf = UnionFind::new(n);
    let mut seen = vec![false; n];
    let (mut s1, mut chi_t, mut chi_p, mut s_x, mut chi_s) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut connect = vec![0.0; n];
    for mask in 0u32..(1u32 << m) {
        let w = weight[mask.count_ones() as usize];
        if w == 0.0 {
            continue;
        }
        uf.reset();
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            if mask >> e & 1 == 1 {
                uf.union(a, b);
            }
        }
        let c = summarize(&mut uf, source, &mut seen);
        s1 += w * c.largest as f64;
        chi_t += w * c.sum_sq as f64;
        chi_p += w * c.sum_sq_without_largest as f64;
        if let Some(x) = source {
            s_x += w * c.source_size as f64;
            chi_s += w * c.sum_sq_without_source as f64;
            let rx = uf.find(x);
            for (i, slot) in connect.iter_mut().enumerate() {
                if uf.find(i) == rx {
                    *slot += w;
                }
            }
        }
    }
    Ok(ExactPercolation {
        s1: s1 / nf,
        chi_true: chi_t / nf,
        chi_practical: chi_p / nf,
        s_x: source.map(|_| s_x / nf),
        chi_source: source.map(|_| chi_s / nf),
        connect_probability: source.map(|_| connect),
    })
}

pub fn enumerate_ising(g: &Graph, temp: Temperature, source: Option<usize>) -> Result<ExactIsing> {
    let n = g.n();
    if n > MAX_ISING_NODES {
        return Err(Error::TooLarge {
            what: "nodes for exact Ising",
            value: n,
            limit: MAX_ISING_NODES,
        });
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    check_source(g, source)?;
    let beta = temp.beta();
    let m_edges = g.m() as i64;
    // weights exp(beta (sum s_i s_j - M)) stay in (0, 1]
    let weight: Vec<f64> = (0..=2 * m_edges)
        .map(|k| (beta * (k - 2 * m_edges) as f64).exp())
        .collect();
    let (mut z, mut abs_m, mut m_sq, mut m_sx) = (0.0, 0.0, 0.0, 0.0);
    let mut z_up = 0.0;
    let mut cond = vec![0.0; n];
    let spin = |state: u32, i: usize| -> i64 { if state >> i & 1 == 1 { 1 } else { -1 } };
    for state in 0u32..(1u32 << n) {
        let bonds: i64 = g.edges().iter().map(|&(a, b)| spin(state, a) * spin(state, b)).sum();
        let w = weight[(bonds + m_edges) as usize];
        let total: i64 = (0..n).map(|i| spin(state, i)).sum();
        let m = total as f64 / n as f64;
        z += w;
        abs_m += w * m.abs();
        m_sq += w * m * m;
        if let Some(x) = source {
            let sx = spin(state, x);
            m_sx += w * m * sx as f64;
            if sx == 1 {
                z_up += w;
                for (i, c) in cond.iter_mut().enumerate() {
                    *c += w * spin(state, i) as f64;
                }
            }
        }
    }
    let (abs_m, m_sq) = (abs_m / z, m_sq / z);
    let scale = beta * n as f64;
    let m_sx = m_sx / z;
    Ok(ExactIsing {
        abs_m,
        m_sq,
        chi_true: scale * m_sq,
        chi_practical: scale * (m_sq - abs_m * abs_m),
        m_sigma_x: source.map(|_| m_sx),
        chi_source: source.map(|_| scale * (m_sq - m_sx * m_sx)),
        conditional_means: source.map(|_| cond.iter().map(|c| c / z_up).collect()),
    })
}
