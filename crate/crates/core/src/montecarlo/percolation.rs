//! Bond percolation sampling, conventional and relative to a source node.

use rand::Rng;
use rayon::prelude::*;

use super::stats::{Estimate, McStats, Observable};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::Seed;

/// Disjoint-set forest with union by size and path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i;
        }
        self.size.fill(1);
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }

    pub fn size_of(&mut self, i: usize) -> usize {
        let r = self.find(i);
        self.size[r]
    }

    /// Component label per node, numbered by smallest member.
    pub fn labels(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut label_of_root = vec![usize::MAX; n];
        let mut next = 0;
        (0..n)
            .map(|i| {
                let r = self.find(i);
                if label_of_root[r] == usize::MAX {
                    label_of_root[r] = next;
                    next += 1;
                }
                label_of_root[r]
            })
            .collect()
    }
}

/// Component labels of the occupied-edge subgraph by breadth-first search,
/// numbered by smallest member.
pub fn bfs_labels(n: usize, occupied: &[(usize, usize)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in occupied {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if label[v] == usize::MAX {
                    label[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    label
}

/// Observables of one bond configuration, with cluster sizes in integers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ClusterSummary {
    pub largest: usize,
    pub sum_sq: u64,
    pub sum_sq_without_largest: u64,
    pub source_size: usize,
    pub sum_sq_without_source: u64,
}

/// Summarise the clusters held in `uf`. The largest cluster is the first
/// maximal one met in node order, so ties go to the smallest node id.
pub(crate) fn summarize(uf: &mut UnionFind, source: Option<usize>, seen: &mut [bool]) -> ClusterSummary {
    let n = seen.len();
    seen.fill(false);
    let mut largest = 0;
    let mut sum_sq = 0u64;
    let mut total = 0usize;
    for i in 0..n {
        let r = uf.find(i);
        if !seen[r] {
            seen[r] = true;
            let s = uf.size[r];
            total += s;
            sum_sq += (s * s) as u64;
            if s > largest {
                largest = s;
            }
        }
    }
    assert_eq!(total, n, "cluster sizes must partition the node set");
    let (source_size, sum_sq_without_source) = match source {
        Some(x) => {
            let s = uf.size_of(x);
            (s, sum_sq - (s * s) as u64)
        }
        None => (0, 0),
    };
    ClusterSummary {
        largest,
        sum_sq,
        sum_sq_without_largest: sum_sq - (largest * largest) as u64,
        source_size,
        sum_sq_without_source,
    }
}

fn check(g: &Graph, p: f64, realizations: usize, source: Option<usize>) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
    }
    if realizations < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 realizations, got {realizations}"
        )));
    }
    if g.n() == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(x) = source {
        if x >= g.n() {
            return Err(Error::NodeOutOfRange { node: x, n: g.n() });
        }
    }
    Ok(())
}

const CHUNK: usize = 256;

/// Sample `realizations` independent bond configurations. Realization `r`
/// draws from stream `r` of `seed`, so the result does not depend on how the
/// work is split across threads.
pub fn mc_percolation(
    g: &Graph,
    p: f64,
    realizations: usize,
    seed: Seed,
    source: Option<usize>,
) -> Result<McStats> {
    check(g, p, realizations, source)?;
    let n = g.n();
    let edges = g.edges();
    let chunks: Vec<Vec<ClusterSummary>> = (0..realizations.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut uf = UnionFind::new(n);
            let mut seen = vec![false; n];
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(realizations);
            (lo..hi)
                .map(|r| {
                    let mut rng = seed.stream(r as u64);
                    uf.reset();
                    for &(a, b) in edges {
                        if rng.gen::<f64>() < p {
                            uf.union(a, b);
                        }
                    }
                    summarize(&mut uf, source, &mut seen)
                })
                .collect()
        })
        .collect();
    let rows: Vec<ClusterSummary> = chunks.into_iter().flatten().collect();

    let nf = n as f64;
    let column = |f: &dyn Fn(&ClusterSummary) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };
    let mut out = McStats::default();
    out.insert(Observable::S1, Estimate::from_samples(&column(&|r| r.largest as f64 / nf))?);
    out.insert(Observable::ChiTrue, Estimate::from_samples(&column(&|r| r.sum_sq as f64 / nf))?);
    out.insert(
        Observable::ChiPractical,
        Estimate::from_samples(&column(&|r| r.sum_sq_without_largest as f64 / nf))?,
    );
    if source.is_some() {
        out.insert(Observable::SX, Estimate::from_samples(&column(&|r| r.source_size as f64 / nf))?);
        out.insert(
            Observable::ChiSource,
            Estimate::from_samples(&column(&|r| r.sum_sq_without_source as f64 / nf))?,
        );
    }
    Ok(out)
}
