//! Seeded generators for synthetic test networks.

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{preprocess, Graph};
use crate::rng::Seed;

/// Cayley tree: the root has `coordination` children and every other
/// internal node `coordination - 1`, for `depth` levels. Nodes are numbered
/// breadth first from the root (id 0).
pub fn cayley_tree(coordination: usize, depth: usize) -> Result<Graph> {
    if coordination < 2 {
        return Err(Error::InvalidParameter(format!(
            "coordination must be >= 2, got {coordination}"
        )));
    }
    let mut edges = Vec::new();
    let mut level = vec![0usize];
    let mut n = 1;
    for d in 0..depth {
        let children = if d == 0 { coordination } else { coordination - 1 };
        let mut next = Vec::with_capacity(level.len() * children);
        for &parent in &level {
            for _ in 0..children {
                edges.push((parent, n));
                next.push(n);
                n += 1;
            }
        }
        level = next;
    }
    Graph::from_edges(n, &edges)
}

/// Add `k` edges between uniformly chosen non-adjacent node pairs.
pub fn add_random_edges(g: &Graph, k: usize, seed: Seed) -> Result<Graph> {
    let n = g.n();
    let present: HashSet<(usize, usize)> = g.edges().iter().copied().collect();
    let absent: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|e| !present.contains(e))
        .collect();
    if k > absent.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot add {k} edges: only {} node pairs are non-adjacent",
            absent.len()
        )));
    }
    let mut rng = seed.rng();
    let mut picked: Vec<usize> = index::sample(&mut rng, absent.len(), k).into_vec();
    picked.sort_unstable();
    let mut edges = g.edges().to_vec();
    edges.extend(picked.into_iter().map(|i| absent[i]));
    Graph::with_labels(g.labels().to_vec(), &edges)
}

/// Decode a linear index over pairs `a < b` of `n` nodes (row-major).
fn pair_from_index(n: usize, mut k: usize) -> (usize, usize) {
    let mut a = 0;
    loop {
        let row = n - 1 - a;
        if k < row {
            return (a, a + 1 + k);
        }
        k -= row;
        a += 1;
    }
}

/// G(n, m) with exactly `m` distinct edges, before component extraction.
pub fn gnm_raw(n: usize, m: usize, seed: Seed) -> Result<Graph> {
    let pairs = n * n.saturating_sub(1) / 2;
    if m > pairs {
        return Err(Error::InvalidParameter(format!(
            "m = {m} exceeds the {pairs} possible edges on {n} nodes"
        )));
    }
    let mut rng = seed.rng();
    let mut picked = index::sample(&mut rng, pairs, m).into_vec();
    picked.sort_unstable();
    let edges: Vec<_> = picked.into_iter().map(|k| pair_from_index(n, k)).collect();
    Graph::from_edges(n, &edges)
}

/// Erdős–Rényi G(n, m), reduced to its largest connected component.
pub fn erdos_renyi_gnm(n: usize, m: usize, seed: Seed) -> Result<Graph> {
    Ok(preprocess(&gnm_raw(n, m, seed)?))
}

/// Preferential attachment: a complete seed graph on `m_per_node + 1` nodes,
/// then each arriving node links to `m_per_node` distinct existing nodes
/// drawn with probability proportional to degree.
pub fn barabasi_albert(n: usize, m_per_node: usize, seed: Seed) -> Result<Graph> {
    if m_per_node < 1 || n <= m_per_node {
        return Err(Error::InvalidParameter(format!(
            "need n > m_per_node >= 1, got n = {n}, m_per_node = {m_per_node}"
        )));
    }
    let core = m_per_node + 1;
    let mut edges = Vec::new();
    // each node appears once per incident edge
    let mut ends = Vec::new();
    for a in 0..core {
        for b in a + 1..core {
            edges.push((a, b));
            ends.push(a);
            ends.push(b);
        }
    }
    let mut rng = seed.rng();
    let mut targets = Vec::with_capacity(m_per_node);
    for v in core..n {
        targets.clear();
        while targets.len() < m_per_node {
            let t = ends[rng.gen_range(0..ends.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, v));
            ends.push(t);
            ends.push(v);
        }
    }
    Graph::from_edges(n, &edges)
}

/// Open-boundary `w x h` grid; node `(x, y)` has id `y * w + x`.
pub fn square_lattice(w: usize, h: usize) -> Result<Graph> {
    if w == 0 || h == 0 {
        return Err(Error::InvalidParameter("lattice sides must be >= 1".into()));
    }
    let mut edges = Vec::with_capacity(w * (h - 1) + h * (w - 1));
    for y in 0..h {
        for x in 0..w {
            let v = y * w + x;
            if x + 1 < w {
                edges.push((v, v + 1));
            }
            if y + 1 < h {
                edges.push((v, v + w));
            }
        }
    }
    Graph::from_edges(w * h, &edges)
}

/// Points uniform in the unit square, linked when within `radius`; reduced
/// to the largest connected component.
pub fn random_geometric(n: usize, radius: f64, seed: Seed) -> Result<Graph> {
    if n == 0 || !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need n >= 1 and radius > 0, got n = {n}, radius = {radius}"
        )));
    }
    let mut rng = seed.rng();
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
    let r2 = radius * radius;
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let dx = pts[a].0 - pts[b].0;
            let dy = pts[a].1 - pts[b].1;
            if dx * dx + dy * dy <= r2 {
                edges.push((a, b));
            }
        }
    }
    Ok(preprocess(&Graph::from_edges(n, &edges)?))
}

/// Mean degree of the preprocessed geometric graph, averaged over `seeds`
/// consecutive derived seeds.
pub fn rgg_mean_degree(n: usize, radius: f64, seeds: usize, base: Seed) -> Result<f64> {
    let mut total = 0.0;
    for s in 0..seeds {
        let g = random_geometric(n, radius, base.derive(s as u64))?;
        total += 2.0 * g.m() as f64 / g.n() as f64;
    }
    Ok(total / seeds as f64)
}

/// Bisect the radius so the seed-averaged mean degree hits `target`.
pub fn calibrate_rgg_radius(n: usize, target: f64, seeds: usize, base: Seed) -> Result<f64> {
    let (mut lo, mut hi) = (1e-6, std::f64::consts::SQRT_2);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if rgg_mean_degree(n, mid, seeds, base)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
