//! Simple undirected graphs with a directed-edge index.
//!
//! Adjacency is stored in compressed rows with each neighbor list sorted
//! ascending. Directed edge `i <- j` (a message sent from `j` to `i`) lives in
//! slot `offsets[i] + k` where `neighbors[offsets[i] + k] == j`, so all
//! messages arriving at a node are contiguous. `reverse[d]` is the slot of
//! the opposite direction.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    reverse: Vec<usize>,
    labels: Vec<String>,
}

impl Graph {
    /// Build a graph from node count and undirected edges. Rejects self-loops,
    /// duplicates and out-of-range ids.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Graph::with_labels(labels, edges)
    }

    pub fn with_labels(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Graph> {
        let n = labels.len();
        let mut seen = HashSet::with_capacity(edges.len());
        let mut canon = Vec::with_capacity(edges.len());
        let mut degree = vec![0usize; n];
        for &(a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(Error::NodeOutOfRange { node: v, n });
                }
            }
            let e = (a.min(b), a.max(b));
            if a == b || !seen.insert(e) {
                return Err(Error::InvalidEdge(a, b));
            }
            degree[a] += 1;
            degree[b] += 1;
            canon.push(e);
        }

        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0usize; offsets[n]];
        for &(a, b) in &canon {
            neighbors[fill[a]] = b;
            fill[a] += 1;
            neighbors[fill[b]] = a;
            fill[b] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }

        let mut reverse = vec![0usize; neighbors.len()];
        for i in 0..n {
            for d in offsets[i]..offsets[i + 1] {
                let j = neighbors[d];
                let row = &neighbors[offsets[j]..offsets[j + 1]];
                let k = row.binary_search(&i).expect("adjacency is symmetric");
                reverse[d] = offsets[j] + k;
            }
        }

        Ok(Graph {
            n,
            edges: canon,
            offsets,
            neighbors,
            reverse,
            labels,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Undirected edges as `(min, max)` pairs in insertion order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edge set sorted, for comparisons that ignore insertion order.
    pub fn sorted_edges(&self) -> Vec<(usize, usize)> {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Number of directed edges, `2M`.
    pub fn num_directed(&self) -> usize {
        self.neighbors.len()
    }

    /// Slots of the messages arriving at `i`.
    pub fn incoming(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// Slot of directed edge `i <- j`, if `j` is a neighbor of `i`.
    pub fn directed_index(&self, i: usize, j: usize) -> Option<usize> {
        let row = self.neighbors(i);
        row.binary_search(&j).ok().map(|k| self.offsets[i] + k)
    }

    /// `(receiver, sender)` of a directed slot.
    pub fn endpoints(&self, d: usize) -> (usize, usize) {
        let i = self.offsets.partition_point(|&o| o <= d) - 1;
        (i, self.neighbors[d])
    }

    /// Sender of the message stored in slot `d`.
    pub fn sender(&self, d: usize) -> usize {
        self.neighbors[d]
    }

    /// Slot of the opposite direction.
    pub fn reverse(&self, d: usize) -> usize {
        self.reverse[d]
    }

    /// Receivers of every slot, aligned with slot order.
    pub fn receivers(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.num_directed());
        for i in 0..self.n {
            out.extend(std::iter::repeat_n(i, self.degree(i)));
        }
        out
    }

    pub fn is_tree(&self) -> bool {
        self.is_connected() && self.m() + 1 == self.n
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.bfs_distances(0).iter().all(|d| d.is_some())
    }

    /// Hop distances from `root`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, root: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[root] = Some(0);
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &v in self.neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Component label per node, labels assigned in order of smallest member.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
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

    /// Subgraph induced by `keep` (ascending node ids), ids re-densified in order.
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .filter(|&&(a, b)| map[a] != usize::MAX && map[b] != usize::MAX)
            .map(|&(a, b)| (map[a], map[b]))
            .collect();
        let labels = keep.iter().map(|&i| self.labels[i].clone()).collect();
        Graph::with_labels(labels, &edges).expect("induced subgraph of a simple graph is simple")
    }
}

/// Counts reported while reading an edge list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseSummary {
    pub lines: usize,
    pub edges_read: usize,
    pub duplicates_dropped: usize,
    pub self_loops_dropped: usize,
    pub nodes: usize,
    pub edges: usize,
}

impl fmt::Display for ParseSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lines = {}", self.lines)?;
        writeln!(f, "edges_read = {}", self.edges_read)?;
        writeln!(f, "duplicates_dropped = {}", self.duplicates_dropped)?;
        writeln!(f, "self_loops_dropped = {}", self.self_loops_dropped)?;
        writeln!(f, "nodes = {}", self.nodes)?;
        write!(f, "edges = {}", self.edges)
    }
}

/// Parse a whitespace-separated edge list. Labels are arbitrary tokens mapped
/// to dense ids in first-seen order; `#` lines and blank lines are skipped.
/// Edge direction, duplicates and self-loops are dropped.
pub fn load_edge_list(text: &str) -> Result<(Graph, ParseSummary)> {
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    let mut summary = ParseSummary::default();

    for (lineno, line) in text.lines().enumerate() {
        summary.lines += 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected 2 node labels, found {}", tokens.len()),
            });
        }
        let mut ends = [0usize; 2];
        for (slot, tok) in ends.iter_mut().zip(&tokens) {
            *slot = match ids.get(tok) {
                Some(&v) => v,
                None => {
                    let v = labels.len();
                    ids.insert(tok, v);
                    labels.push((*tok).to_string());
                    v
                }
            };
        }
        summary.edges_read += 1;
        let [a, b] = ends;
        if a == b {
            summary.self_loops_dropped += 1;
            continue;
        }
        if !seen.insert((a.min(b), a.max(b))) {
            summary.duplicates_dropped += 1;
            continue;
        }
        edges.push((a, b));
    }

    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let g = Graph::with_labels(labels, &edges)?;
    summary.nodes = g.n();
    summary.edges = g.m();
    Ok((g, summary))
}

/// Write the edge-list format read by [`load_edge_list`], using node labels.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    out.push_str(&format!("# nodes {} edges {}\n", g.n(), g.m()));
    for &(a, b) in g.edges() {
        out.push_str(&g.labels[a]);
        out.push(' ');
        out.push_str(&g.labels[b]);
        out.push('\n');
    }
    out
}

/// Keep the largest connected component (ties go to the component holding
/// the smallest node id), re-densifying ids in their original order.
pub fn preprocess(g: &Graph) -> Graph {
    if g.n() == 0 {
        return g.clone();
    }
    let label = g.components();
    let count = label.iter().max().map_or(0, |&l| l + 1);
    let mut size = vec![0usize; count];
    for &l in &label {
        size[l] += 1;
    }
    // labels are numbered by smallest member, so the first maximum wins ties
    let mut best = 0;
    for (l, &s) in size.iter().enumerate() {
        if s > size[best] {
            best = l;
        }
    }
    let keep: Vec<usize> = (0..g.n()).filter(|&i| label[i] == best).collect();
    g.induced(&keep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub n: usize,
    pub m: usize,
    pub cyclomatic: usize,
    pub mean_degree: f64,
}

/// Node/edge counts, cyclomatic number `M - N + 1` and mean degree.
pub fn stats(g: &Graph) -> Result<GraphStats> {
    if g.n() == 0 {
        return Err(Error::EmptyInput);
    }
    if !g.is_connected() {
        let components = g.components().into_iter().max().unwrap_or(0) + 1;
        return Err(Error::Disconnected { components });
    }
    Ok(GraphStats {
        n: g.n(),
        m: g.m(),
        cyclomatic: g.m() + 1 - g.n(),
        mean_degree: 2.0 * g.m() as f64 / g.n() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourcePolicy {
    HighestDegree,
    Explicit(usize),
}

/// Pick the symmetry-breaking source node. Degree ties go to the smallest id.
pub fn select_source(g: &Graph, policy: SourcePolicy) -> Result<usize> {
    match policy {
        SourcePolicy::Explicit(x) if x < g.n() => Ok(x),
        SourcePolicy::Explicit(x) => Err(Error::NodeOutOfRange { node: x, n: g.n() }),
        SourcePolicy::HighestDegree => {
            if g.n() == 0 {
                return Err(Error::EmptyInput);
            }
            let mut best = 0;
            for i in 1..g.n() {
                if g.degree(i) > g.degree(best) {
                    best = i;
                }
            }
            Ok(best)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn load_simple_path() {
        let (g, s) = load_edge_list("0 1\n1 2\n").unwrap();
        assert_eq!((g.n(), g.m()), (3, 2));
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(s.duplicates_dropped + s.self_loops_dropped, 0);
    }

    #[test]
    fn load_drops_duplicates_and_loops() {
        let (g, s) = load_edge_list("a b\nb a\na a\n").unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
        assert_eq!(s.duplicates_dropped, 1);
        assert_eq!(s.self_loops_dropped, 1);
        assert_eq!(g.labels(), &["a".to_string(), "b".to_string()]);
        let text = s.to_string();
        assert!(text.contains("duplicates_dropped = 1"));
        assert!(text.contains("self_loops_dropped = 1"));
    }

    #[test]
    fn load_skips_comments_and_reports_bad_lines() {
        let (g, _) = load_edge_list("# header\n\nx y\n").unwrap();
        assert_eq!(g.m(), 1);
        match load_edge_list("0 1\n1 2 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(load_edge_list("# only comments\n"), Err(Error::EmptyInput)));
        assert!(matches!(load_edge_list(""), Err(Error::EmptyInput)));
    }

    #[test]
    fn strict_constructor_rejects_bad_edges() {
        assert!(Graph::from_edges(2, &[(0, 0)]).is_err());
        assert!(Graph::from_edges(2, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn directed_index_round_trips() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap();
        assert_eq!(g.num_directed(), 8);
        let mut seen = [false; 8];
        for i in 0..g.n() {
            for &j in g.neighbors(i) {
                let d = g.directed_index(i, j).unwrap();
                assert!(!seen[d]);
                seen[d] = true;
                assert_eq!(g.endpoints(d), (i, j));
                assert_eq!(g.endpoints(g.reverse(d)), (j, i));
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(g.directed_index(0, 3), None);
    }

    #[test]
    fn preprocess_keeps_largest_component() {
        let g = Graph::from_edges(5, &[(0, 1), (3, 4), (2, 3)]).unwrap();
        let h = preprocess(&g);
        assert_eq!((h.n(), h.m()), (3, 2));
        assert_eq!(h.labels(), &["2", "3", "4"]);
    }

    #[test]
    fn preprocess_tie_goes_to_smallest_id() {
        let g = Graph::from_edges(4, &[(2, 3), (0, 1)]).unwrap();
        let h = preprocess(&g);
        assert_eq!(h.labels(), &["0", "1"]);
    }

    #[test]
    fn preprocess_connected_is_identity() {
        let g = path3();
        let h = preprocess(&g);
        assert_eq!(h.sorted_edges(), g.sorted_edges());
        assert_eq!(h.n(), g.n());
    }

    #[test]
    fn stats_of_single_edge_and_path() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let s = stats(&g).unwrap();
        assert_eq!(s.cyclomatic, 0);
        assert_eq!(s.mean_degree, 1.0);
        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(stats(&tri).unwrap().cyclomatic, 1);
    }

    #[test]
    fn stats_rejects_disconnected() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(stats(&g), Err(Error::Disconnected { components: 2 })));
    }

    #[test]
    fn source_selection() {
        let star = Graph::from_edges(6, &[(3, 0), (3, 1), (3, 2), (3, 4), (3, 5)]).unwrap();
        assert_eq!(select_source(&star, SourcePolicy::HighestDegree).unwrap(), 3);
        let ten = Graph::from_edges(10, &(0..9).map(|i| (i, i + 1)).collect::<Vec<_>>()).unwrap();
        assert_eq!(select_source(&ten, SourcePolicy::Explicit(7)).unwrap(), 7);
        assert!(select_source(&ten, SourcePolicy::Explicit(10)).is_err());
        // path: nodes 1..8 all have degree 2, smallest wins
        assert_eq!(select_source(&ten, SourcePolicy::HighestDegree).unwrap(), 1);
    }
}
