//! Simple undirected graphs over dense vertex ids, vertex sets and cut counts.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::param::Param;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
    regular_degree: Option<usize>,
}

impl Graph {
    /// Builds a graph, rejecting loops, repeated edges and out-of-range ids.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return contract(format!("edge {u} {v} out of range for n = {n}"));
            }
            if u == v {
                return contract(format!("self-loop at {u}"));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return contract(format!("duplicate edge at vertex {v}"));
            }
        }
        Ok(Graph::from_sorted_adjacency(adj))
    }

    fn from_sorted_adjacency(adj: Vec<Vec<usize>>) -> Graph {
        let total: usize = adj.iter().map(Vec::len).sum();
        let regular_degree = match adj.first() {
            Some(first) if adj.iter().all(|l| l.len() == first.len()) => Some(first.len()),
            None => Some(0),
            _ => None,
        };
        Graph { adj, edge_count: total / 2, regular_degree }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn regular_degree(&self) -> Option<usize> {
        self.regular_degree
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() { (u, v) } else { (v, u) };
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().copied().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// Number of neighbours of `v` inside the set described by `mask`.
    pub fn degree_into(&self, v: usize, mask: &[bool]) -> usize {
        self.adj[v].iter().filter(|&&w| mask[w]).count()
    }

    /// Canonical edge-list document: `p n m` then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("p {} {}\n", self.n(), self.edge_count);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<VertexSet> {
        self.components_within(&vec![true; self.n()])
    }

    /// Components of the subgraph induced by `mask`.
    pub fn components_within(&self, mask: &[bool]) -> Vec<VertexSet> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if !mask[s] || seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![s];
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &self.adj[v] {
                    if mask[w] && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            out.push(VertexSet::new(comp));
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.components().len() == 1
    }

    /// Proper 2-colouring of the whole graph if one exists.
    pub fn two_coloring(&self) -> Option<Bipartition> {
        let mut side = vec![u8::MAX; self.n()];
        for s in 0..self.n() {
            if side[s] != u8::MAX {
                continue;
            }
            side[s] = 0;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &w in &self.adj[v] {
                    if side[w] == u8::MAX {
                        side[w] = 1 - side[v];
                        stack.push(w);
                    } else if side[w] == side[v] {
                        return None;
                    }
                }
            }
        }
        let a = (0..self.n()).filter(|&v| side[v] == 0).collect();
        let b = (0..self.n()).filter(|&v| side[v] == 1).collect();
        Some(Bipartition { a: VertexSet::from_sorted(a), b: VertexSet::from_sorted(b) })
    }
}

/// Parses the `p <n> <m>` edge-list format. Blank lines and lines starting
/// with `c` or `#` are skipped.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let err = |line: usize, message: String| Error::Parse { line, message };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with("c ") || trimmed == "c" {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match header {
            None => {
                if fields.len() != 3 || fields[0] != "p" {
                    return Err(err(line, format!("expected header `p <n> <m>`, found {trimmed:?}")));
                }
                let n = fields[1].parse().map_err(|_| err(line, format!("bad vertex count {:?}", fields[1])))?;
                let m = fields[2].parse().map_err(|_| err(line, format!("bad edge count {:?}", fields[2])))?;
                header = Some((n, m));
            }
            Some((n, _)) => {
                if fields.len() != 2 {
                    return Err(err(line, format!("expected `u v`, found {trimmed:?}")));
                }
                let u: usize = fields[0].parse().map_err(|_| err(line, format!("bad vertex id {:?}", fields[0])))?;
                let v: usize = fields[1].parse().map_err(|_| err(line, format!("bad vertex id {:?}", fields[1])))?;
                if u >= n || v >= n {
                    return Err(err(line, format!("vertex id out of range (n = {n})")));
                }
                if u == v {
                    return Err(err(line, format!("self-loop at {u}")));
                }
                if !seen.insert((u.min(v), u.max(v))) {
                    return Err(err(line, format!("duplicate edge {u} {v}")));
                }
                edges.push((u, v));
            }
        }
    }
    let (n, m) = header.ok_or_else(|| err(0, "missing header".into()))?;
    if edges.len() != m {
        return Err(err(text.lines().count(), format!("header declares {m} edges, found {}", edges.len())));
    }
    Graph::from_edges(n, &edges)
}

/// Sorted set of distinct vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(mut members: Vec<usize>) -> VertexSet {
        members.sort_unstable();
        members.dedup();
        VertexSet(members)
    }

    pub fn from_sorted(members: Vec<usize>) -> VertexSet {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        VertexSet(members)
    }

    pub fn full(n: usize) -> VertexSet {
        VertexSet((0..n).collect())
    }

    pub fn from_mask(mask: &[bool]) -> VertexSet {
        VertexSet(mask.iter().enumerate().filter(|(_, &b)| b).map(|(v, _)| v).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.0 {
            m[v] = true;
        }
        m
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| !other.contains(v))
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet::new(self.0.iter().chain(other.0.iter()).copied().collect())
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&v| !other.contains(v)).collect())
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&v| other.contains(v)).collect())
    }

    pub fn valid_for(&self, n: usize) -> bool {
        self.0.last().is_none_or(|&v| v < n)
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet::new(iter.into_iter().collect())
    }
}

/// Ordered pair of disjoint sides; `a` is the side robust expansion is asked of.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub a: VertexSet,
    pub b: VertexSet,
}

impl Bipartition {
    pub fn new(a: VertexSet, b: VertexSet) -> Result<Bipartition> {
        if !a.is_disjoint(&b) {
            return contract("bipartition sides overlap");
        }
        Ok(Bipartition { a, b })
    }

    pub fn swapped(&self) -> Bipartition {
        Bipartition { a: self.b.clone(), b: self.a.clone() }
    }

    pub fn vertices(&self) -> VertexSet {
        self.a.union(&self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutStats {
    pub internal_edges: usize,
    pub boundary_edges: usize,
    pub volume: usize,
}

/// `e(s)`, `e(s, universe \ s)` and `vol(s)` with full-graph degrees.
pub fn cut_stats(g: &Graph, s: &VertexSet, universe: &VertexSet) -> Result<CutStats> {
    if !s.is_subset(universe) {
        return contract("cut set is not contained in its universe");
    }
    let in_s = s.mask(g.n());
    let in_u = universe.mask(g.n());
    let mut twice_internal = 0;
    let mut boundary = 0;
    let mut volume = 0;
    for v in s.iter() {
        volume += g.degree(v);
        for &w in g.neighbors(v) {
            if in_s[w] {
                twice_internal += 1;
            } else if in_u[w] {
                boundary += 1;
            }
        }
    }
    Ok(CutStats { internal_edges: twice_internal / 2, boundary_edges: boundary, volume })
}

/// Number of edges with both ends in `mask`.
pub fn edges_inside(g: &Graph, mask: &[bool]) -> usize {
    (0..g.n()).filter(|&v| mask[v]).map(|v| g.degree_into(v, mask)).sum::<usize>() / 2
}

/// Number of edges with one end in `s` and the other in `t` (disjoint masks).
pub fn edges_between(g: &Graph, s: &[bool], t: &[bool]) -> usize {
    (0..g.n()).filter(|&v| s[v]).map(|v| g.degree_into(v, t)).sum()
}

/// Vertices with at least `nu * n_ref` neighbours in `s`.
pub fn robust_neighborhood(g: &Graph, s: &VertexSet, nu: Param, n_ref: usize) -> VertexSet {
    let mask = s.mask(g.n());
    VertexSet((0..g.n()).filter(|&v| !nu.count_lt_times(g.degree_into(v, &mask) as u128, n_ref as u128)).collect())
}

/// Induced subgraph with the maps between local and global ids.
#[derive(Clone, Debug)]
pub struct InducedSubgraph {
    pub graph: Graph,
    pub to_global: Vec<usize>,
    pub to_local: Vec<Option<usize>>,
}

impl InducedSubgraph {
    pub fn lift(&self, local: &VertexSet) -> VertexSet {
        VertexSet(local.iter().map(|v| self.to_global[v]).collect())
    }
}

pub fn induced_subgraph(g: &Graph, u: &VertexSet) -> InducedSubgraph {
    let mut to_local = vec![None; g.n()];
    for (i, v) in u.iter().enumerate() {
        to_local[v] = Some(i);
    }
    let adj = u
        .iter()
        .map(|v| g.neighbors(v).iter().filter_map(|&w| to_local[w]).collect())
        .collect();
    InducedSubgraph { graph: Graph::from_sorted_adjacency(adj), to_global: u.as_slice().to_vec(), to_local }
}

/// Bipartite graph on `a ∪ b` keeping only the `a`–`b` edges.
pub fn bipartite_induced(g: &Graph, bp: &Bipartition) -> Result<InducedSubgraph> {
    if !bp.a.is_disjoint(&bp.b) {
        return contract("bipartition sides overlap");
    }
    let all = bp.vertices();
    let in_a = bp.a.mask(g.n());
    let mut sub = induced_subgraph(g, &all);
    let adj = all
        .iter()
        .map(|v| {
            g.neighbors(v)
                .iter()
                .filter(|&&w| sub.to_local[w].is_some() && in_a[w] != in_a[v])
                .map(|&w| sub.to_local[w].unwrap())
                .collect()
        })
        .collect();
    sub.graph = Graph::from_sorted_adjacency(adj);
    Ok(sub)
}
