//! Path systems over a vertex partition: reduced multigraphs, the connecting
//! and balancing predicates, and the searches that build such systems.

use std::collections::{BTreeMap, VecDeque};

use petgraph::algo::{ford_fulkerson, maximum_matching};
use petgraph::graph::{DiGraph, NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::partition::RobustPartition;

/// Vertex-disjoint paths, each a vertex sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct PathSystem {
    paths: Vec<Vec<usize>>,
}

impl TryFrom<Vec<Vec<usize>>> for PathSystem {
    type Error = Error;

    fn try_from(paths: Vec<Vec<usize>>) -> Result<PathSystem> {
        PathSystem::new(paths)
    }
}

impl From<PathSystem> for Vec<Vec<usize>> {
    fn from(p: PathSystem) -> Self {
        p.paths
    }
}

impl PathSystem {
    /// Checks that paths are non-empty, simple and pairwise disjoint.
    pub fn new(paths: Vec<Vec<usize>>) -> Result<PathSystem> {
        let mut seen = std::collections::HashSet::new();
        for p in &paths {
            if p.is_empty() {
                return contract("empty path in path system");
            }
            for &v in p {
                if !seen.insert(v) {
                    return contract(format!("vertex {v} appears twice in the path system"));
                }
            }
        }
        Ok(PathSystem { paths })
    }

    pub fn empty() -> PathSystem {
        PathSystem::default()
    }

    /// Assembles the paths of a linear forest given by its edges. Paths start
    /// at their smaller endpoint and are ordered by it.
    pub fn from_edges(edges: &[(usize, usize)]) -> Result<PathSystem> {
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(u, v) in edges {
            if u == v {
                return contract(format!("loop at {u} in path edges"));
            }
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
        }
        for (v, list) in &mut adj {
            list.sort_unstable();
            if list.len() > 2 || list.windows(2).any(|w| w[0] == w[1]) {
                return contract(format!("vertex {v} has degree above two or a repeated edge"));
            }
        }
        let mut visited = std::collections::HashSet::new();
        let mut paths = Vec::new();
        for (&start, list) in &adj {
            if list.len() != 1 || visited.contains(&start) {
                continue;
            }
            let mut path = vec![start];
            visited.insert(start);
            let mut prev = start;
            let mut cur = list[0];
            loop {
                path.push(cur);
                visited.insert(cur);
                let next = adj[&cur].iter().copied().find(|&w| w != prev);
                match next {
                    Some(w) => {
                        prev = cur;
                        cur = w;
                    }
                    None => break,
                }
            }
            paths.push(path);
        }
        if visited.len() != adj.len() {
            return contract("path edges contain a cycle");
        }
        Ok(PathSystem { paths })
    }

    pub fn paths(&self) -> &[Vec<usize>] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Checks every vertex id and every consecutive pair against `g`.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        for p in &self.paths {
            if let Some(&v) = p.iter().find(|&&v| v >= g.n()) {
                return contract(format!("path vertex {v} out of range"));
            }
            if let Some(w) = p.windows(2).find(|w| !g.has_edge(w[0], w[1])) {
                return contract(format!("path uses non-edge {} {}", w[0], w[1]));
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> VertexSet {
        self.paths.iter().flatten().copied().collect()
    }

    /// Edges as `(min, max)` pairs, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> =
            self.paths.iter().flat_map(|p| p.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1])))).collect();
        out.sort_unstable();
        out
    }

    pub fn edge_count(&self) -> usize {
        self.paths.iter().map(|p| p.len() - 1).sum()
    }

    /// Vertices of degree one.
    pub fn leaves(&self) -> Vec<usize> {
        self.paths.iter().filter(|p| p.len() > 1).flat_map(|p| [p[0], p[p.len() - 1]]).collect()
    }

    pub fn union(&self, other: &PathSystem) -> Result<PathSystem> {
        PathSystem::new(self.paths.iter().chain(&other.paths).cloned().collect())
    }
}

/// Part index of every vertex covered by `parts`; `usize::MAX` elsewhere.
pub(crate) fn part_owner(parts: &[VertexSet], size: usize) -> Result<Vec<usize>> {
    let n = parts.iter().filter_map(|p| p.as_slice().last()).map(|&v| v + 1).max().unwrap_or(0).max(size);
    let mut owner = vec![usize::MAX; n];
    for (i, p) in parts.iter().enumerate() {
        for v in p.iter() {
            if owner[v] != usize::MAX {
                return contract(format!("vertex {v} lies in two parts"));
            }
            owner[v] = i;
        }
    }
    Ok(owner)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// One edge per path, joining the parts of its endpoints.
    Endpoints,
    /// One edge per graph edge of the system.
    Edges,
}

/// Multigraph on part indices; loops allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedMultigraph {
    pub part_count: usize,
    /// `(min, max)` pairs, sorted, repeated per multiplicity.
    pub edges: Vec<(usize, usize)>,
}

impl ReducedMultigraph {
    pub fn from_pairs(part_count: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> ReducedMultigraph {
        let mut edges: Vec<(usize, usize)> = pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        edges.sort_unstable();
        ReducedMultigraph { part_count, edges }
    }

    /// Degree with loops counted twice.
    pub fn degree(&self, part: usize) -> usize {
        self.edges.iter().map(|&(a, b)| usize::from(a == part) + usize::from(b == part)).sum()
    }

    pub fn multiplicity(&self, a: usize, b: usize) -> usize {
        let key = (a.min(b), a.max(b));
        self.edges.iter().filter(|&&e| e == key).count()
    }

    /// Connected on all part indices, untouched parts included.
    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.part_count);
        for &(a, b) in &self.edges {
            uf.union(a, b);
        }
        (1..self.part_count).all(|i| uf.find(i) == uf.find(0))
    }

    pub fn is_eulerian(&self) -> bool {
        let mut deg = vec![0usize; self.part_count];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg.iter().all(|d| d % 2 == 0) && self.is_connected()
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

pub fn reduced_multigraph(p: &PathSystem, parts: &[VertexSet], mode: Mode) -> Result<ReducedMultigraph> {
    let owner = part_owner(parts, 0)?;
    let part = |v: usize| -> Result<usize> {
        match owner.get(v) {
            Some(&o) if o != usize::MAX => Ok(o),
            _ => contract(format!("path vertex {v} lies outside every part")),
        }
    };
    let mut pairs = Vec::new();
    for path in p.paths() {
        match mode {
            Mode::Endpoints => pairs.push((part(path[0])?, part(path[path.len() - 1])?)),
            Mode::Edges => {
                for w in path.windows(2) {
                    pairs.push((part(w[0])?, part(w[1])?));
                }
            }
        }
        if mode == Mode::Edges {
            part(path[0])?;
        }
    }
    Ok(ReducedMultigraph::from_pairs(parts.len(), pairs))
}

/// Whether the endpoint multigraph is connected on every part and has even
/// degrees. With a single part the empty system qualifies.
pub fn is_connecting(p: &PathSystem, parts: &[VertexSet]) -> bool {
    if parts.is_empty() {
        return p.is_empty();
    }
    reduced_multigraph(p, parts, Mode::Endpoints).is_ok_and(|r| r.is_eulerian())
}

/// Per bipartite part, half the absolute signed imbalance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceReport {
    pub per_part: Vec<f64>,
    pub total: f64,
}

/// Signed imbalance per bipartite part, `A` side minus `B` side, where a side
/// `S` scores `2|S| - e_p(S, outside) - 2 e_p(S)`. A cycle through every
/// vertex of the part scores zero once its `A`-`B` edges are removed.
pub fn imbalance_deltas(p: &PathSystem, rp: &RobustPartition) -> Vec<i64> {
    let l = rp.bipartite_parts.len();
    let mut side: BTreeMap<usize, (usize, i64)> = BTreeMap::new();
    let mut delta = vec![0i64; l];
    for (j, bp) in rp.bipartite_parts.iter().enumerate() {
        bp.a.iter().for_each(|v| {
            side.insert(v, (j, 1));
        });
        bp.b.iter().for_each(|v| {
            side.insert(v, (j, -1));
        });
        delta[j] = 2 * (bp.a.len() as i64 - bp.b.len() as i64);
    }
    for (u, v) in p.edges() {
        let su = side.get(&u).copied();
        let sv = side.get(&v).copied();
        match (su, sv) {
            (Some((ju, s)), Some((jv, t))) if ju == jv => {
                if s == t {
                    delta[ju] -= 2 * s;
                }
            }
            _ => {
                if let Some((j, s)) = su {
                    delta[j] -= s;
                }
                if let Some((j, t)) = sv {
                    delta[j] -= t;
                }
            }
        }
    }
    delta
}

pub fn imbalance(p: &PathSystem, rp: &RobustPartition) -> ImbalanceReport {
    let per_part: Vec<f64> = imbalance_deltas(p, rp).iter().map(|d| d.unsigned_abs() as f64 / 2.0).collect();
    let total = per_part.iter().sum();
    ImbalanceReport { per_part, total }
}

/// Drops paths with no edges.
fn drop_trivial(paths: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    paths.into_iter().filter(|p| p.len() > 1).collect()
}

/// Cuts every path at the first and last visit of a repeated part until no
/// path meets a part twice.
fn split_revisits(p: &PathSystem, owner: &[usize]) -> Vec<Vec<usize>> {
    let mut work: Vec<Vec<usize>> = p.paths().to_vec();
    let mut done = Vec::new();
    while let Some(path) = work.pop() {
        let mut cut = None;
        for (a, &v) in path.iter().enumerate() {
            if let Some(b) = path.iter().rposition(|&w| owner[w] == owner[v]) {
                if b > a {
                    cut = Some((a, b));
                    break;
                }
            }
        }
        match cut {
            Some((a, b)) => {
                work.push(path[..=a].to_vec());
                work.push(path[b..].to_vec());
            }
            None => done.push(path),
        }
    }
    let mut out = drop_trivial(done);
    out.sort();
    out
}

/// Removes `edges` from the system, splitting paths as needed.
fn delete_edges(paths: &[Vec<usize>], edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let hit = |a: usize, b: usize| edges.contains(&(a.min(b), a.max(b)));
    let mut out = Vec::new();
    for p in paths {
        let mut cur = vec![p[0]];
        for w in p.windows(2) {
            if hit(w[0], w[1]) {
                out.push(std::mem::replace(&mut cur, vec![w[1]]));
            } else {
                cur.push(w[1]);
            }
        }
        out.push(cur);
    }
    drop_trivial(out)
}

/// Two edge-disjoint walks from `x` to `y` in the endpoint multigraph, as sets
/// of path indices. `None` when the flow is below two.
fn two_disjoint_routes(paths: &[Vec<usize>], owner: &[usize], m: usize, x: usize, y: usize) -> Option<[Vec<usize>; 2]> {
    let mut net: DiGraph<(), u32> = DiGraph::new();
    let nodes: Vec<NodeIndex> = (0..m).map(|_| net.add_node(())).collect();
    let mut arc_path = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        let (a, b) = (owner[p[0]], owner[p[p.len() - 1]]);
        if a != b {
            net.add_edge(nodes[a], nodes[b], 1);
            net.add_edge(nodes[b], nodes[a], 1);
            arc_path.push((i, a, b));
        }
    }
    let (value, flows) = ford_fulkerson(&net, nodes[x], nodes[y]);
    if value < 2 {
        return None;
    }
    // net flow on each multigraph edge, oriented
    let mut arcs: Vec<(usize, usize, usize)> = Vec::new();
    for (k, &(i, a, b)) in arc_path.iter().enumerate() {
        let fwd = flows[2 * k] as i64 - flows[2 * k + 1] as i64;
        match fwd.cmp(&0) {
            std::cmp::Ordering::Greater => arcs.push((i, a, b)),
            std::cmp::Ordering::Less => arcs.push((i, b, a)),
            std::cmp::Ordering::Equal => {}
        }
    }
    let mut used = vec![false; arcs.len()];
    let mut routes: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for route in &mut routes {
        let mut at = x;
        while at != y {
            let k = (0..arcs.len()).find(|&k| !used[k] && arcs[k].1 == at)?;
            used[k] = true;
            route.push(arcs[k].0);
            at = arcs[k].2;
        }
    }
    Some(routes)
}

/// A cross edge and the index of the path carrying it.
type CrossEdge = ((usize, usize), usize);

/// Rewrites a connecting system so that no edge lies inside a part and each
/// pair of parts carries at most two edges.
pub fn prune_connecting(p: &PathSystem, parts: &[VertexSet], g: &Graph) -> Result<PathSystem> {
    p.validate(g)?;
    if !is_connecting(p, parts) {
        return contract("pruning needs a connecting path system");
    }
    let m = parts.len();
    let owner = part_owner(parts, g.n())?;
    let mut paths = split_revisits(p, &owner);
    loop {
        let mut cross: BTreeMap<(usize, usize), Vec<CrossEdge>> = BTreeMap::new();
        for (i, path) in paths.iter().enumerate() {
            for w in path.windows(2) {
                let (a, b) = (owner[w[0]], owner[w[1]]);
                let edge = (w[0].min(w[1]), w[0].max(w[1]));
                cross.entry((a.min(b), a.max(b))).or_default().push((edge, i));
            }
        }
        let Some((&(x, y), list)) = cross.iter().find(|(_, l)| l.len() > 2) else {
            break;
        };
        let mut list = list.clone();
        list.sort_unstable();
        let mut pick = None;
        if let Some([q1, q2]) = two_disjoint_routes(&paths, &owner, m, x, y) {
            'outer: for i in 0..list.len() {
                for j in i + 1..list.len() {
                    let (pi, pj) = (list[i].1, list[j].1);
                    let misses = |q: &Vec<usize>| !q.contains(&pi) && !q.contains(&pj);
                    if misses(&q1) || misses(&q2) {
                        let cand = delete_edges(&paths, &[list[i].0, list[j].0]);
                        if is_connecting(&PathSystem { paths: cand.clone() }, parts) {
                            pick = Some(cand);
                            break 'outer;
                        }
                    }
                }
            }
        }
        if pick.is_none() {
            'scan: for i in 0..list.len() {
                for j in i + 1..list.len() {
                    let cand = delete_edges(&paths, &[list[i].0, list[j].0]);
                    if is_connecting(&PathSystem { paths: cand.clone() }, parts) {
                        pick = Some(cand);
                        break 'scan;
                    }
                }
            }
        }
        match pick {
            Some(mut next) => {
                next.sort();
                paths = split_revisits(&PathSystem { paths: next }, &owner);
            }
            None => return Err(Error::Diagnostic(format!("no removable edge pair between parts {x} and {y}"))),
        }
    }
    Ok(PathSystem { paths })
}

/// Leaf evaluations allowed in one connecting-system search.
pub const CONNECTING_SEARCH_BUDGET: usize = 4_000_000;

/// Cross edges worth trying between two parts: a large matching when one
/// exists, otherwise a few edges at each vertex of a maximum matching.
fn preselect(g: &Graph, vi: &VertexSet, vj: &VertexSet, m: usize) -> Vec<(usize, usize)> {
    let mj = vj.mask(g.n());
    let mut bip: UnGraph<usize, ()> = UnGraph::default();
    let mut local = BTreeMap::new();
    let mut node = |bip: &mut UnGraph<usize, ()>, v: usize| *local.entry(v).or_insert_with(|| bip.add_node(v));
    let mut cross = Vec::new();
    for u in vi.iter() {
        for &w in g.neighbors(u) {
            if mj[w] {
                let (a, b) = (node(&mut bip, u), node(&mut bip, w));
                bip.add_edge(a, b, ());
                cross.push((u.min(w), u.max(w)));
            }
        }
    }
    if cross.is_empty() {
        return cross;
    }
    let matching = maximum_matching(&bip);
    let mut matched: Vec<(usize, usize)> = matching
        .edges()
        .map(|(a, b)| {
            let (u, w) = (bip[a], bip[b]);
            (u.min(w), u.max(w))
        })
        .collect();
    matched.sort_unstable();
    if matched.len() >= 4 * m {
        matched.truncate(4 * m);
        return matched;
    }
    let mut ends: Vec<usize> = matched.iter().flat_map(|&(u, w)| [u, w]).collect();
    ends.sort_unstable();
    let mut out = Vec::new();
    let mi = vi.mask(g.n());
    for v in ends {
        let other = if mi[v] { &mj } else { &mi };
        out.extend(g.neighbors(v).iter().filter(|&&w| other[w]).take(2 * m).map(|&w| (v.min(w), v.max(w))));
    }
    out.sort_unstable();
    out.dedup();
    out
}

struct ConnectSearch<'a> {
    parts: &'a [VertexSet],
    cands: Vec<Vec<(usize, usize)>>,
    mult: Vec<usize>,
    chosen: Vec<(usize, usize)>,
    deg: Vec<u8>,
    nbr: Vec<[usize; 2]>,
    leaves: usize,
}

impl ConnectSearch<'_> {
    /// Whether adding `(u, v)` closes a cycle in the current linear forest.
    fn closes_cycle(&self, u: usize, v: usize) -> bool {
        let (mut prev, mut cur) = (usize::MAX, u);
        loop {
            let next = self.nbr[cur].iter().copied().find(|&w| w != usize::MAX && w != prev);
            match next {
                Some(w) if w == v => return true,
                Some(w) => {
                    prev = cur;
                    cur = w;
                }
                None => return cur == v,
            }
        }
    }

    fn link(&mut self, u: usize, v: usize, on: bool) {
        for (a, b) in [(u, v), (v, u)] {
            if on {
                let slot = self.nbr[a].iter().position(|&w| w == usize::MAX).unwrap();
                self.nbr[a][slot] = b;
                self.deg[a] += 1;
            } else {
                let slot = self.nbr[a].iter().position(|&w| w == b).unwrap();
                self.nbr[a][slot] = usize::MAX;
                self.deg[a] -= 1;
            }
        }
    }

    fn run(&mut self, pair: usize, from: usize, left: usize) -> Result<Option<PathSystem>> {
        if left == 0 {
            if pair + 1 == self.mult.len() {
                self.leaves += 1;
                if self.leaves > CONNECTING_SEARCH_BUDGET {
                    return Err(Error::Diagnostic("connecting-system search budget exhausted".into()));
                }
                let p = PathSystem::from_edges(&self.chosen)?;
                return Ok(is_connecting(&p, self.parts).then_some(p));
            }
            return self.run(pair + 1, 0, self.mult[pair + 1]);
        }
        for k in from..self.cands[pair].len() {
            let (u, v) = self.cands[pair][k];
            if self.deg[u] == 2 || self.deg[v] == 2 || self.closes_cycle(u, v) {
                continue;
            }
            self.link(u, v, true);
            self.chosen.push((u, v));
            let found = self.run(pair, k + 1, left - 1)?;
            self.chosen.pop();
            self.link(u, v, false);
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}

/// Multiplicity vectors in `{0,1,2}^caps.len()` with the given total, in
/// lexicographic order.
fn vectors_with_total(caps: &[usize], total: usize, prefix: &mut Vec<usize>, out: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    let i = prefix.len();
    if i == caps.len() {
        return total == 0 && out(prefix);
    }
    let room: usize = caps[i + 1..].iter().sum();
    for c in 0..=caps[i].min(total) {
        if total - c > room {
            continue;
        }
        prefix.push(c);
        let stop = vectors_with_total(caps, total - c, prefix, out);
        prefix.pop();
        if stop {
            return true;
        }
    }
    false
}

/// Searches for a connecting path system using at most two preselected cross
/// edges per pair of parts, fewest edges first.
pub fn find_connecting_system(g: &Graph, parts: &[VertexSet]) -> Result<Option<PathSystem>> {
    let m = parts.len();
    if m == 0 {
        return contract("connecting systems need at least one part");
    }
    let owner = part_owner(parts, g.n())?;
    if owner.len() != g.n() || owner.contains(&usize::MAX) {
        return contract("parts must partition the vertex set");
    }
    if m == 1 {
        return Ok(Some(PathSystem::empty()));
    }
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let cands: Vec<Vec<(usize, usize)>> = pairs.iter().map(|&(i, j)| preselect(g, &parts[i], &parts[j], m)).collect();
    let caps: Vec<usize> = cands.iter().map(|c| c.len().min(2)).collect();
    let mut search = ConnectSearch {
        parts,
        cands,
        mult: Vec::new(),
        chosen: Vec::new(),
        deg: vec![0; g.n()],
        nbr: vec![[usize::MAX; 2]; g.n()],
        leaves: 0,
    };
    let max_total: usize = caps.iter().sum();
    for total in m - 1..=max_total {
        let mut result: Result<Option<PathSystem>> = Ok(None);
        vectors_with_total(&caps, total, &mut Vec::new(), &mut |mult| {
            let r = ReducedMultigraph::from_pairs(
                m,
                pairs.iter().zip(mult).flat_map(|(&pr, &c)| std::iter::repeat_n(pr, c)),
            );
            if !r.is_eulerian() {
                return false;
            }
            search.mult = mult.to_vec();
            result = search.run(0, 0, mult[0]);
            !matches!(result, Ok(None))
        });
        if !matches!(result, Ok(None)) {
            return result;
        }
    }
    Ok(None)
}

/// Whether `h` zeroes every bipartite imbalance and has an even number of
/// leaves in every part.
pub fn is_balancing(h: &PathSystem, rp: &RobustPartition) -> bool {
    if imbalance_deltas(h, rp).iter().any(|&d| d != 0) {
        return false;
    }
    let parts = rp.parts();
    let Ok(owner) = part_owner(&parts, 0) else {
        return false;
    };
    let mut leaves = vec![0usize; parts.len()];
    for v in h.leaves() {
        match owner.get(v) {
            Some(&o) if o != usize::MAX => leaves[o] += 1,
            _ => return false,
        }
    }
    leaves.iter().all(|c| c % 2 == 0)
}

fn balancing_ok(g: &Graph, h: &PathSystem, rp: &RobustPartition, xi: f64) -> bool {
    h.validate(g).is_ok() && is_balancing(h, rp) && h.vertices().len() as f64 <= xi * g.n() as f64
}

/// Candidate edges allowed in the exhaustive balancing fallback.
const BALANCING_CANDIDATES: usize = 60;
const BALANCING_NODES: usize = 2_000_000;

/// Finds a small path system that evens out every bipartite part: grows paths
/// inside each larger side, then falls back to a bounded exhaustive search.
pub fn find_balancing_system(g: &Graph, rp: &RobustPartition, xi: f64) -> Option<PathSystem> {
    let n = g.n();
    let mut edges = Vec::new();
    let mut unbalanced = Vec::new();
    for (j, bp) in rp.bipartite_parts.iter().enumerate() {
        let (x, y) = if bp.a.len() >= bp.b.len() { (&bp.a, &bp.b) } else { (&bp.b, &bp.a) };
        let need = x.len() - y.len();
        if need == 0 {
            continue;
        }
        unbalanced.push(j);
        let inside = x.mask(n);
        let mut used = vec![false; n];
        let mut got = 0;
        'grow: for start in x.iter() {
            if used[start] {
                continue;
            }
            let mut at = start;
            loop {
                if got == need {
                    break 'grow;
                }
                let Some(&w) = g.neighbors(at).iter().find(|&&w| inside[w] && !used[w] && w != start) else {
                    break;
                };
                used[at] = true;
                used[w] = true;
                edges.push((at.min(w), at.max(w)));
                got += 1;
                at = w;
            }
        }
    }
    if let Ok(h) = PathSystem::from_edges(&edges) {
        if balancing_ok(g, &h, rp, xi) {
            return Some(h);
        }
    }

    let parts = rp.parts();
    let owner = part_owner(&parts, n).ok()?;
    let touched: Vec<usize> = unbalanced.iter().map(|&j| rp.expander_parts.len() + j).collect();
    let cands: Vec<(usize, usize)> = g
        .edges()
        .filter(|&(u, v)| touched.contains(&owner[u]) || touched.contains(&owner[v]))
        .take(BALANCING_CANDIDATES)
        .collect();
    let budget = 2 * unbalanced.len() + 2;
    let mut chosen = Vec::new();
    let mut deg = vec![0u8; n];
    let mut nodes = 0;
    for size in 1..=budget {
        if let Some(h) = balancing_subsets(g, rp, xi, &cands, 0, size, &mut chosen, &mut deg, &mut nodes) {
            return Some(h);
        }
        if nodes > BALANCING_NODES {
            break;
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn balancing_subsets(
    g: &Graph,
    rp: &RobustPartition,
    xi: f64,
    cands: &[(usize, usize)],
    from: usize,
    size: usize,
    chosen: &mut Vec<(usize, usize)>,
    deg: &mut [u8],
    nodes: &mut usize,
) -> Option<PathSystem> {
    *nodes += 1;
    if *nodes > BALANCING_NODES {
        return None;
    }
    if chosen.len() == size {
        let h = PathSystem::from_edges(chosen).ok()?;
        return balancing_ok(g, &h, rp, xi).then_some(h);
    }
    for k in from..cands.len() {
        let (u, v) = cands[k];
        if deg[u] == 2 || deg[v] == 2 {
            continue;
        }
        deg[u] += 1;
        deg[v] += 1;
        chosen.push((u, v));
        let found = balancing_subsets(g, rp, xi, cands, k + 1, size, chosen, deg, nodes);
        chosen.pop();
        deg[u] -= 1;
        deg[v] -= 1;
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Merges a balancing system `b` with a connecting system `c`: drops the edges
/// of `b` that touch `c`, then deletes a forest of `b`-edges that repairs the
/// parity of every part.
pub fn combine(b: &PathSystem, c: &PathSystem, rp: &RobustPartition) -> Result<PathSystem> {
    let parts = rp.parts();
    if !is_connecting(c, &parts) {
        return contract("combine needs a connecting system");
    }
    let m = parts.len();
    let owner = part_owner(&parts, 0)?;
    let used = c.vertices();
    let mut kept: Vec<(usize, usize)> =
        b.edges().into_iter().filter(|&(u, v)| !used.contains(u) && !used.contains(v)).collect();
    for &(u, v) in &kept {
        if owner.get(u).is_none_or(|&o| o == usize::MAX) || owner.get(v).is_none_or(|&o| o == usize::MAX) {
            return contract(format!("edge {u} {v} leaves the partition"));
        }
    }
    let ends: Vec<(usize, usize)> = kept.iter().map(|&(u, v)| (owner[u], owner[v])).collect();

    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m];
    let mut deg = vec![0usize; m];
    let mut uf = UnionFind::new(m);
    for (id, &(a, b)) in ends.iter().enumerate() {
        deg[a] += 1;
        deg[b] += 1;
        if a != b {
            adj[a].push((b, id));
            adj[b].push((a, id));
            uf.union(a, b);
        }
    }
    let mut odd_by_comp: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for part in (0..m).filter(|&i| deg[i] % 2 == 1) {
        odd_by_comp.entry(uf.find(part)).or_default().push(part);
    }
    let mut in_q = vec![false; ends.len()];
    for odd in odd_by_comp.values() {
        for pair in odd.chunks(2) {
            for id in route(&adj, pair[0], pair[1]) {
                in_q[id] = !in_q[id];
            }
        }
    }
    strip_cycles(&ends, &mut in_q, m);
    let mut id = 0;
    kept.retain(|_| {
        id += 1;
        !in_q[id - 1]
    });
    let merged = PathSystem::from_edges(&kept)?.union(c)?;
    if !is_connecting(&merged, &parts) {
        return Err(Error::Assembly("combined system is not connecting".into()));
    }
    Ok(merged)
}

/// Edge ids of a shortest route from `s` to `t`.
fn route(adj: &[Vec<(usize, usize)>], s: usize, t: usize) -> Vec<usize> {
    let mut via: Vec<Option<(usize, usize)>> = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    seen[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        if x == t {
            break;
        }
        for &(y, id) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                via[y] = Some((x, id));
                queue.push_back(y);
            }
        }
    }
    let mut out = Vec::new();
    let mut at = t;
    while let Some((prev, id)) = via[at] {
        out.push(id);
        at = prev;
    }
    out
}

/// Removes whole cycles from the selected edges until they form a forest.
fn strip_cycles(ends: &[(usize, usize)], in_q: &mut [bool], m: usize) {
    'restart: loop {
        let mut uf = UnionFind::new(m);
        let mut forest: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m];
        for id in 0..ends.len() {
            if !in_q[id] {
                continue;
            }
            let (a, b) = ends[id];
            if uf.union(a, b) {
                forest[a].push((b, id));
                forest[b].push((a, id));
            } else {
                in_q[id] = false;
                for k in route(&forest, a, b) {
                    in_q[k] = false;
                }
                continue 'restart;
            }
        }
        return;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{complete, disjoint_union};
    use crate::partition::{BipartitePart, PartitionParams};
    use crate::param::Param;

    fn sets(parts: &[&[usize]]) -> Vec<VertexSet> {
        parts.iter().map(|p| VertexSet::new(p.to_vec())).collect()
    }

    fn bip_partition(a: &[usize], b: &[usize]) -> RobustPartition {
        let part: VertexSet = a.iter().chain(b).copied().collect();
        RobustPartition {
            expander_parts: Vec::new(),
            bipartite_parts: vec![BipartitePart { part, a: VertexSet::new(a.to_vec()), b: VertexSet::new(b.to_vec()) }],
            params: PartitionParams {
                rho: Param::new(0.01).unwrap(),
                nu: Param::new(0.01).unwrap(),
                tau: Param::new(0.1).unwrap(),
                k: 0,
                l: 1,
            },
        }
    }

    #[test]
    fn reduced_multigraph_examples() {
        let parts = sets(&[&[0, 1], &[2, 3]]);
        let p = PathSystem::new(vec![vec![0, 2]]).unwrap();
        assert_eq!(reduced_multigraph(&p, &parts, Mode::Endpoints).unwrap().edges, vec![(0, 1)]);
        let p = PathSystem::new(vec![vec![0, 2, 1]]).unwrap();
        assert_eq!(reduced_multigraph(&p, &parts, Mode::Endpoints).unwrap().edges, vec![(0, 0)]);
        let p = PathSystem::new(vec![vec![0, 2], vec![1, 3]]).unwrap();
        let r = reduced_multigraph(&p, &parts, Mode::Endpoints).unwrap();
        assert_eq!(r.multiplicity(0, 1), 2);
        assert!(reduced_multigraph(&p, &sets(&[&[0]]), Mode::Edges).is_err());
    }

    #[test]
    fn connecting_examples() {
        let parts = sets(&[&[0, 1], &[2, 3]]);
        assert!(is_connecting(&PathSystem::new(vec![vec![0, 2], vec![1, 3]]).unwrap(), &parts));
        assert!(!is_connecting(&PathSystem::new(vec![vec![0, 2]]).unwrap(), &parts));
        let three = sets(&[&[0, 1], &[2, 3], &[4]]);
        assert!(!is_connecting(&PathSystem::new(vec![vec![0, 2], vec![1, 3]]).unwrap(), &three));
        assert!(is_connecting(&PathSystem::empty(), &sets(&[&[0, 1, 2]])));
    }

    #[test]
    fn from_edges_rejects_cycles_and_orders_paths() {
        assert!(PathSystem::from_edges(&[(0, 1), (1, 2), (0, 2)]).is_err());
        let p = PathSystem::from_edges(&[(5, 4), (2, 1), (1, 0)]).unwrap();
        assert_eq!(p.paths(), &[vec![0, 1, 2], vec![4, 5]]);
    }

    #[test]
    fn imbalance_examples() {
        let rp = bip_partition(&[0, 1, 2, 3, 4], &[5, 6, 7]);
        let r = imbalance(&PathSystem::empty(), &rp);
        assert_eq!(r.total, 2.0);
        let rp = bip_partition(&[0, 1], &[2, 3]);
        assert_eq!(imbalance(&PathSystem::empty(), &rp).total, 0.0);
    }

    #[test]
    fn split_at_first_and_last_visit() {
        // parts 0: {0,1}, 1: {2,3}, 2: {4}
        let parts = sets(&[&[0, 1], &[2, 3], &[4]]);
        let owner = part_owner(&parts, 5).unwrap();
        let p = PathSystem::new(vec![vec![0, 2, 1, 3, 4]]).unwrap();
        let out = split_revisits(&p, &owner);
        assert!(out.iter().all(|path| {
            let mut seen: Vec<usize> = path.iter().map(|&v| owner[v]).collect();
            seen.sort_unstable();
            seen.windows(2).all(|w| w[0] != w[1])
        }));
    }

    #[test]
    fn connecting_search_on_two_blocks() {
        let mut edges = disjoint_union(&[complete(8), complete(8)]).edges().collect::<Vec<_>>();
        edges.extend([(0, 8), (1, 9)]);
        let g = Graph::from_edges(16, &edges).unwrap();
        let parts = vec![VertexSet::new((0..8).collect()), VertexSet::new((8..16).collect())];
        let p = find_connecting_system(&g, &parts).unwrap().unwrap();
        assert_eq!(p.edges(), vec![(0, 8), (1, 9)]);
        let bare = disjoint_union(&[complete(8), complete(8)]);
        assert_eq!(find_connecting_system(&bare, &parts).unwrap(), None);
        let single = find_connecting_system(&bare, &[VertexSet::full(16)]).unwrap();
        assert_eq!(single, Some(PathSystem::empty()));
    }

    #[test]
    fn prune_removes_a_parallel_pair() {
        // three parallel single-edge paths between two cliques plus one more
        let mut edges = disjoint_union(&[complete(5), complete(5)]).edges().collect::<Vec<_>>();
        edges.extend([(0, 5), (1, 6), (2, 7), (3, 8)]);
        let g = Graph::from_edges(10, &edges).unwrap();
        let parts = vec![VertexSet::new((0..5).collect()), VertexSet::new((5..10).collect())];
        let p = PathSystem::new(vec![vec![0, 5], vec![1, 6], vec![2, 7], vec![3, 8]]).unwrap();
        let out = prune_connecting(&p, &parts, &g).unwrap();
        assert_eq!(out.edge_count(), 2);
        assert!(is_connecting(&out, &parts));
    }

    #[test]
    fn balancing_single_edge_inside_larger_side() {
        // A = {0,1,2}, B = {3,4}; edge 0-1 inside A
        let g = Graph::from_edges(5, &[(0, 1), (0, 3), (1, 4), (2, 3), (2, 4)]).unwrap();
        let rp = bip_partition(&[0, 1, 2], &[3, 4]);
        let h = find_balancing_system(&g, &rp, 1.0).unwrap();
        assert!(is_balancing(&h, &rp));
        assert_eq!(h.edges(), vec![(0, 1)]);
        let independent = Graph::from_edges(5, &[(0, 3), (1, 4), (2, 3), (2, 4)]).unwrap();
        assert_eq!(find_balancing_system(&independent, &rp, 1.0), None);
    }

    #[test]
    fn combine_disjoint_even_systems() {
        let parts = sets(&[&[0, 1, 2], &[3, 4, 5]]);
        let rp = RobustPartition {
            expander_parts: parts.clone(),
            bipartite_parts: Vec::new(),
            params: PartitionParams {
                rho: Param::new(0.01).unwrap(),
                nu: Param::new(0.01).unwrap(),
                tau: Param::new(0.1).unwrap(),
                k: 2,
                l: 0,
            },
        };
        let c = PathSystem::new(vec![vec![0, 3], vec![1, 4]]).unwrap();
        let b = PathSystem::new(vec![vec![2, 5]]).unwrap();
        // R'(b) has odd degree at both parts, so its one edge goes
        let out = combine(&b, &c, &rp).unwrap();
        assert_eq!(out.edges(), vec![(0, 3), (1, 4)]);
        assert!(combine(&b, &PathSystem::empty(), &rp).is_err());
    }
}
