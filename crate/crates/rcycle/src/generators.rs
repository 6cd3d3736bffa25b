//! Test-corpus graphs: random regular graphs, extremal constructions and gadgets.

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

fn infeasible<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Infeasible(msg.into()))
}

fn build(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::from_edges(n, edges).expect("generator produced a simple graph")
}

pub fn complete(n: usize) -> Graph {
    let e: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    build(n, &e)
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "a cycle needs three vertices");
    let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    build(n, &e)
}

/// Sides `0..a` and `a..a+b`.
pub fn complete_bipartite(a: usize, b: usize) -> Graph {
    let e: Vec<_> = (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v))).collect();
    build(a + b, &e)
}

/// `K_{h,h}` minus the perfect matching `i ~ h + i`.
pub fn crown(h: usize) -> Graph {
    let e: Vec<_> = (0..h).flat_map(|u| (0..h).filter(move |&v| v != u).map(move |v| (u, h + v))).collect();
    build(2 * h, &e)
}

pub fn petersen() -> Graph {
    let mut e = Vec::new();
    for i in 0..5 {
        e.push((i, (i + 1) % 5));
        e.push((i, i + 5));
        e.push((5 + i, 5 + (i + 2) % 5));
    }
    build(10, &e)
}

/// Copies laid out consecutively.
pub fn disjoint_union(parts: &[Graph]) -> Graph {
    let mut edges = Vec::new();
    let mut offset = 0;
    for g in parts {
        edges.extend(g.edges().map(|(u, v)| (u + offset, v + offset)));
        offset += g.n();
    }
    build(offset, &edges)
}

/// Two disjoint copies of `K_{d+1}`.
pub fn two_cliques(d: usize) -> Graph {
    disjoint_union(&[complete(d + 1), complete(d + 1)])
}

/// Replaces each vertex of a cubic graph by a triangle; vertex `v` becomes
/// `3v, 3v+1, 3v+2`, its `i`-th port carrying the edge to its `i`-th neighbour.
pub fn triangle_replacement(g: &Graph) -> Result<Graph> {
    if g.regular_degree() != Some(3) {
        return infeasible("triangle replacement needs a 3-regular graph");
    }
    let mut e = Vec::new();
    for v in 0..g.n() {
        e.extend([(3 * v, 3 * v + 1), (3 * v + 1, 3 * v + 2), (3 * v, 3 * v + 2)]);
        for (i, &w) in g.neighbors(v).iter().enumerate() {
            if w > v {
                let j = g.neighbors(w).iter().position(|&x| x == v).unwrap();
                e.push((3 * v + i, 3 * w + j));
            }
        }
    }
    Ok(build(3 * g.n(), &e))
}

/// Side `A = 0..=r` fully joined to side `B` of size `(c+1)k + r`, where
/// `k = |g|`, with `c + 1` copies of `g` placed inside `B`.
pub fn bipartite_insert(g: &Graph, c: usize, r: usize) -> Result<Graph> {
    let k = g.n();
    if k == 0 {
        return infeasible("bipartite insert needs a nonempty gadget");
    }
    let a = 1 + r;
    let b = (c + 1) * k + r;
    let mut e: Vec<_> = (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v))).collect();
    for copy in 0..=c {
        let off = a + copy * k;
        e.extend(g.edges().map(|(u, v)| (u + off, v + off)));
    }
    Ok(build(a + b, &e))
}

/// Membership index for the edge-switch chain.
struct EdgeIndex {
    n: usize,
    bits: Option<Vec<u64>>,
    set: HashSet<(usize, usize)>,
}

impl EdgeIndex {
    fn new(n: usize) -> Self {
        let bits = (n <= 8192).then(|| vec![0u64; (n * n).div_ceil(64)]);
        EdgeIndex { n, bits, set: HashSet::new() }
    }

    fn key(&self, u: usize, v: usize) -> usize {
        u.min(v) * self.n + u.max(v)
    }

    fn contains(&self, u: usize, v: usize) -> bool {
        match &self.bits {
            Some(b) => {
                let k = self.key(u, v);
                b[k / 64] >> (k % 64) & 1 == 1
            }
            None => self.set.contains(&(u.min(v), u.max(v))),
        }
    }

    fn set(&mut self, u: usize, v: usize, on: bool) {
        let k = self.key(u, v);
        match &mut self.bits {
            Some(b) if on => b[k / 64] |= 1 << (k % 64),
            Some(b) => b[k / 64] &= !(1 << (k % 64)),
            None if on => {
                self.set.insert((u.min(v), u.max(v)));
            }
            None => {
                self.set.remove(&(u.min(v), u.max(v)));
            }
        }
    }
}

fn pairing_attempt(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(usize, usize)>> {
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    points.shuffle(rng);
    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(points.len() / 2);
    for pair in points.chunks(2) {
        let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        if u == v || !seen.insert((u, v)) {
            return None;
        }
        edges.push((u, v));
    }
    Some(edges)
}

fn circulant(n: usize, d: usize) -> Vec<(usize, usize)> {
    let mut e: Vec<_> = (0..n).flat_map(|i| (1..=d / 2).map(move |j| (i, (i + j) % n))).collect();
    if d % 2 == 1 {
        e.extend((0..n / 2).map(|i| (i, i + n / 2)));
    }
    e
}

/// Simple `d`-regular graph: pairing model with rejection for small degrees,
/// else a circulant start, followed by `10·n·d` double-edge switches.
pub fn gen_random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d >= n {
        return infeasible(format!("degree {d} must be below n = {n}"));
    }
    if n * d % 2 == 1 {
        return infeasible(format!("n·d = {} must be even", n * d));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = None;
    if d <= 6 {
        for _ in 0..200 {
            if let Some(e) = pairing_attempt(n, d, &mut rng) {
                edges = Some(e);
                break;
            }
        }
    }
    let mut edges = edges.unwrap_or_else(|| circulant(n, d));
    let mut index = EdgeIndex::new(n);
    for &(u, v) in &edges {
        index.set(u, v, true);
    }
    if edges.len() >= 2 {
        for _ in 0..10 * n * d {
            let i = rng.random_range(0..edges.len());
            let j = rng.random_range(0..edges.len());
            let (a, b) = edges[i];
            let (mut c, mut dd) = edges[j];
            if rng.random_bool(0.5) {
                std::mem::swap(&mut c, &mut dd);
            }
            // a-b, c-d  becomes  a-c, b-d
            if a == c || a == dd || b == c || b == dd || index.contains(a, c) || index.contains(b, dd) {
                continue;
            }
            index.set(a, b, false);
            index.set(c, dd, false);
            index.set(a, c, true);
            index.set(b, dd, true);
            edges[i] = (a.min(c), a.max(c));
            edges[j] = (b.min(dd), b.max(dd));
        }
    }
    let g = Graph::from_edges(n, &edges)?;
    debug_assert_eq!(g.regular_degree(), Some(d));
    Ok(g)
}

/// Regular graph with no cycle through all but `k - 4` vertices.
///
/// Layout: independent sets `A` (ids `0..d`) and `B` (ids `d..2d-1`) fully
/// joined, then `k - 2` blocks of `d + 1` vertices. Each block is a clique
/// minus a perfect matching on its vertices attached to `A`; every vertex of
/// `A` sends its last edge to one attached block vertex. Every block needs an
/// even positive number of attachments, so `d` must be even and at least
/// `2(k - 2)`.
pub fn gen_jung_graph(k: usize, d: usize) -> Result<Graph> {
    if k < 4 {
        return infeasible(format!("k = {k} violates k >= 4"));
    }
    if !d.is_multiple_of(k) {
        return infeasible(format!("k = {k} does not divide D = {d}"));
    }
    if !d.is_multiple_of(2) {
        return infeasible(format!("D = {d} must be even so each block gets a matching"));
    }
    if d < 2 * (k - 2) {
        return infeasible(format!("D = {d} violates D >= 2(k - 2) = {}", 2 * (k - 2)));
    }
    let blocks = k - 2;
    let mut attach = vec![2usize; blocks];
    let mut extra = d - 2 * blocks;
    let mut i = 0;
    while extra > 0 {
        attach[i % blocks] += 2;
        extra -= 2;
        i += 1;
    }
    let n = k * d + k - 3;
    let b_start = d;
    let block_start = 2 * d - 1;
    let mut e: Vec<(usize, usize)> = (0..d).flat_map(|a| (b_start..block_start).map(move |b| (a, b))).collect();
    let mut next_a = 0;
    for (bi, &c) in attach.iter().enumerate() {
        let off = block_start + bi * (d + 1);
        for x in 0..=d {
            for y in x + 1..=d {
                let matched = y < c && x % 2 == 0 && y == x + 1;
                if !matched {
                    e.push((off + x, off + y));
                }
            }
        }
        for x in 0..c {
            e.push((next_a, off + x));
            next_a += 1;
        }
    }
    let g = build(n, &e);
    if g.regular_degree() != Some(d) {
        return Err(Error::Diagnostic(format!("jung({k}, {d}) is not {d}-regular")));
    }
    let mut keep = vec![true; n];
    keep[..d].iter_mut().for_each(|x| *x = false);
    let comps = g.components_within(&keep).len();
    if comps != d + k - 3 {
        return Err(Error::Diagnostic(format!("deleting A leaves {comps} components, expected {}", d + k - 3)));
    }
    Ok(g)
}

/// Vertex sets `A` and `B` of [`gen_jung_graph`].
pub fn jung_sides(d: usize) -> (VertexSet, VertexSet) {
    (VertexSet::new((0..d).collect()), VertexSet::new((d..2 * d - 1).collect()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CorpusSpec {
    RandomRegular {
        n: usize,
        d: usize,
        #[serde(default)]
        seed: u64,
    },
    TwoCliques {
        d: usize,
    },
    CompleteBipartite {
        a: usize,
        b: usize,
    },
    Clique {
        n: usize,
    },
    Crown {
        h: usize,
    },
    Jung {
        k: usize,
        d: usize,
    },
    Petersen,
    TriangleReplacement {
        base: Box<CorpusSpec>,
    },
    DisjointUnion {
        parts: Vec<CorpusSpec>,
    },
    BipartiteInsert {
        base: Box<CorpusSpec>,
        c: usize,
        r: usize,
    },
}

impl fmt::Display for CorpusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusSpec::RandomRegular { n, d, seed } => write!(f, "random_regular({n},{d},s{seed})"),
            CorpusSpec::TwoCliques { d } => write!(f, "two_cliques({d})"),
            CorpusSpec::CompleteBipartite { a, b } => write!(f, "complete_bipartite({a},{b})"),
            CorpusSpec::Clique { n } => write!(f, "clique({n})"),
            CorpusSpec::Crown { h } => write!(f, "crown({h})"),
            CorpusSpec::Jung { k, d } => write!(f, "jung({k},{d})"),
            CorpusSpec::Petersen => write!(f, "petersen"),
            CorpusSpec::TriangleReplacement { base } => write!(f, "triangle_replacement({base})"),
            CorpusSpec::DisjointUnion { parts } => {
                let names: Vec<_> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "disjoint_union({})", names.join(","))
            }
            CorpusSpec::BipartiteInsert { base, c, r } => write!(f, "bipartite_insert({base},{c},{r})"),
        }
    }
}

pub fn gen_hardness_instance(spec: &CorpusSpec) -> Result<Graph> {
    match spec {
        CorpusSpec::RandomRegular { n, d, seed } => gen_random_regular(*n, *d, *seed),
        CorpusSpec::TwoCliques { d } => Ok(two_cliques(*d)),
        CorpusSpec::CompleteBipartite { a, b } => Ok(complete_bipartite(*a, *b)),
        CorpusSpec::Clique { n } => Ok(complete(*n)),
        CorpusSpec::Crown { h } => Ok(crown(*h)),
        CorpusSpec::Jung { k, d } => gen_jung_graph(*k, *d),
        CorpusSpec::Petersen => Ok(petersen()),
        CorpusSpec::TriangleReplacement { base } => triangle_replacement(&gen_hardness_instance(base)?),
        CorpusSpec::DisjointUnion { parts } => {
            let graphs = parts.iter().map(gen_hardness_instance).collect::<Result<Vec<_>>>()?;
            let degrees: HashSet<_> = graphs.iter().map(|g| g.regular_degree()).collect();
            if degrees.len() > 1 || degrees.contains(&None) {
                return infeasible("disjoint union needs regular parts of one common degree");
            }
            Ok(disjoint_union(&graphs))
        }
        CorpusSpec::BipartiteInsert { base, c, r } => bipartite_insert(&gen_hardness_instance(base)?, *c, *r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_regular_examples() {
        let g = gen_random_regular(8, 3, 1).unwrap();
        assert_eq!((g.n(), g.regular_degree()), (8, Some(3)));
        assert!(matches!(gen_random_regular(5, 3, 0), Err(Error::Infeasible(_))));
        assert!(matches!(gen_random_regular(4, 4, 0), Err(Error::Infeasible(_))));
        let big = gen_random_regular(60, 31, 9).unwrap();
        assert_eq!(big.regular_degree(), Some(31));
        assert_eq!(gen_random_regular(40, 12, 5).unwrap(), gen_random_regular(40, 12, 5).unwrap());
        assert_ne!(gen_random_regular(40, 12, 5).unwrap(), gen_random_regular(40, 12, 6).unwrap());
    }

    #[test]
    fn jung_facts_hold() {
        for (k, d) in [(4, 4), (4, 8), (4, 12), (5, 10), (6, 12)] {
            let g = gen_jung_graph(k, d).unwrap();
            assert_eq!(g.n(), k * d + k - 3);
            assert_eq!(g.regular_degree(), Some(d));
        }
        assert!(gen_jung_graph(3, 6).is_err());
        assert!(gen_jung_graph(4, 6).is_err());
        assert!(gen_jung_graph(5, 5).is_err());
        assert!(gen_jung_graph(8, 8).is_err());
    }

    #[test]
    fn gadget_sizes() {
        let t = triangle_replacement(&complete(4)).unwrap();
        assert_eq!((t.n(), t.regular_degree()), (12, Some(3)));
        assert!(triangle_replacement(&cycle(5)).is_err());
        let u = disjoint_union(&[complete(8), complete(8)]);
        assert_eq!((u.n(), u.regular_degree()), (16, Some(7)));
        let ins = bipartite_insert(&cycle(4), 2, 3).unwrap();
        assert_eq!(ins.n(), (1 + 3) + (3 * 4 + 3));
        assert_eq!(ins.degree(0), 15);
        assert_eq!(crown(6).regular_degree(), Some(5));
        assert_eq!(petersen().regular_degree(), Some(3));
    }

    #[test]
    fn corpus_spec_json() {
        let spec = CorpusSpec::TriangleReplacement { base: Box::new(CorpusSpec::Clique { n: 4 }) };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"family":"triangle_replacement","base":{"family":"clique","n":4}}"#);
        assert_eq!(gen_hardness_instance(&serde_json::from_str(&json).unwrap()).unwrap().n(), 12);
        let bad = CorpusSpec::DisjointUnion { parts: vec![CorpusSpec::Clique { n: 4 }, CorpusSpec::Clique { n: 5 }] };
        assert!(gen_hardness_instance(&bad).is_err());
    }
}
