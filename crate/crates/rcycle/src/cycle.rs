//! The long-cycle decision procedure and certificate construction.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::graph::{induced_subgraph, Graph, VertexSet};
use crate::oracles::brute_longest_cycle_witness;
use crate::param::Param;
use crate::partition::{decompose, HierarchyConfig, HierarchyOptions, PartitionParams, RobustPartition};
use crate::paths::{combine, find_balancing_system, find_connecting_system, imbalance_deltas, part_owner, PathSystem};

/// A cycle as its cyclic vertex sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cycle {
    pub vertices: Vec<usize>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Whether `c` is a simple cycle of `g` on at least `min_len` vertices.
pub fn verify_cycle(g: &Graph, c: &Cycle, min_len: usize) -> bool {
    let vs = &c.vertices;
    if vs.len() < 3 || vs.len() < min_len || vs.iter().any(|&v| v >= g.n()) {
        return false;
    }
    let mut seen = vec![false; g.n()];
    for &v in vs {
        if std::mem::replace(&mut seen[v], true) {
            return false;
        }
    }
    (0..vs.len()).all(|i| g.has_edge(vs[i], vs[(i + 1) % vs.len()]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    BruteForce,
    Pipeline,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub k: usize,
    pub l: usize,
    pub sizes: Vec<usize>,
}

impl PartitionSummary {
    pub fn of(rp: &RobustPartition) -> PartitionSummary {
        PartitionSummary { k: rp.params.k, l: rp.params.l, sizes: rp.sizes() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub verdict: Verdict,
    pub c_used: usize,
    pub path: Route,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Cycle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<String>,
    pub partition: Option<PartitionSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub diagnostics: Vec<String>,
    pub timings_ms: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecideOptions {
    pub c_override: Option<usize>,
    pub hierarchy: HierarchyOptions,
    /// Skip the exhaustive route even on small inputs.
    pub force_pipeline: bool,
    /// Build a certificate after a yes verdict.
    pub construct: bool,
    pub seed: u64,
    pub restarts: usize,
    /// Size budget for the balancing system, as a fraction of `n`.
    pub xi: f64,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            c_override: None,
            hierarchy: HierarchyOptions::default(),
            force_pipeline: false,
            construct: true,
            seed: 0,
            restarts: 20,
            xi: 0.25,
        }
    }
}

/// `ceil(100 / alpha²)`, exact when alpha is stored as a ratio.
pub fn default_c(alpha: f64) -> Result<usize> {
    let a = Param::new(alpha)?;
    Ok(match a.as_ratio() {
        Some((num, den)) => {
            let top = 100 * (den as u128).pow(2);
            let bottom = (num as u128).pow(2);
            usize::try_from(top.div_ceil(bottom)).unwrap_or(usize::MAX)
        }
        None => (100.0 / (alpha * alpha)).ceil().min(usize::MAX as f64) as usize,
    })
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

/// Walks without backtracking until a vertex repeats and returns that cycle.
fn walk_until_repeat(g: &Graph) -> Option<Cycle> {
    let start = (0..g.n()).find(|&v| g.degree(v) >= 2)?;
    let mut pos = vec![usize::MAX; g.n()];
    let mut walk = vec![start];
    pos[start] = 0;
    let mut prev = usize::MAX;
    let mut at = start;
    loop {
        let next = *g.neighbors(at).iter().find(|&&w| w != prev)?;
        if pos[next] != usize::MAX {
            return Some(Cycle { vertices: walk[pos[next]..].to_vec() });
        }
        pos[next] = walk.len();
        walk.push(next);
        prev = at;
        at = next;
    }
}

/// Decides whether `g` has a cycle through at least `n - c` vertices.
pub fn decide_long_cycle(g: &Graph, alpha: f64, opts: &DecideOptions) -> Result<DecisionReport> {
    let total = Instant::now();
    let n = g.n();
    let Some(d) = g.regular_degree() else {
        return contract("the decision procedure needs a regular graph");
    };
    let alpha_p = Param::new(alpha)?;
    if !(alpha > 0.0 && alpha <= 1.0) || alpha_p.count_lt_times(d as u128, n as u128) {
        return contract(format!("degree {d} is below alpha n for alpha = {alpha}, n = {n}"));
    }
    let c = match opts.c_override {
        Some(c) => c,
        None => default_c(alpha)?,
    };
    let mut report = DecisionReport {
        verdict: Verdict::No,
        c_used: c,
        path: Route::BruteForce,
        certificate: None,
        obstruction: None,
        partition: None,
        diagnostics: Vec::new(),
        timings_ms: BTreeMap::new(),
    };
    let threshold = n.saturating_sub(c);

    if threshold <= 3 {
        match walk_until_repeat(g) {
            Some(cycle) if cycle.len() >= threshold => {
                report.verdict = Verdict::Yes;
                report.certificate = Some(cycle);
            }
            _ if threshold == 0 => report.verdict = Verdict::Yes,
            _ => report.obstruction = Some("graph has no cycle".into()),
        }
        report.timings_ms.insert("total".into(), ms(total));
        return Ok(report);
    }

    let cap = opts.hierarchy.n0.max(opts.hierarchy.brute_cap);
    if !opts.force_pipeline && n <= cap {
        let t = Instant::now();
        let best = brute_longest_cycle_witness(g, cap)?;
        report.timings_ms.insert("brute".into(), ms(t));
        let len = best.as_ref().map_or(0, Vec::len);
        if len >= threshold {
            report.verdict = Verdict::Yes;
            report.certificate = best.map(|vertices| Cycle { vertices });
        } else {
            report.obstruction = Some(format!("longest cycle has {len} vertices, below {threshold}"));
        }
        report.timings_ms.insert("total".into(), ms(total));
        return Ok(report);
    }

    report.path = Route::Pipeline;
    let cfg = HierarchyConfig::new(alpha, &opts.hierarchy)?;
    let t = Instant::now();
    let rp = decompose(g, &cfg)?;
    report.timings_ms.insert("decompose".into(), ms(t));
    report.partition = Some(PartitionSummary::of(&rp));
    let parts = rp.parts();

    let t = Instant::now();
    let connecting = find_connecting_system(g, &parts)?;
    report.timings_ms.insert("connecting".into(), ms(t));
    let Some(conn) = connecting else {
        report.obstruction = Some(format!("no connecting path system over the {} parts", parts.len()));
        report.timings_ms.insert("total".into(), ms(total));
        return Ok(report);
    };
    report.verdict = Verdict::Yes;
    if opts.construct {
        let t = Instant::now();
        match construct_certificate(g, &rp, &conn, c, opts) {
            Ok(cycle) => report.certificate = Some(cycle),
            Err(e) => report.diagnostics.push(format!("certificate unavailable: {e}")),
        }
        report.timings_ms.insert("construct".into(), ms(t));
    }
    report.timings_ms.insert("total".into(), ms(total));
    Ok(report)
}

fn construct_certificate(
    g: &Graph,
    rp: &RobustPartition,
    conn: &PathSystem,
    c: usize,
    opts: &DecideOptions,
) -> Result<Cycle> {
    let balancing = find_balancing_system(g, rp, opts.xi).unwrap_or_default();
    let merged = combine(&balancing, conn, rp)?;
    let discard = select_discard_set(&merged, rp, c)?;
    let cycle = assemble_cycle_with(g, rp, &merged, &discard, opts.seed, opts.restarts)?;
    if !verify_cycle(g, &cycle, g.n().saturating_sub(c)) {
        return Err(Error::Assembly("assembled cycle is too short".into()));
    }
    Ok(cycle)
}

/// Picks, per bipartite part, vertices of the overloaded side outside `p`
/// whose removal zeroes that part's imbalance. At most `t` vertices overall.
pub fn select_discard_set(p: &PathSystem, rp: &RobustPartition, t: usize) -> Result<VertexSet> {
    let used = p.vertices();
    let mut out = Vec::new();
    for (bp, delta) in rp.bipartite_parts.iter().zip(imbalance_deltas(p, rp)) {
        if delta % 2 != 0 {
            return Err(Error::Infeasible(format!("odd imbalance {delta} cannot be fixed by discarding")));
        }
        let want = (delta.unsigned_abs() / 2) as usize;
        let side = if delta > 0 { &bp.a } else { &bp.b };
        let pool: Vec<usize> = side.iter().filter(|&v| !used.contains(v)).take(want).collect();
        if pool.len() < want {
            return Err(Error::Infeasible(format!("need {want} spare vertices on the overloaded side, found {}", pool.len())));
        }
        out.extend(pool);
    }
    if out.len() > t {
        return Err(Error::Infeasible(format!("discard set of {} exceeds the budget {t}", out.len())));
    }
    let discard = VertexSet::new(out);
    #[cfg(test)]
    {
        let trimmed = without(rp, &discard);
        assert!(imbalance_deltas(p, &trimmed).iter().all(|&d| d == 0));
    }
    Ok(discard)
}

/// The partition with `discard` removed from every part.
pub fn without(rp: &RobustPartition, discard: &VertexSet) -> RobustPartition {
    RobustPartition {
        expander_parts: rp.expander_parts.iter().map(|s| s.difference(discard)).collect(),
        bipartite_parts: rp
            .bipartite_parts
            .iter()
            .map(|b| crate::partition::BipartitePart {
                part: b.part.difference(discard),
                a: b.a.difference(discard),
                b: b.b.difference(discard),
            })
            .collect(),
        params: PartitionParams { ..rp.params.clone() },
    }
}

/// Builds a cycle through every vertex outside `discard`, following the
/// connecting structure of `p` when possible. Retries with derived seeds.
pub fn assemble_cycle(g: &Graph, rp: &RobustPartition, p: &PathSystem, discard: &VertexSet, seed: u64) -> Result<Cycle> {
    assemble_cycle_with(g, rp, p, discard, seed, 20)
}

pub fn assemble_cycle_with(
    g: &Graph,
    rp: &RobustPartition,
    p: &PathSystem,
    discard: &VertexSet,
    seed: u64,
    restarts: usize,
) -> Result<Cycle> {
    p.validate(g)?;
    if !p.vertices().is_disjoint(discard) {
        return contract("discarded vertices lie on the path system");
    }
    let need = g.n() - discard.len();
    let budget = 40 * g.n().max(8).pow(2);
    for attempt in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        if let Some(vertices) = structured(g, rp, p, discard, &mut rng, budget) {
            let cycle = Cycle { vertices };
            if verify_cycle(g, &cycle, need) {
                return Ok(cycle);
            }
        }
    }
    let keep = VertexSet::full(g.n()).difference(discard);
    let sub = induced_subgraph(g, &keep);
    for attempt in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1 << 32).wrapping_add(attempt as u64));
        if let Some(local) = posa_cycle(&sub.graph, &mut rng, budget) {
            let cycle = Cycle { vertices: local.into_iter().map(|v| sub.to_global[v]).collect() };
            if verify_cycle(g, &cycle, need) {
                return Ok(cycle);
            }
        }
    }
    Err(Error::Assembly(format!("no cycle through all {need} kept vertices after {restarts} restarts")))
}

/// Eulerian circuit of the endpoint multigraph as `(path index, forward)`.
fn euler_order(paths: &[Vec<usize>], owner: &[usize], m: usize) -> Option<Vec<(usize, bool)>> {
    let mut adj: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); m];
    for (id, p) in paths.iter().enumerate() {
        let (a, b) = (owner[p[0]], owner[p[p.len() - 1]]);
        adj[a].push((b, id, true));
        adj[b].push((a, id, false));
    }
    let start = owner[paths.first()?[0]];
    let mut used = vec![false; paths.len()];
    let mut ptr = vec![0; m];
    let mut stack: Vec<(usize, Option<(usize, bool)>)> = vec![(start, None)];
    let mut out = Vec::new();
    while let Some(&(v, arrived)) = stack.last() {
        while ptr[v] < adj[v].len() && used[adj[v][ptr[v]].1] {
            ptr[v] += 1;
        }
        if ptr[v] == adj[v].len() {
            stack.pop();
            out.extend(arrived);
        } else {
            let (w, id, fwd) = adj[v][ptr[v]];
            used[id] = true;
            stack.push((w, Some((id, fwd))));
        }
    }
    out.reverse();
    (out.len() == paths.len()).then_some(out)
}

/// Path system walked in Euler order, with Hamilton paths inside each part
/// joining consecutive paths.
fn structured(
    g: &Graph,
    rp: &RobustPartition,
    p: &PathSystem,
    discard: &VertexSet,
    rng: &mut ChaCha8Rng,
    budget: usize,
) -> Option<Vec<usize>> {
    let parts = rp.parts();
    let m = parts.len();
    let owner = part_owner(&parts, g.n()).ok()?;
    if p.is_empty() {
        if m != 1 {
            return None;
        }
        let keep = parts[0].difference(discard);
        let sub = induced_subgraph(g, &keep);
        return posa_cycle(&sub.graph, rng, budget).map(|c| c.into_iter().map(|v| sub.to_global[v]).collect());
    }
    let order = euler_order(p.paths(), &owner, m)?;
    let oriented: Vec<Vec<usize>> = order
        .iter()
        .map(|&(id, fwd)| {
            let mut path = p.paths()[id].clone();
            if !fwd {
                path.reverse();
            }
            path
        })
        .collect();
    // visit i joins the end of path i to the start of path i + 1
    let r = oriented.len();
    let ports: Vec<(usize, usize)> = (0..r).map(|i| (*oriented[i].last().unwrap(), oriented[(i + 1) % r][0])).collect();
    let used = p.vertices();
    let mut shares: Vec<Vec<usize>> = vec![Vec::new(); r];
    let k = rp.expander_parts.len();
    for (x, part) in parts.iter().enumerate() {
        let visits: Vec<usize> = (0..r).filter(|&i| owner[ports[i].0] == x).collect();
        let mut free: Vec<usize> = part.iter().filter(|&v| !used.contains(v) && !discard.contains(v)).collect();
        if visits.is_empty() {
            if free.is_empty() {
                continue;
            }
            return None;
        }
        free.shuffle(rng);
        if x < k {
            for (j, v) in free.into_iter().enumerate() {
                shares[visits[j % visits.len()]].push(v);
            }
        } else {
            let bp = &rp.bipartite_parts[x - k];
            let (mut fa, mut fb): (Vec<usize>, Vec<usize>) = free.into_iter().partition(|&v| bp.a.contains(v));
            for &i in &visits {
                let (s, t) = ports[i];
                match (bp.a.contains(s), bp.a.contains(t)) {
                    (true, true) => shares[i].push(fb.pop()?),
                    (false, false) => shares[i].push(fa.pop()?),
                    _ => {}
                }
            }
            if fa.len() != fb.len() {
                return None;
            }
            for (j, (a, b)) in fa.into_iter().zip(fb).enumerate() {
                shares[visits[j % visits.len()]].extend([a, b]);
            }
        }
    }
    let mut cycle = Vec::with_capacity(g.n());
    for i in 0..r {
        cycle.extend_from_slice(&oriented[i]);
        let (s, t) = ports[i];
        let mut members = shares[i].clone();
        members.extend([s, t]);
        let set = VertexSet::new(members);
        let sub = induced_subgraph(g, &set);
        let (ls, lt) = (sub.to_local[s]?, sub.to_local[t]?);
        let local = posa_path(&sub.graph, ls, Some(lt), rng, budget)?;
        cycle.extend(local[1..local.len() - 1].iter().map(|&v| sub.to_global[v]));
    }
    Some(cycle)
}

/// Rotation-extension search for a Hamilton cycle.
fn posa_cycle(h: &Graph, rng: &mut ChaCha8Rng, budget: usize) -> Option<Vec<usize>> {
    if h.n() < 3 {
        return None;
    }
    let start = rng.random_range(0..h.n());
    posa_path(h, start, None, rng, budget)
}

/// Rotation-extension search for a Hamilton path of `h` from `start`. With a
/// `target` the path must end there; without one it must close into a cycle.
fn posa_path(h: &Graph, start: usize, target: Option<usize>, rng: &mut ChaCha8Rng, budget: usize) -> Option<Vec<usize>> {
    let n = h.n();
    let goal = if target.is_some() { n - 1 } else { n };
    let mut pos = vec![usize::MAX; n];
    let mut path = vec![start];
    pos[start] = 0;
    let mut options = Vec::new();
    for _ in 0..budget {
        let end = *path.last().unwrap();
        if path.len() == goal {
            match target {
                Some(t) if h.has_edge(end, t) => {
                    path.push(t);
                    return Some(path);
                }
                None if h.has_edge(end, start) => return Some(path),
                _ => {}
            }
        } else {
            options.clear();
            options.extend(h.neighbors(end).iter().copied().filter(|&w| pos[w] == usize::MAX && Some(w) != target));
            if let Some(&w) = options.choose(rng) {
                pos[w] = path.len();
                path.push(w);
                continue;
            }
        }
        // rotate: an edge from the end to path[i] lets path[i+1..] reverse
        let len = path.len();
        options.clear();
        options.extend(h.neighbors(end).iter().copied().filter(|&w| pos[w] != usize::MAX && pos[w] + 2 < len));
        let &w = options.choose(rng)?;
        let i = pos[w];
        path[i + 1..].reverse();
        for (j, &v) in path.iter().enumerate().skip(i + 1) {
            pos[v] = j;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{complete, complete_bipartite, disjoint_union, gen_random_regular};

    #[test]
    fn verify_cycle_examples() {
        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(verify_cycle(&c4, &Cycle { vertices: vec![0, 1, 2, 3] }, 4));
        assert!(!verify_cycle(&c4, &Cycle { vertices: vec![0, 2, 1, 3] }, 3));
        let c5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert!(!verify_cycle(&c5, &Cycle { vertices: vec![0, 1, 2, 3, 4] }, 6));
    }

    #[test]
    fn default_c_is_exact() {
        assert_eq!(default_c(0.5).unwrap(), 400);
        assert_eq!(default_c(0.9).unwrap(), 124);
        assert_eq!(default_c(0.1).unwrap(), 10_000);
    }

    #[test]
    fn brute_route_examples() {
        let k12 = complete(12);
        let r = decide_long_cycle(&k12, 0.9, &DecideOptions { c_override: Some(0), ..Default::default() }).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        assert!(verify_cycle(&k12, r.certificate.as_ref().unwrap(), 12));
        let two = disjoint_union(&[complete(8), complete(8)]);
        let r = decide_long_cycle(&two, 0.4, &DecideOptions { c_override: Some(4), ..Default::default() }).unwrap();
        assert_eq!(r.verdict, Verdict::No);
    }

    #[test]
    fn pipeline_on_clique_and_cliques() {
        let opts = DecideOptions { c_override: Some(0), force_pipeline: true, ..Default::default() };
        let k12 = complete(12);
        let r = decide_long_cycle(&k12, 0.9, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        assert!(verify_cycle(&k12, r.certificate.as_ref().unwrap(), 12));
        let two = disjoint_union(&[complete(8), complete(8)]);
        let r = decide_long_cycle(&two, 0.4, &DecideOptions { c_override: Some(4), ..opts.clone() }).unwrap();
        assert_eq!(r.verdict, Verdict::No);
        let kaa = complete_bipartite(6, 6);
        let r = decide_long_cycle(&kaa, 0.5, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        assert!(verify_cycle(&kaa, r.certificate.as_ref().unwrap(), 12));
    }

    #[test]
    fn discard_set_examples() {
        use crate::partition::BipartitePart;
        let a = VertexSet::new((0..6).collect());
        let b = VertexSet::new((6..11).collect());
        let rp = RobustPartition {
            expander_parts: Vec::new(),
            bipartite_parts: vec![BipartitePart { part: a.union(&b), a, b }],
            params: PartitionParams {
                rho: Param::new(0.01).unwrap(),
                nu: Param::new(0.01).unwrap(),
                tau: Param::new(0.1).unwrap(),
                k: 0,
                l: 1,
            },
        };
        let t = select_discard_set(&PathSystem::empty(), &rp, 3).unwrap();
        assert_eq!(t.as_slice(), &[0]);
        assert!(select_discard_set(&PathSystem::empty(), &rp, 0).is_err());
    }

    #[test]
    fn assembles_hamilton_cycles_in_dense_regular_graphs() {
        for seed in 0..10 {
            let g = gen_random_regular(60, 30, seed).unwrap();
            let rp = RobustPartition {
                expander_parts: vec![VertexSet::full(60)],
                bipartite_parts: Vec::new(),
                params: PartitionParams {
                    rho: Param::new(0.01).unwrap(),
                    nu: Param::new(0.01).unwrap(),
                    tau: Param::new(0.1).unwrap(),
                    k: 1,
                    l: 0,
                },
            };
            let c = assemble_cycle(&g, &rp, &PathSystem::empty(), &VertexSet::default(), seed).unwrap();
            assert!(verify_cycle(&g, &c, 60));
        }
    }
}
