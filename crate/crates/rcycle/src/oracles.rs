//! Exhaustive ground truth for small instances. Every oracle refuses above its
//! cap instead of approximating.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::graph::{edges_between, edges_inside, induced_subgraph, Bipartition, Graph, VertexSet};
use crate::param::Param;
use crate::paths::{is_connecting, PathSystem};

pub const LONGEST_CYCLE_CAP: usize = 18;
pub const CONDUCTANCE_CAP: usize = 14;
pub const BETA_CAP: usize = 12;
pub const ROBUST_CAP: usize = 18;
pub const CONNECTING_CAP: usize = 12;
pub const CLUSTERING_CAP: usize = 16;

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::CapExceeded { n, cap })
    } else {
        Ok(())
    }
}

/// Vertices of the 2-core; everything else lies on no cycle.
fn two_core(g: &Graph) -> Vec<bool> {
    let mut alive = vec![true; g.n()];
    let mut deg: Vec<usize> = (0..g.n()).map(|v| g.degree(v)).collect();
    let mut stack: Vec<usize> = (0..g.n()).filter(|&v| deg[v] < 2).collect();
    while let Some(v) = stack.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &w in g.neighbors(v) {
            if alive[w] {
                deg[w] -= 1;
                if deg[w] < 2 {
                    stack.push(w);
                }
            }
        }
    }
    alive
}

/// Path DP from a fixed lowest vertex `s` over the vertices above it.
/// `reach[mask]` holds the possible end vertices of a path starting at `s`
/// whose other vertices are exactly `mask` (bit `i` is vertex `s + 1 + i`).
fn reach_table(adj: &[u32], s: usize) -> Vec<u32> {
    let k = adj.len();
    let m = k - s - 1;
    let mut reach = vec![0u32; 1 << m];
    for v in s + 1..k {
        if adj[s] >> v & 1 == 1 {
            reach[1 << (v - s - 1)] |= 1 << v;
        }
    }
    let higher: u32 = if k == 32 { u32::MAX } else { (1u32 << k) - 1 } & !((1u32 << (s + 1)) - 1);
    for mask in 1usize..(1 << m) {
        let mut ends = reach[mask];
        if ends == 0 {
            continue;
        }
        let used = (mask as u32) << (s + 1);
        while ends != 0 {
            let v = ends.trailing_zeros() as usize;
            ends &= ends - 1;
            let mut ext = adj[v] & higher & !used;
            while ext != 0 {
                let w = ext.trailing_zeros() as usize;
                ext &= ext - 1;
                reach[mask | 1 << (w - s - 1)] |= 1 << w;
            }
        }
    }
    reach
}

/// Longest cycle of a component given as bitmask adjacency (local ids).
fn longest_in_component(adj: &[u32]) -> Option<Vec<usize>> {
    let k = adj.len();
    let mut best: Option<(usize, usize, usize, usize)> = None; // (len, s, mask, end)
    for s in 0..k {
        if k - s < 3 || best.is_some_and(|b| b.0 >= k - s) {
            break;
        }
        let reach = reach_table(adj, s);
        for (mask, &ends) in reach.iter().enumerate() {
            let len = mask.count_ones() as usize + 1;
            if len < 3 || best.is_some_and(|b| b.0 >= len) {
                continue;
            }
            let closing = ends & adj[s];
            if closing != 0 {
                best = Some((len, s, mask, closing.trailing_zeros() as usize));
            }
        }
    }
    let (_, s, mut mask, mut end) = best?;
    let reach = reach_table(adj, s);
    let mut seq = vec![end];
    while mask.count_ones() > 1 {
        mask ^= 1 << (end - s - 1);
        let prev = reach[mask] & adj[end];
        end = prev.trailing_zeros() as usize;
        seq.push(end);
    }
    seq.push(s);
    seq.reverse();
    Some(seq)
}

/// A longest cycle, or `None` for a forest.
pub fn brute_longest_cycle_witness(g: &Graph, cap: usize) -> Result<Option<Vec<usize>>> {
    check_cap(g.n(), cap)?;
    if g.n() > 32 {
        return contract("bitmask oracles support at most 32 vertices");
    }
    let core = two_core(g);
    let mut best: Option<Vec<usize>> = None;
    for comp in g.components_within(&core) {
        if comp.len() < 3 || best.as_ref().is_some_and(|b| b.len() >= comp.len()) {
            continue;
        }
        let sub = induced_subgraph(g, &comp);
        let adj: Vec<u32> =
            (0..comp.len()).map(|v| sub.graph.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w)).collect();
        if let Some(c) = longest_in_component(&adj) {
            if best.as_ref().is_none_or(|b| c.len() > b.len()) {
                best = Some(c.into_iter().map(|v| sub.to_global[v]).collect());
            }
        }
    }
    Ok(best)
}

/// Circumference; 0 for forests.
pub fn brute_longest_cycle(g: &Graph, cap: usize) -> Result<usize> {
    Ok(brute_longest_cycle_witness(g, cap)?.map_or(0, |c| c.len()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    Conductance,
    Beta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutWitness {
    Set(VertexSet),
    Labels(Vec<i8>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalCut {
    pub value: f64,
    pub numerator: usize,
    pub denominator: usize,
    pub witness: CutWitness,
}

pub fn brute_extremal_cut(g: &Graph, which: CutKind, cap: usize) -> Result<ExtremalCut> {
    match which {
        CutKind::Conductance => brute_conductance(g, cap),
        CutKind::Beta => brute_beta(g, cap),
    }
}

fn brute_conductance(g: &Graph, cap: usize) -> Result<ExtremalCut> {
    check_cap(g.n(), cap)?;
    let n = g.n();
    let adj: Vec<u32> = (0..n).map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w)).collect();
    let total = 2 * g.edge_count();
    let mut best: Option<(usize, usize, u32)> = None;
    for mask in 1u32..(1u32 << n).saturating_sub(1) {
        let (mut vol, mut boundary) = (0usize, 0usize);
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            vol += g.degree(v);
            boundary += (adj[v] & !mask).count_ones() as usize;
        }
        let mv = vol.min(total - vol);
        if mv > 0 && best.is_none_or(|(b, d, _)| boundary * d < b * mv) {
            best = Some((boundary, mv, mask));
        }
    }
    let (num, den, mask) = best.ok_or_else(|| Error::Contract("graph has no cut with positive volume".into()))?;
    Ok(ExtremalCut {
        value: num as f64 / den as f64,
        numerator: num,
        denominator: den,
        witness: CutWitness::Set((0..n).filter(|v| mask >> v & 1 == 1).collect()),
    })
}

fn brute_beta(g: &Graph, cap: usize) -> Result<ExtremalCut> {
    check_cap(g.n(), cap)?;
    let n = g.n();
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut labels = vec![0i8; n];
    let mut best: Option<(usize, usize, Vec<i8>)> = None;
    // odometer over {0, 1, -1}^n, skipping the all-zero start
    loop {
        let mut i = 0;
        while i < n {
            labels[i] = match labels[i] {
                0 => 1,
                1 => -1,
                _ => 0,
            };
            if labels[i] != 0 {
                break;
            }
            i += 1;
        }
        if i == n {
            break;
        }
        let den: usize = (0..n).filter(|&v| labels[v] != 0).map(|v| g.degree(v)).sum();
        if den == 0 {
            continue;
        }
        let num: usize = edges.iter().map(|&(u, v)| (labels[u] + labels[v]).unsigned_abs() as usize).sum();
        if best.as_ref().is_none_or(|(b, d, _)| num * d < b * den) {
            best = Some((num, den, labels.clone()));
        }
    }
    let (num, den, labels) = best.ok_or_else(|| Error::Contract("graph has no edges".into()))?;
    Ok(ExtremalCut { value: num as f64 / den as f64, numerator: num, denominator: den, witness: CutWitness::Labels(labels) })
}

/// Checks robust `(nu, tau)`-expansion set by set. In bipartite mode only
/// subsets of side `a` are tested, with the window measured against `|a|`.
/// Returns the first violating set as witness.
pub fn brute_is_robust_expander(
    g: &Graph,
    nu: Param,
    tau: Param,
    bipartite: Option<&Bipartition>,
    cap: usize,
) -> Result<(bool, Option<VertexSet>)> {
    check_cap(g.n(), cap)?;
    let n = g.n();
    if n > 32 {
        return contract("bitmask oracles support at most 32 vertices");
    }
    let adj: Vec<u32> = (0..n).map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w)).collect();
    let (ground, window): (Vec<usize>, usize) = match bipartite {
        Some(bp) => {
            if bp.vertices() != VertexSet::full(n) || !bp.a.is_disjoint(&bp.b) {
                return contract("bipartition must partition the vertex set");
            }
            (bp.a.as_slice().to_vec(), bp.a.len())
        }
        None => ((0..n).collect(), n),
    };
    for sub in 1u32..(1u32 << ground.len()) {
        let size = sub.count_ones() as usize;
        // tau*window <= size <= (1 - tau)*window
        if tau.count_lt_times(size as u128, window as u128) || tau.count_lt_times((window - size) as u128, window as u128) {
            continue;
        }
        let mut mask = 0u32;
        for (i, &v) in ground.iter().enumerate() {
            if sub >> i & 1 == 1 {
                mask |= 1 << v;
            }
        }
        let rn = (0..n).filter(|&v| !nu.count_lt_times((adj[v] & mask).count_ones() as u128, n as u128)).count();
        let expands = rn >= size && !nu.count_lt_times((rn - size) as u128, n as u128);
        if !expands {
            return Ok((false, Some((0..n).filter(|v| mask >> v & 1 == 1).collect())));
        }
    }
    Ok((true, None))
}

/// Whether some path system on at most `m² - m` cross-part edges is connecting.
pub fn brute_connecting_exists(g: &Graph, parts: &[VertexSet], cap: usize) -> Result<bool> {
    check_cap(g.n(), cap)?;
    let m = parts.len();
    if m > 3 {
        return contract("the connecting oracle supports at most three parts");
    }
    if m <= 1 {
        return Ok(true);
    }
    let mut part_of = vec![usize::MAX; g.n()];
    for (i, p) in parts.iter().enumerate() {
        for v in p.iter() {
            part_of[v] = i;
        }
    }
    let cross: Vec<(usize, usize)> = g.edges().filter(|&(u, v)| part_of[u] != part_of[v]).collect();
    let budget = m * m - m;
    let mut chosen = Vec::new();
    let mut deg = vec![0u8; g.n()];
    Ok(search_subsets(parts, &cross, 0, budget, &mut chosen, &mut deg))
}

fn search_subsets(
    parts: &[VertexSet],
    cross: &[(usize, usize)],
    from: usize,
    budget: usize,
    chosen: &mut Vec<(usize, usize)>,
    deg: &mut [u8],
) -> bool {
    if !chosen.is_empty() {
        if let Ok(p) = PathSystem::from_edges(chosen) {
            if is_connecting(&p, parts) {
                return true;
            }
        }
    }
    if chosen.len() == budget {
        return false;
    }
    for i in from..cross.len() {
        let (u, v) = cross[i];
        if deg[u] == 2 || deg[v] == 2 {
            continue;
        }
        deg[u] += 1;
        deg[v] += 1;
        chosen.push((u, v));
        let found = search_subsets(parts, cross, i + 1, budget, chosen, deg);
        chosen.pop();
        deg[u] -= 1;
        deg[v] -= 1;
        if found {
            return true;
        }
    }
    false
}

/// Parameters of a clustering check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringParams {
    pub zeta: Param,
    pub delta: Param,
    pub gamma: Param,
    pub beta: Param,
    pub eta: Param,
}

impl ClusteringParams {
    /// Chain `delta = f*(alpha)`, `zeta = f*(nu)`, `gamma = f*(zeta)`,
    /// `beta = f*(gamma)`, `eta = f*(beta)` with `f*(x) = min(x²/4, f(x))`.
    pub fn derive(alpha: Param, nu: Param, f_scale: f64, f_exponent: f64) -> Result<ClusteringParams> {
        let f_star = |x: Param| -> Result<Param> {
            let quarter_square = Param::from_log2(2.0 * x.log2() - 2.0)?;
            let f = Param::from_log2(f_scale.log2() + f_exponent * x.log2())?;
            Ok(quarter_square.min(f))
        };
        let delta = f_star(alpha)?;
        let zeta = f_star(nu)?;
        let gamma = f_star(zeta)?;
        let beta = f_star(gamma)?;
        let eta = f_star(beta)?;
        Ok(ClusteringParams { zeta, delta, gamma, beta, eta })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "detail")]
pub enum CheckOutcome {
    Pass,
    Fail(String),
    Refused(String),
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CheckOutcome::Pass)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BipartiteStatus {
    AlmostBipartite { stray_edges: usize },
    FarFromBipartite { min_stray_edges: usize },
    Neither { min_stray_edges: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringReport {
    pub crossing_edges: CheckOutcome,
    pub min_degree: Vec<CheckOutcome>,
    pub sparse_cuts: Vec<CheckOutcome>,
    pub bipartite: Vec<std::result::Result<BipartiteStatus, String>>,
}

impl ClusteringReport {
    pub fn all_passed(&self) -> bool {
        self.crossing_edges.passed()
            && self.min_degree.iter().all(CheckOutcome::passed)
            && self.sparse_cuts.iter().all(CheckOutcome::passed)
            && self.bipartite.iter().all(|b| matches!(b, Ok(s) if !matches!(s, BipartiteStatus::Neither { .. })))
    }
}

/// Clustering conditions: few crossing edges, per-part minimum degree,
/// no sparse cut inside any part, and each part either nearly bipartite or far
/// from it. Exponential checks are refused per part above `cap`.
pub fn check_clustering(
    g: &Graph,
    parts: &[(VertexSet, Option<Bipartition>)],
    params: &ClusteringParams,
    cap: usize,
) -> ClusteringReport {
    let n = g.n() as u128;
    let mut inside_total = 0;
    let mut min_degree = Vec::new();
    let mut sparse_cuts = Vec::new();
    let mut bipartite = Vec::new();
    for (part, bp) in parts {
        let mask = part.mask(g.n());
        inside_total += edges_inside(g, &mask);
        let low = part.iter().find(|&v| params.delta.count_lt_times(g.degree_into(v, &mask) as u128, n));
        min_degree.push(match low {
            Some(v) => CheckOutcome::Fail(format!("vertex {v} has {} neighbours in its part", g.degree_into(v, &mask))),
            None => CheckOutcome::Pass,
        });
        if part.len() > cap {
            sparse_cuts.push(CheckOutcome::Refused(format!("part of size {} above cap {cap}", part.len())));
            bipartite.push(Err(format!("part of size {} above cap {cap}", part.len())));
            continue;
        }
        let sub = induced_subgraph(g, part);
        let h = &sub.graph;
        let k = h.n();
        let adj: Vec<u32> = (0..k).map(|v| h.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w)).collect();
        let inner = |x: u32| -> usize {
            (0..k).filter(|v| x >> v & 1 == 1).map(|v| (adj[v] & x).count_ones() as usize).sum::<usize>() / 2
        };
        let mut sparse = None;
        let mut min_stray = usize::MAX;
        // masks containing vertex 0 enumerate each unordered split once
        for x in (1u32..(1u32 << k)).step_by(2) {
            let y = !x & ((1u32 << k) - 1);
            let stray = inner(x) + inner(y);
            min_stray = min_stray.min(stray);
            if y == 0 {
                continue;
            }
            let cross: usize = (0..k).filter(|v| x >> v & 1 == 1).map(|v| (adj[v] & y).count_ones() as usize).sum();
            let xy = x.count_ones() as u128 * y.count_ones() as u128;
            if sparse.is_none() && params.zeta.count_le_times(cross as u128, xy) {
                sparse = Some(x);
            }
        }
        sparse_cuts.push(match sparse {
            Some(x) => CheckOutcome::Fail(format!(
                "sparse cut {:?}",
                sub.lift(&(0..k).filter(|v| x >> v & 1 == 1).collect::<VertexSet>()).as_slice()
            )),
            None => CheckOutcome::Pass,
        });
        let given = bp.as_ref().map(|bp| {
            let (a, b) = (bp.a.mask(g.n()), bp.b.mask(g.n()));
            edges_inside(g, &a) + edges_inside(g, &b)
        });
        let n2 = n * n;
        let status = match given {
            Some(s) if params.beta.count_le_times(s as u128, n2) => BipartiteStatus::AlmostBipartite { stray_edges: s },
            _ if k == 0 => BipartiteStatus::AlmostBipartite { stray_edges: 0 },
            _ if params.beta.count_le_times(min_stray as u128, n2) => {
                BipartiteStatus::AlmostBipartite { stray_edges: min_stray }
            }
            _ if !params.gamma.count_lt_times(min_stray as u128, n2) => {
                BipartiteStatus::FarFromBipartite { min_stray_edges: min_stray }
            }
            _ => BipartiteStatus::Neither { min_stray_edges: min_stray },
        };
        bipartite.push(Ok(status));
    }
    let crossing = g.edge_count() - inside_total;
    let crossing_edges = if params.eta.count_le_times(crossing as u128, n * n) {
        CheckOutcome::Pass
    } else {
        CheckOutcome::Fail(format!("{crossing} edges run between parts"))
    };
    ClusteringReport { crossing_edges, min_degree, sparse_cuts, bipartite }
}

/// Number of edges between two disjoint vertex sets.
pub fn count_between(g: &Graph, s: &VertexSet, t: &VertexSet) -> usize {
    edges_between(g, &s.mask(g.n()), &t.mask(g.n()))
}
