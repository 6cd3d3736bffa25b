use super::{algorithm4, BipartitePart, HierarchyConfig, PartOutcome, PartitionParams, RobustPartition};
use crate::error::{contract, Error, Result};
use crate::graph::{Bipartition, Graph, VertexSet};
use crate::param::Param;

/// Moves vertices to the part holding most of their neighbours until no move
/// strictly lowers the number of crossing edges. Vertices with many outside
/// neighbours go first, then everyone else. Emptied parts stay in place.
pub fn redistribute_components(g: &Graph, parts: &[VertexSet], rho: Param) -> Result<Vec<VertexSet>> {
    Ok(redistribute_with_moves(g, parts, rho)?.0)
}

/// [`redistribute_components`] plus the number of moves made.
pub fn redistribute_with_moves(g: &Graph, parts: &[VertexSet], rho: Param) -> Result<(Vec<VertexSet>, usize)> {
    let n = g.n();
    let m = parts.len();
    let mut owner = vec![usize::MAX; n];
    for (i, p) in parts.iter().enumerate() {
        for v in p.iter() {
            if v >= n || owner[v] != usize::MAX {
                return contract(format!("vertex {v} is out of range or in two parts"));
            }
            owner[v] = i;
        }
    }
    if owner.contains(&usize::MAX) {
        return contract("parts do not cover the vertex set");
    }
    // deg[x * m + j] = d_{U_j}(x)
    let mut deg = vec![0usize; n * m];
    for x in 0..n {
        for &w in g.neighbors(x) {
            deg[x * m + owner[w]] += 1;
        }
    }
    let n2 = (n as u128) * (n as u128);
    let movable: Vec<bool> = (0..n)
        .map(|x| {
            let out = (g.degree(x) - deg[x * m + owner[x]]) as u128;
            !rho.count_lt_times(out * out, n2)
        })
        .collect();
    let mut moves = 0;
    for extended in [false, true] {
        loop {
            let mut moved = false;
            for x in 0..n {
                if !extended && !movable[x] {
                    continue;
                }
                let row = &deg[x * m..(x + 1) * m];
                let home = owner[x];
                let best = (0..m).max_by_key(|&j| (row[j], std::cmp::Reverse(j))).unwrap();
                if row[best] > row[home] {
                    owner[x] = best;
                    for &w in g.neighbors(x) {
                        deg[w * m + home] -= 1;
                        deg[w * m + best] += 1;
                    }
                    moves += 1;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
    }
    let mut out = vec![Vec::new(); m];
    for (x, &o) in owner.iter().enumerate() {
        out[o].push(x);
    }
    Ok((out.into_iter().map(VertexSet::from_sorted).collect(), moves))
}

/// Swaps vertices of `u` between sides until each has at least as many
/// neighbours across as on its own side. Vertices with many neighbours
/// outside the opposite side are handled first.
pub fn rebalance_bipartition(g: &Graph, u: &VertexSet, bp: &Bipartition, rho: Param) -> Result<Bipartition> {
    let n = g.n();
    if bp.a.union(&bp.b) != *u || !bp.a.is_disjoint(&bp.b) {
        return contract("bipartition does not split the part");
    }
    // side[v]: 1 for A, -1 for B, 0 outside u
    let mut side = vec![0i8; n];
    bp.a.iter().for_each(|v| side[v] = 1);
    bp.b.iter().for_each(|v| side[v] = -1);
    let count = |side: &[i8], x: usize| {
        let mut same = 0;
        let mut across = 0;
        for &w in g.neighbors(x) {
            if side[w] == side[x] {
                same += 1;
            } else if side[w] == -side[x] {
                across += 1;
            }
        }
        (same, across)
    };
    let n2 = (n as u128) * (n as u128);
    let first: Vec<bool> = u
        .iter()
        .map(|x| {
            let (_, across) = count(&side, x);
            let away = (g.degree(x) - across) as u128;
            !rho.count_lt_times(away * away, 4 * n2)
        })
        .collect();
    for extended in [false, true] {
        loop {
            let mut moved = false;
            for (i, x) in u.iter().enumerate() {
                if !extended && !first[i] {
                    continue;
                }
                let (same, across) = count(&side, x);
                if same > across {
                    side[x] = -side[x];
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
    }
    Ok(Bipartition {
        a: u.iter().filter(|&v| side[v] == 1).collect(),
        b: u.iter().filter(|&v| side[v] == -1).collect(),
    })
}

#[derive(Clone)]
enum Tag {
    Open,
    Expander,
    Bipartite(Bipartition),
}

/// Iterated refinement into robust components, then redistribution and
/// rebalancing so the degree-majority conditions hold exactly.
pub fn decompose(g: &Graph, cfg: &HierarchyConfig) -> Result<RobustPartition> {
    let n = g.n();
    let Some(d) = g.regular_degree() else {
        return contract("decompose needs a regular graph");
    };
    if n == 0 {
        return contract("decompose needs a non-empty graph");
    }
    if cfg.alpha.count_lt_times(d as u128, n as u128) {
        return contract(format!("degree {d} is below alpha n = {} * {n}", cfg.alpha));
    }
    let t = cfg.t();
    let mut parts: Vec<(VertexSet, Tag)> = vec![(VertexSet::full(n), Tag::Open)];
    let mut settled_round = None;
    for round in 1..t {
        let step = cfg.step(round);
        let mut split = None;
        for (idx, (part, tag)) in parts.iter_mut().enumerate() {
            match algorithm4(g, part, &step)? {
                PartOutcome::Split { first, second } => {
                    split = Some((idx, first, second));
                    break;
                }
                PartOutcome::Expander => *tag = Tag::Expander,
                PartOutcome::BipartiteExpander { bipartition } => *tag = Tag::Bipartite(bipartition),
                other => return Err(Error::Diagnostic(format!("unexpected outcome {other:?} from the dispatcher"))),
            }
        }
        match split {
            Some((idx, first, second)) => {
                parts.splice(idx..=idx, [(first, Tag::Open), (second, Tag::Open)]);
            }
            None => {
                settled_round = Some(round);
                break;
            }
        }
    }
    let Some(h) = settled_round else {
        return Err(Error::Diagnostic(format!("refinement did not settle within {} rounds", t.saturating_sub(1))));
    };
    let (rho_h, nu_h) = cfg.chain[h - 1];

    let sets: Vec<VertexSet> = parts.iter().map(|(s, _)| s.clone()).collect();
    let moved = redistribute_components(g, &sets, rho_h)?;
    let rebalance_level = Param::from_log2(3f64.log2() + rho_h.log2() / 3.0)?;
    let mut expander_parts = Vec::new();
    let mut bipartite_parts = Vec::new();
    for ((_, tag), part) in parts.iter().zip(moved) {
        if part.is_empty() {
            continue;
        }
        match tag {
            Tag::Bipartite(bp) => {
                let a = bp.a.intersection(&part);
                let b = part.difference(&a);
                let fixed = rebalance_bipartition(g, &part, &Bipartition { a, b }, rebalance_level)?;
                bipartite_parts.push(BipartitePart { part, a: fixed.a, b: fixed.b });
            }
            _ => expander_parts.push(part),
        }
    }
    let rho = Param::from_log2(1.5 * 3f64.log2() + rho_h.log2() / 6.0)?;
    let nu = Param::from_log2(nu_h.log2() - 2.0)?;
    let params = PartitionParams { rho, nu, tau: cfg.tau, k: expander_parts.len(), l: bipartite_parts.len() };
    Ok(RobustPartition { expander_parts, bipartite_parts, params })
}
