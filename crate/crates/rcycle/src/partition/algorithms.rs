use serde::{Deserialize, Serialize};

use super::{HierarchyConfig, PartOutcome, StepParams};
use crate::error::{Error, Result};
use crate::graph::{induced_subgraph, Bipartition, Graph, VertexSet};
use crate::oracles::brute_is_robust_expander;
use crate::param::Param;
use crate::spectral::{bipartite_sweep, cheeger_sweep};

/// Trace of the conductance peeling shared by the expander and bipartite tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peeling {
    /// Vertices of low degree inside the part, removed up front.
    pub low: VertexSet,
    /// Everything removed when the loop stopped.
    pub removed: VertexSet,
    pub rounds: usize,
    /// Conductance of the last sweep side examined, if any.
    pub last_conductance: Option<f64>,
    /// `e(removed, u \ removed)`.
    pub boundary: usize,
    pub low_volume: usize,
    pub removed_volume: usize,
}

/// Smaller side of a cut of `rest`, ties going to the side holding the
/// smallest vertex.
fn smaller_side(local: VertexSet, size: usize) -> VertexSet {
    let other_len = size - local.len();
    if local.len() < other_len || (local.len() == other_len && local.contains(0)) {
        local
    } else {
        VertexSet::full(size).difference(&local)
    }
}

/// Strips low-degree vertices, then repeatedly removes the smaller side of a
/// sweep cut until the cut conductance exceeds `phi` or a third of `u` is gone.
pub fn cheeger_peel(g: &Graph, u: &VertexSet, p: &StepParams) -> Result<Peeling> {
    let n = g.n();
    let phi = p.phi()?;
    let in_u = u.mask(n);
    // 2 d_U(v) <= alpha n
    let low: VertexSet =
        u.iter().filter(|&v| p.alpha.count_le_times(2 * g.degree_into(v, &in_u) as u128, n as u128)).collect();
    let mut removed = low.mask(n);
    let mut removed_count = low.len();
    let mut rounds = 0;
    let mut last_conductance = None;
    loop {
        if 3 * removed_count >= u.len() {
            break;
        }
        let rest: VertexSet = u.iter().filter(|&v| !removed[v]).collect();
        if rest.len() < 2 {
            break;
        }
        let sub = induced_subgraph(g, &rest);
        let comps = sub.graph.components();
        let (side, num, den) = if comps.len() > 1 {
            let smallest = comps.iter().min_by_key(|c| (c.len(), c.first())).unwrap().clone();
            (smallest, 0, 1)
        } else {
            let cut = cheeger_sweep(&sub.graph, &p.solver)?;
            (cut.set, cut.boundary, cut.min_volume)
        };
        last_conductance = Some(num as f64 / den as f64);
        if !phi.count_le_times(num as u128, den as u128) {
            break;
        }
        let side = smaller_side(side, rest.len());
        for v in sub.lift(&side).iter() {
            removed[v] = true;
        }
        removed_count += side.len();
        rounds += 1;
    }
    let removed_set = VertexSet::from_mask(&removed);
    let boundary = removed_set.iter().map(|v| g.neighbors(v).iter().filter(|&&w| in_u[w] && !removed[w]).count()).sum();
    Ok(Peeling {
        low_volume: low.iter().map(|v| g.degree(v)).sum(),
        removed_volume: removed_set.iter().map(|v| g.degree(v)).sum(),
        low,
        removed: removed_set,
        rounds,
        last_conductance,
        boundary,
    })
}

/// Split when the peeled set exceeds a quarter of `rho' |u|`.
fn split_or(g: &Graph, u: &VertexSet, p: &StepParams, otherwise: PartOutcome) -> Result<PartOutcome> {
    let peel = cheeger_peel(g, u, p)?;
    let size = peel.removed.len();
    if size == u.len() {
        return Err(Error::Diagnostic("peeling consumed the whole part".into()));
    }
    // 4 |U_t| > rho' |U|
    if !p.rho_prime.count_le_times(4 * size as u128, u.len() as u128) {
        let rest = u.difference(&peel.removed);
        return Ok(PartOutcome::Split { first: peel.removed, second: rest });
    }
    Ok(otherwise)
}

/// Expander test: `Expander` or `Split`.
pub fn algorithm1(g: &Graph, u: &VertexSet, p: &StepParams) -> Result<PartOutcome> {
    split_or(g, u, p, PartOutcome::Expander)
}

/// Bipartite-closeness test: `CloseBipartite` or `NotCloseBipartite`.
pub fn algorithm2(g: &Graph, u: &VertexSet, p: &StepParams) -> Result<PartOutcome> {
    let n = g.n();
    let beta = p.beta()?;
    let mut removed = vec![false; n];
    let mut blocks: Vec<(VertexSet, VertexSet)> = Vec::new();
    let rest = loop {
        let rest: VertexSet = u.iter().filter(|&v| !removed[v]).collect();
        // |G_i| <= rho' n
        if p.rho_prime.count_le_times(rest.len() as u128, n as u128) {
            break rest;
        }
        let sub = induced_subgraph(g, &rest);
        let isolated: VertexSet = (0..rest.len()).filter(|&v| sub.graph.degree(v) == 0).collect();
        let (a, b) = if !isolated.is_empty() {
            (sub.lift(&isolated), VertexSet::default())
        } else {
            let lab = bipartite_sweep(&sub.graph, &p.solver)?;
            // beta_i >= beta
            if !beta.count_lt_times(lab.penalty as u128, lab.labeled_volume as u128) {
                return Ok(PartOutcome::NotCloseBipartite);
            }
            let a: VertexSet = (0..rest.len()).filter(|&v| lab.labels[v] == 1).collect();
            let b: VertexSet = (0..rest.len()).filter(|&v| lab.labels[v] == -1).collect();
            (sub.lift(&a), sub.lift(&b))
        };
        for v in a.iter().chain(b.iter()) {
            removed[v] = true;
        }
        blocks.push((a, b));
    };

    let mut diff: i64 = blocks.iter().map(|(a, b)| a.len() as i64 - b.len() as i64).sum();
    let mut flipped = vec![false; blocks.len()];
    loop {
        let mut best: Option<(usize, i64)> = None;
        for (j, (a, b)) in blocks.iter().enumerate() {
            let sign = if flipped[j] { -1 } else { 1 };
            let after = diff - 2 * sign * (a.len() as i64 - b.len() as i64);
            if after.abs() < diff.abs() && best.is_none_or(|(_, bst)| after.abs() < bst.abs()) {
                best = Some((j, after));
            }
        }
        match best {
            Some((j, after)) => {
                flipped[j] = !flipped[j];
                diff = after;
            }
            None => break,
        }
    }
    let mut side_a = Vec::new();
    let mut side_b = Vec::new();
    for ((a, b), &f) in blocks.iter().zip(&flipped) {
        let (x, y) = if f { (b, a) } else { (a, b) };
        side_a.extend(x.iter());
        side_b.extend(y.iter());
    }
    for v in rest.iter() {
        if diff > 0 {
            side_b.push(v);
            diff -= 1;
        } else {
            side_a.push(v);
            diff += 1;
        }
    }
    Ok(PartOutcome::CloseBipartite { bipartition: Bipartition { a: VertexSet::new(side_a), b: VertexSet::new(side_b) } })
}

/// Bipartite expander test on a part close to bipartite.
pub fn algorithm3(g: &Graph, u: &VertexSet, bp: &Bipartition, p: &StepParams) -> Result<PartOutcome> {
    split_or(g, u, p, PartOutcome::BipartiteExpander { bipartition: bp.clone() })
}

/// Dispatch: closeness first, then the matching expander test. Internal levels
/// sit geometrically between `nu` and `rho'`.
pub fn algorithm4(g: &Graph, u: &VertexSet, p: &StepParams) -> Result<PartOutcome> {
    let rho1 = Param::between(p.nu, p.rho_prime, 0.25)?;
    let rho2 = Param::between(p.nu, p.rho_prime, 0.5)?;
    let nu2 = Param::between(p.nu, p.rho_prime, 0.75)?;
    match algorithm2(g, u, &p.with_levels(rho1, p.nu, rho2))? {
        PartOutcome::CloseBipartite { bipartition } => algorithm3(g, u, &bipartition, &p.with_levels(rho2, nu2, p.rho_prime)),
        _ => algorithm1(g, u, &p.with_levels(p.rho, p.nu, rho1)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "result")]
pub enum Recognition {
    IsRobustExpander { exhaustive: bool },
    NotRobustExpander { witness: VertexSet, exhaustive: bool },
}

/// Decides between "robust `(nu, tau)`-expander" and "not a robust
/// `(nu', tau)`-expander". Small graphs are checked exhaustively against `nu`.
pub fn recognize_robust_expander(
    g: &Graph,
    nu: Param,
    nu_prime: Param,
    tau: Param,
    cfg: &HierarchyConfig,
) -> Result<Recognition> {
    let n = g.n();
    let (n0, brute_cap) = (cfg.n0, cfg.brute_cap);
    let exhaustive = |cap: usize| -> Result<Recognition> {
        let (ok, witness) = brute_is_robust_expander(g, nu, tau, None, cap)?;
        Ok(match witness {
            Some(w) if !ok => Recognition::NotRobustExpander { witness: w, exhaustive: true },
            _ => Recognition::IsRobustExpander { exhaustive: true },
        })
    };
    if n <= n0 {
        return exhaustive(n0.max(brute_cap));
    }
    let rho = cfg.f(nu)?;
    let rho1 = Param::between(nu, nu_prime, 1.0 / 3.0)?;
    let rho2 = Param::between(nu, nu_prime, 2.0 / 3.0)?;
    let all = VertexSet::full(n);
    let base = StepParams {
        alpha: cfg.alpha,
        rho,
        nu,
        rho_prime: nu_prime,
        tau,
        phi: cfg.phi,
        beta: cfg.beta_stop,
        solver: cfg.solver,
    };
    let witness = match algorithm2(g, &all, &base.with_levels(rho1, nu, rho2))? {
        PartOutcome::CloseBipartite { bipartition } => {
            if bipartition.a.len() <= bipartition.b.len() {
                bipartition.b
            } else {
                bipartition.a
            }
        }
        _ => match algorithm1(g, &all, &base.with_levels(rho, nu, rho1))? {
            PartOutcome::Split { first, .. } => first,
            _ => return Ok(Recognition::IsRobustExpander { exhaustive: false }),
        },
    };
    let size = witness.len() as u128;
    let in_window = !tau.count_lt_times(size, n as u128) && !tau.count_lt_times(n as u128 - size, n as u128);
    if in_window {
        Ok(Recognition::NotRobustExpander { witness, exhaustive: false })
    } else if n <= brute_cap {
        exhaustive(brute_cap)
    } else {
        Err(Error::Diagnostic(format!("witness of size {size} falls outside the tau window")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{complete, complete_bipartite, crown, disjoint_union, gen_random_regular, two_cliques};
    use crate::oracles::brute_is_robust_expander;
    use crate::partition::{is_rho_close_bipartite, is_rho_component, HierarchyOptions};

    fn step(alpha: f64) -> StepParams {
        StepParams::new(alpha, 1e-6, 1e-4, 1e-2, 0.1).unwrap()
    }

    fn tiny() -> Param {
        Param::new(1e-4).unwrap()
    }

    #[test]
    fn algorithm1_splits_disjoint_cliques() {
        let g = two_cliques(10);
        match algorithm1(&g, &VertexSet::full(22), &step(0.4)).unwrap() {
            PartOutcome::Split { first, second } => {
                assert_eq!(first.len(), 11);
                assert!(is_rho_component(&g, &first, Param::new(0.01).unwrap()));
                assert!(is_rho_component(&g, &second, Param::new(0.01).unwrap()));
            }
            other => panic!("expected a split, got {other:?}"),
        }
    }

    #[test]
    fn algorithm1_accepts_expanders() {
        let k12 = complete(12);
        assert_eq!(algorithm1(&k12, &VertexSet::full(12), &step(0.9)).unwrap(), PartOutcome::Expander);
        assert!(brute_is_robust_expander(&k12, tiny(), Param::new(0.1).unwrap(), None, 18).unwrap().0);
        let g = gen_random_regular(16, 8, 3).unwrap();
        assert!(g.is_connected() && g.two_coloring().is_none());
        assert_eq!(algorithm1(&g, &VertexSet::full(16), &step(0.5)).unwrap(), PartOutcome::Expander);
    }

    #[test]
    fn peeling_volume_accounting() {
        let g = two_cliques(10);
        let p = step(0.4);
        let peel = cheeger_peel(&g, &VertexSet::full(22), &p).unwrap();
        let phi = p.phi().unwrap().value();
        assert!(peel.boundary as f64 <= peel.low_volume as f64 + phi * peel.removed_volume as f64);
    }

    #[test]
    fn algorithm2_examples() {
        let kb = complete_bipartite(6, 6);
        match algorithm2(&kb, &VertexSet::full(12), &step(0.5)).unwrap() {
            PartOutcome::CloseBipartite { bipartition } => {
                assert!(is_rho_close_bipartite(&kb, &bipartition, Param::new(0.01).unwrap()));
                let sides = [VertexSet::new((0..6).collect()), VertexSet::new((6..12).collect())];
                assert!(sides.contains(&bipartition.a) && sides.contains(&bipartition.b));
            }
            other => panic!("expected close, got {other:?}"),
        }
        assert_eq!(algorithm2(&complete(12), &VertexSet::full(12), &step(0.9)).unwrap(), PartOutcome::NotCloseBipartite);
        let two = disjoint_union(&[complete_bipartite(6, 6), complete_bipartite(6, 6)]);
        let first = VertexSet::new((0..12).collect());
        match algorithm2(&two, &first, &step(0.25)).unwrap() {
            PartOutcome::CloseBipartite { bipartition } => assert_eq!(bipartition.a.len(), 6),
            other => panic!("expected close, got {other:?}"),
        }
    }

    #[test]
    fn algorithm3_examples() {
        let bp = Bipartition::new(VertexSet::new((0..6).collect()), VertexSet::new((6..12).collect())).unwrap();
        for g in [complete_bipartite(6, 6), crown(6)] {
            let out = algorithm3(&g, &VertexSet::full(12), &bp, &step(0.4)).unwrap();
            assert_eq!(out, PartOutcome::BipartiteExpander { bipartition: bp.clone() });
            assert!(brute_is_robust_expander(&g, tiny(), Param::new(0.2).unwrap(), Some(&bp), 18).unwrap().0);
        }
        let two = disjoint_union(&[complete_bipartite(6, 6), complete_bipartite(6, 6)]);
        let a: VertexSet = (0..6).chain(12..18).collect();
        let b: VertexSet = (6..12).chain(18..24).collect();
        let bp = Bipartition::new(a, b).unwrap();
        assert!(matches!(
            algorithm3(&two, &VertexSet::full(24), &bp, &step(0.25)).unwrap(),
            PartOutcome::Split { .. }
        ));
    }

    #[test]
    fn algorithm4_examples() {
        assert_eq!(algorithm4(&complete(12), &VertexSet::full(12), &step(0.9)).unwrap(), PartOutcome::Expander);
        assert!(matches!(
            algorithm4(&complete_bipartite(6, 6), &VertexSet::full(12), &step(0.5)).unwrap(),
            PartOutcome::BipartiteExpander { .. }
        ));
        assert!(matches!(
            algorithm4(&two_cliques(10), &VertexSet::full(22), &step(0.4)).unwrap(),
            PartOutcome::Split { .. }
        ));
    }

    #[test]
    fn recognizer_examples() {
        let cfg = HierarchyConfig::new(0.4, &HierarchyOptions::default()).unwrap();
        let nu = Param::new(1e-3).unwrap();
        let nu_prime = Param::new(1e-2).unwrap();
        let tau = Param::new(0.1).unwrap();
        let r = recognize_robust_expander(&complete(12), nu, nu_prime, tau, &cfg).unwrap();
        assert_eq!(r, Recognition::IsRobustExpander { exhaustive: true });
        match recognize_robust_expander(&two_cliques(7), nu, nu_prime, tau, &cfg).unwrap() {
            Recognition::NotRobustExpander { witness, .. } => assert_eq!(witness.len(), 8),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            recognize_robust_expander(&complete_bipartite(6, 6), nu, nu_prime, tau, &cfg).unwrap(),
            Recognition::NotRobustExpander { .. }
        ));
        let small = HierarchyConfig::new(0.4, &HierarchyOptions { n0: 4, brute_cap: 4, ..Default::default() }).unwrap();
        match recognize_robust_expander(&two_cliques(15), nu, nu_prime, tau, &small).unwrap() {
            Recognition::NotRobustExpander { witness, exhaustive } => {
                assert!(!exhaustive);
                assert_eq!(witness.len(), 16);
            }
            other => panic!("{other:?}"),
        }
        let r = recognize_robust_expander(&complete(30), nu, nu_prime, tau, &small).unwrap();
        assert_eq!(r, Recognition::IsRobustExpander { exhaustive: false });
    }
}
