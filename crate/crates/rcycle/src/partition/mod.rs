//! Robust partitions: peeling algorithms, the decomposition driver and the
//! integer checks on its output.

mod algorithms;
mod decompose;

pub use algorithms::{
    algorithm1, algorithm2, algorithm3, algorithm4, cheeger_peel, recognize_robust_expander, Peeling, Recognition,
};
pub use decompose::{decompose, rebalance_bipartition, redistribute_components, redistribute_with_moves};

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::graph::{edges_between, edges_inside, Bipartition, Graph, VertexSet};
use crate::param::Param;
use crate::spectral::SolverOptions;

/// Tunables for the surrogate parameter hierarchy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyOptions {
    pub f_scale: f64,
    pub f_exponent: f64,
    pub n0: usize,
    /// Defaults to `alpha / 4`.
    pub tau: Option<f64>,
    pub phi: Option<f64>,
    pub beta_stop: Option<f64>,
    pub solver: SolverOptions,
    /// Exhaustive fallback size for the recognizer.
    pub brute_cap: usize,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        HierarchyOptions {
            f_scale: 0.01,
            f_exponent: 3.0,
            n0: 24,
            tau: None,
            phi: None,
            beta_stop: None,
            solver: SolverOptions::default(),
            brute_cap: 18,
        }
    }
}

/// Explicit parameter chain `rho_1 < nu_1 < ... < rho_t < nu_t < tau' < tau <= alpha`,
/// generated top-down by `f(x) = f_scale * x^f_exponent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyConfig {
    pub alpha: Param,
    pub tau: Param,
    pub tau_prime: Param,
    /// `(rho_i, nu_i)` for `i = 1..=t`.
    pub chain: Vec<(Param, Param)>,
    pub phi: Option<Param>,
    pub beta_stop: Option<Param>,
    pub f_scale: f64,
    pub f_exponent: f64,
    pub n0: usize,
    pub brute_cap: usize,
    pub solver: SolverOptions,
}

impl HierarchyConfig {
    pub fn new(alpha: f64, opts: &HierarchyOptions) -> Result<HierarchyConfig> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return contract(format!("alpha must lie in (0, 1], got {alpha}"));
        }
        if !(opts.f_scale > 0.0 && opts.f_scale <= 1.0 && opts.f_exponent >= 1.0) {
            return contract("f needs 0 < f_scale <= 1 and f_exponent >= 1 to shrink its argument");
        }
        let alpha_p = Param::new(alpha)?;
        let tau = Param::new(opts.tau.unwrap_or(alpha / 4.0))?;
        if alpha_p.lt(&tau) {
            return contract("tau must not exceed alpha");
        }
        let f = |x: Param| Param::from_log2(opts.f_scale.log2() + opts.f_exponent * x.log2());
        let t = (2.0 / alpha).ceil() as usize;
        let tau_prime = f(tau)?;
        let mut chain = Vec::with_capacity(t);
        let mut top = tau_prime;
        for _ in 0..t {
            let nu = f(top).map_err(|_| underflow(alpha))?;
            let rho = f(nu).map_err(|_| underflow(alpha))?;
            chain.push((rho, nu));
            top = rho;
        }
        chain.reverse();
        let mut prev: Option<Param> = None;
        for &(rho, nu) in &chain {
            if prev.is_some_and(|p| !p.lt(&rho)) || !rho.lt(&nu) {
                return Err(underflow(alpha));
            }
            prev = Some(nu);
        }
        let phi = opts.phi.map(Param::new).transpose()?;
        let beta_stop = opts.beta_stop.map(Param::new).transpose()?;
        Ok(HierarchyConfig {
            alpha: alpha_p,
            tau,
            tau_prime,
            chain,
            phi,
            beta_stop,
            f_scale: opts.f_scale,
            f_exponent: opts.f_exponent,
            n0: opts.n0,
            brute_cap: opts.brute_cap,
            solver: opts.solver,
        })
    }

    pub fn t(&self) -> usize {
        self.chain.len()
    }

    pub fn f(&self, x: Param) -> Result<Param> {
        Param::from_log2(self.f_scale.log2() + self.f_exponent * x.log2())
    }

    /// Parameters of refinement round `i` (1-based): `(rho_i, nu_i, rho_{i+1})`.
    pub fn step(&self, i: usize) -> StepParams {
        assert!(i >= 1 && i <= self.t(), "round {i} outside 1..={}", self.t());
        let (rho, nu) = self.chain[i - 1];
        let rho_prime = self.chain.get(i).map_or(self.tau_prime, |c| c.0);
        StepParams {
            alpha: self.alpha,
            rho,
            nu,
            rho_prime,
            tau: self.tau_prime,
            phi: self.phi,
            beta: self.beta_stop,
            solver: self.solver,
        }
    }
}

fn underflow(alpha: f64) -> Error {
    Error::Diagnostic(format!("parameter chain underflows for alpha = {alpha}; raise alpha or f_scale"))
}

/// Parameters of one call to the peeling algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    pub alpha: Param,
    pub rho: Param,
    pub nu: Param,
    pub rho_prime: Param,
    pub tau: Param,
    /// Conductance stop level; geometric mean of `nu` and `rho_prime` when unset.
    pub phi: Option<Param>,
    /// Bipartiteness stop level; geometric mean of `rho` and `rho_prime` when unset.
    pub beta: Option<Param>,
    pub solver: SolverOptions,
}

impl StepParams {
    /// Standalone parameters, mostly for tests and the CLI.
    pub fn new(alpha: f64, rho: f64, nu: f64, rho_prime: f64, tau: f64) -> Result<StepParams> {
        Ok(StepParams {
            alpha: Param::new(alpha)?,
            rho: Param::new(rho)?,
            nu: Param::new(nu)?,
            rho_prime: Param::new(rho_prime)?,
            tau: Param::new(tau)?,
            phi: None,
            beta: None,
            solver: SolverOptions::default(),
        })
    }

    pub fn phi(&self) -> Result<Param> {
        self.phi.map_or_else(|| Param::between(self.nu, self.rho_prime, 0.5), Ok)
    }

    pub fn beta(&self) -> Result<Param> {
        self.beta.map_or_else(|| Param::between(self.rho, self.rho_prime, 0.5), Ok)
    }

    pub fn with_levels(&self, rho: Param, nu: Param, rho_prime: Param) -> StepParams {
        StepParams { rho, nu, rho_prime, ..*self }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum PartOutcome {
    Expander,
    BipartiteExpander { bipartition: Bipartition },
    Split { first: VertexSet, second: VertexSet },
    NotCloseBipartite,
    CloseBipartite { bipartition: Bipartition },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartitePart {
    pub part: VertexSet,
    pub a: VertexSet,
    pub b: VertexSet,
}

impl BipartitePart {
    pub fn bipartition(&self) -> Bipartition {
        Bipartition { a: self.a.clone(), b: self.b.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionParams {
    pub rho: Param,
    pub nu: Param,
    pub tau: Param,
    pub k: usize,
    pub l: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustPartition {
    pub expander_parts: Vec<VertexSet>,
    pub bipartite_parts: Vec<BipartitePart>,
    pub params: PartitionParams,
}

impl RobustPartition {
    /// Expander parts first, then bipartite parts; path systems index parts this way.
    pub fn parts(&self) -> Vec<VertexSet> {
        self.expander_parts.iter().cloned().chain(self.bipartite_parts.iter().map(|b| b.part.clone())).collect()
    }

    pub fn part_count(&self) -> usize {
        self.expander_parts.len() + self.bipartite_parts.len()
    }

    pub fn bipartitions(&self) -> Vec<Bipartition> {
        self.bipartite_parts.iter().map(BipartitePart::bipartition).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.parts().iter().map(VertexSet::len).collect()
    }
}

/// `|s| >= sqrt(rho) n` and `e(s, V \ s) <= rho n²`.
pub fn is_rho_component(g: &Graph, s: &VertexSet, rho: Param) -> bool {
    let n = g.n() as u128;
    let mask = s.mask(g.n());
    let boundary: usize = s.iter().map(|v| g.degree(v) - g.degree_into(v, &mask)).sum();
    let size = s.len() as u128;
    !rho.count_lt_times(size * size, n * n) && rho.count_le_times(boundary as u128, n * n)
}

/// Sides at least `sqrt(rho) n`, differing by at most `rho n`, with at most
/// `rho n²` edges inside a side or leaving the union.
pub fn is_rho_close_bipartite(g: &Graph, bp: &Bipartition, rho: Param) -> bool {
    let n = g.n() as u128;
    let (a, b) = (bp.a.len() as u128, bp.b.len() as u128);
    let ma = bp.a.mask(g.n());
    let mb = bp.b.mask(g.n());
    let outside: Vec<bool> = (0..g.n()).map(|v| !ma[v] && !mb[v]).collect();
    let stray = edges_inside(g, &ma) + edges_inside(g, &mb) + edges_between(g, &ma, &outside) + edges_between(g, &mb, &outside);
    bp.a.is_disjoint(&bp.b)
        && !rho.count_lt_times(a * a, n * n)
        && !rho.count_lt_times(b * b, n * n)
        && rho.count_le_times(a.abs_diff(b), n)
        && rho.count_le_times(stray as u128, n * n)
}

/// Outcome of the integer checks on a robust partition.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionCheck {
    pub d1: bool,
    pub d4: bool,
    pub d5: bool,
    pub d6: bool,
    pub d7: bool,
    pub failures: Vec<String>,
}

impl PartitionCheck {
    pub fn ok(&self) -> bool {
        self.d1 && self.d4 && self.d5 && self.d6 && self.d7
    }
}

/// Checks the covering, degree-majority, part-count and near-regularity
/// conditions exactly.
pub fn check_robust_partition(g: &Graph, rp: &RobustPartition) -> PartitionCheck {
    let mut out = PartitionCheck { d1: true, d4: true, d5: true, d6: true, d7: true, failures: Vec::new() };
    let n = g.n();
    let Some(d) = g.regular_degree() else {
        out.failures.push("graph is not regular".into());
        return PartitionCheck { failures: out.failures, ..Default::default() };
    };
    let parts = rp.parts();
    let m = parts.len();
    let mut owner = vec![usize::MAX; n];
    for (i, p) in parts.iter().enumerate() {
        for v in p.iter() {
            if v >= n || owner[v] != usize::MAX {
                out.d1 = false;
                out.failures.push(format!("vertex {v} is out of range or in two parts"));
            } else {
                owner[v] = i;
            }
        }
    }
    if let Some(v) = owner.iter().position(|&o| o == usize::MAX) {
        out.d1 = false;
        out.failures.push(format!("vertex {v} is in no part"));
    }
    for bp in &rp.bipartite_parts {
        if !bp.a.is_disjoint(&bp.b) || bp.a.union(&bp.b) != bp.part {
            out.d1 = false;
            out.failures.push("bipartition does not split its part".into());
        }
    }
    if rp.params.k != rp.expander_parts.len() || rp.params.l != rp.bipartite_parts.len() {
        out.d1 = false;
        out.failures.push("k or l disagrees with the part lists".into());
    }
    if !out.d1 {
        return out;
    }

    let mut counts = vec![0usize; m];
    let rho = rp.params.rho;
    let mut low = vec![0usize; m];
    for x in 0..n {
        counts.iter_mut().for_each(|c| *c = 0);
        for &w in g.neighbors(x) {
            counts[owner[w]] += 1;
        }
        let own = counts[owner[x]];
        if let Some(j) = (0..m).find(|&j| counts[j] > own) {
            if out.d4 {
                out.failures.push(format!("vertex {x} has {} neighbours in part {j} but {own} at home", counts[j]));
            }
            out.d4 = false;
        }
        // d_X(x) < D - rho n
        if !rho.count_le_times((d - own) as u128, n as u128) {
            low[owner[x]] += 1;
        }
    }
    for (i, &c) in low.iter().enumerate() {
        if !rho.count_le_times(c as u128, n as u128) {
            out.d7 = false;
            out.failures.push(format!("part {i} has {c} vertices of low inner degree"));
        }
    }
    for bp in &rp.bipartite_parts {
        let ma = bp.a.mask(n);
        let mb = bp.b.mask(n);
        let bad = bp.a.iter().find(|&u| g.degree_into(u, &mb) < g.degree_into(u, &ma)).or_else(|| {
            bp.b.iter().find(|&v| g.degree_into(v, &ma) < g.degree_into(v, &mb))
        });
        if let Some(v) = bad {
            out.d5 = false;
            out.failures.push(format!("vertex {v} has more neighbours on its own side"));
        }
    }
    // k + 2l <= floor((1 + rho^{1/3}) n / D)  iff  ((k + 2l) D - n)^3 <= rho n^3
    let weight = (rp.params.k + 2 * rp.params.l) * d;
    if weight > n {
        let excess = (weight - n) as u128;
        let n3 = (n as u128).pow(3);
        if !rho.count_le_times(excess.pow(3), n3) {
            out.d6 = false;
            out.failures.push(format!("k + 2l = {} is too large", rp.params.k + 2 * rp.params.l));
        }
    }
    out
}
