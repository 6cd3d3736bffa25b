//! Normalized Laplacian eigenpairs and the two sweep roundings built on them.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::graph::{Graph, VertexSet};

/// Largest size handled by a dense eigendecomposition.
const DENSE_LIMIT: usize = 64;
/// Largest Krylov basis kept before an explicit restart.
const MAX_BASIS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    SecondSmallest,
    Largest,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_iter: 10_000, seed: 0 }
    }
}

impl SolverOptions {
    /// Slack allowed on top of the Cheeger and Trevisan bounds.
    pub fn slack(&self) -> f64 {
        1e-9 + 10.0 * self.tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCut {
    pub set: VertexSet,
    pub conductance: f64,
    pub boundary: usize,
    pub min_volume: usize,
    pub lambda2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BipartiteLabeling {
    pub labels: Vec<i8>,
    pub beta: f64,
    pub penalty: usize,
    pub labeled_volume: usize,
    pub lambda_max: f64,
}

struct Operator<'a> {
    g: &'a Graph,
    inv_sqrt: Vec<f64>,
    /// Unit eigenvector for eigenvalue 0, `D^{1/2} 1` normalized.
    trivial: Vec<f64>,
}

impl<'a> Operator<'a> {
    fn new(g: &'a Graph) -> Result<Self> {
        if let Some(v) = (0..g.n()).find(|&v| g.degree(v) == 0) {
            return contract(format!("vertex {v} is isolated"));
        }
        let inv_sqrt = (0..g.n()).map(|v| 1.0 / (g.degree(v) as f64).sqrt()).collect();
        let mut trivial: Vec<f64> = (0..g.n()).map(|v| (g.degree(v) as f64).sqrt()).collect();
        normalize(&mut trivial);
        Ok(Operator { g, inv_sqrt, trivial })
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for v in 0..self.g.n() {
            let s: f64 = self.g.neighbors(v).iter().map(|&w| x[w] * self.inv_sqrt[w]).sum();
            out[v] = x[v] - s * self.inv_sqrt[v];
        }
    }

    /// Rayleigh quotient and residual norm of a unit vector.
    fn evaluate(&self, x: &[f64]) -> (f64, f64) {
        let mut lx = vec![0.0; x.len()];
        self.apply(x, &mut lx);
        let value = dot(x, &lx);
        let residual = lx.iter().zip(x).map(|(a, b)| (a - value * b).powi(2)).sum::<f64>().sqrt();
        (value, residual)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = dot(x, x).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|c| *c /= norm);
    }
    norm
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Flips the sign so the first clearly nonzero coordinate is positive.
fn fix_sign(x: &mut [f64]) {
    if let Some(&c) = x.iter().find(|c| c.abs() > 1e-12) {
        if c < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Index of the extreme eigenvalue; the first one wins ties.
fn pick(values: &[f64], which: Which) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        let better = match which {
            Which::SecondSmallest => v < values[best],
            Which::Largest => v > values[best],
        };
        if better {
            best = i;
        }
    }
    best
}

/// `second_smallest` deflates the eigenvector `D^{1/2} 1` of eigenvalue 0.
pub fn extreme_eigenpair(g: &Graph, which: Which, opts: &SolverOptions) -> Result<EigenResult> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return contract("solver tolerance must be positive");
    }
    if g.n() < 2 {
        return contract("eigenpairs need at least two vertices");
    }
    let op = Operator::new(g)?;
    let (mut vector, _) = if g.n() <= DENSE_LIMIT { dense(&op, which) } else { lanczos(&op, which, opts)? };
    fix_sign(&mut vector);
    let (value, residual) = op.evaluate(&vector);
    if residual > opts.tol {
        return Err(Error::NonConvergence { best_residual: residual });
    }
    Ok(EigenResult { value, vector, residual })
}

fn dense(op: &Operator, which: Which) -> (Vec<f64>, f64) {
    let n = op.g.n();
    let mut m = DMatrix::<f64>::identity(n, n);
    for v in 0..n {
        for &w in op.g.neighbors(v) {
            m[(v, w)] = -op.inv_sqrt[v] * op.inv_sqrt[w];
        }
    }
    if which == Which::SecondSmallest {
        // push eigenvalue 0 above the spectrum, which lies in [0, 2]
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += 3.0 * op.trivial[i] * op.trivial[j];
            }
        }
    }
    let eig = SymmetricEigen::new(m);
    let idx = pick(eig.eigenvalues.as_slice(), which);
    let mut x: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
    normalize(&mut x);
    (x, eig.eigenvalues[idx])
}

fn lanczos(op: &Operator, which: Which, opts: &SolverOptions) -> Result<(Vec<f64>, f64)> {
    let n = op.g.n();
    let deflate = which == Which::SecondSmallest;
    let project = |x: &mut Vec<f64>| {
        if deflate {
            let c = dot(x, &op.trivial);
            axpy(x, -c, &op.trivial);
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let cap = MAX_BASIS.min(n - usize::from(deflate)).max(2);
    let mut matvecs = 0;
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    let mut w = vec![0.0; n];

    while matvecs < opts.max_iter {
        project(&mut start);
        if normalize(&mut start) == 0.0 {
            start = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            continue;
        }
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        loop {
            let j = basis.len() - 1;
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            let a = dot(&w, &basis[j]);
            axpy(&mut w, -a, &basis[j]);
            if j > 0 {
                axpy(&mut w, -betas[j - 1], &basis[j - 1]);
            }
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(&w, v);
                    axpy(&mut w, -c, v);
                }
                if deflate {
                    let c = dot(&w, &op.trivial);
                    axpy(&mut w, -c, &op.trivial);
                }
            }
            alphas.push(a);
            let b = dot(&w, &w).sqrt();
            let k = alphas.len();
            let exhausted = b < 1e-12 || k >= cap || matvecs >= opts.max_iter;
            if k.is_multiple_of(20) || exhausted {
                let t = DMatrix::from_fn(k, k, |r, c| {
                    if r == c {
                        alphas[r]
                    } else if r + 1 == c {
                        betas[r]
                    } else if c + 1 == r {
                        betas[c]
                    } else {
                        0.0
                    }
                });
                let eig = SymmetricEigen::new(t);
                let idx = pick(eig.eigenvalues.as_slice(), which);
                let s = eig.eigenvectors.column(idx);
                let estimate = b * s[k - 1].abs();
                if estimate <= 0.5 * opts.tol || exhausted {
                    let mut x = vec![0.0; n];
                    for (coef, v) in s.iter().zip(&basis) {
                        axpy(&mut x, *coef, v);
                    }
                    project(&mut x);
                    normalize(&mut x);
                    let (value, residual) = op.evaluate(&x);
                    if best.as_ref().is_none_or(|bst| residual < bst.2) {
                        best = Some((x.clone(), value, residual));
                    }
                    if residual <= opts.tol {
                        return Ok((x, value));
                    }
                    if exhausted {
                        start = x;
                        break;
                    }
                }
            }
            betas.push(b);
            let mut next = w.clone();
            next.iter_mut().for_each(|c| *c /= b);
            basis.push(next);
        }
    }
    Err(Error::NonConvergence { best_residual: best.map_or(f64::INFINITY, |b| b.2) })
}

/// `e(s, s̄) / min(vol s, vol s̄)`.
pub fn conductance(g: &Graph, s: &VertexSet) -> Result<f64> {
    let (boundary, min_volume) = conductance_counts(g, s)?;
    Ok(boundary as f64 / min_volume as f64)
}

/// Numerator and denominator of the conductance of `s`.
pub fn conductance_counts(g: &Graph, s: &VertexSet) -> Result<(usize, usize)> {
    if s.is_empty() || s.len() >= g.n() || !s.valid_for(g.n()) {
        return contract("conductance needs a nonempty proper subset");
    }
    let mask = s.mask(g.n());
    let vol: usize = s.iter().map(|v| g.degree(v)).sum();
    let boundary: usize = s.iter().map(|v| g.degree(v) - g.degree_into(v, &mask)).sum();
    let min_volume = vol.min(2 * g.edge_count() - vol);
    if min_volume == 0 {
        return contract("conductance undefined for a side of zero volume");
    }
    Ok((boundary, min_volume))
}

/// `Σ|y_u + y_v|` over edges and `Σ d(v)|y_v|`.
pub fn beta_counts(g: &Graph, labels: &[i8]) -> Result<(usize, usize)> {
    if labels.len() != g.n() || labels.iter().any(|y| !(-1..=1).contains(y)) {
        return contract("labels must be one value in {-1, 0, 1} per vertex");
    }
    let den: usize = (0..g.n()).filter(|&v| labels[v] != 0).map(|v| g.degree(v)).sum();
    if den == 0 {
        return contract("labelling has no labelled volume");
    }
    let num = g.edges().map(|(u, v)| (labels[u] + labels[v]).unsigned_abs() as usize).sum();
    Ok((num, den))
}

pub fn beta_of_labeling(g: &Graph, labels: &[i8]) -> Result<f64> {
    let (num, den) = beta_counts(g, labels)?;
    Ok(num as f64 / den as f64)
}

/// Best prefix of the `x_v / sqrt(d_v)` ordering of the second eigenvector.
pub fn cheeger_sweep(g: &Graph, opts: &SolverOptions) -> Result<SweepCut> {
    let eig = extreme_eigenpair(g, Which::SecondSmallest, opts)?;
    let n = g.n();
    let z: Vec<f64> = (0..n).map(|v| eig.vector[v] / (g.degree(v) as f64).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));

    let total = 2 * g.edge_count();
    let mut inside = vec![false; n];
    let (mut vol, mut boundary) = (0usize, 0isize);
    let mut best: Option<(usize, usize, usize)> = None;
    for (k, &v) in order[..n - 1].iter().enumerate() {
        let into = g.degree_into(v, &inside) as isize;
        boundary += g.degree(v) as isize - 2 * into;
        vol += g.degree(v);
        inside[v] = true;
        let min_volume = vol.min(total - vol);
        let b = boundary as usize;
        if min_volume > 0 && best.is_none_or(|(_, bb, bm)| b * bm < bb * min_volume) {
            best = Some((k + 1, b, min_volume));
        }
    }
    let (len, boundary, min_volume) = best.expect("a graph without isolated vertices has a finite cut");
    Ok(SweepCut {
        set: VertexSet::new(order[..len].to_vec()),
        conductance: boundary as f64 / min_volume as f64,
        boundary,
        min_volume,
        lambda2: eig.value,
    })
}

/// Two-sided threshold sweep on the degree-rescaled top eigenvector.
pub fn bipartite_sweep(g: &Graph, opts: &SolverOptions) -> Result<BipartiteLabeling> {
    let eig = extreme_eigenpair(g, Which::Largest, opts)?;
    let n = g.n();
    let z: Vec<f64> = (0..n).map(|v| eig.vector[v] / (g.degree(v) as f64).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).filter(|&v| z[v] != 0.0).collect();
    order.sort_by(|&a, &b| z[b].abs().total_cmp(&z[a].abs()).then(a.cmp(&b)));

    let mut labels = vec![0i8; n];
    let (mut num, mut den) = (0usize, 0usize);
    let mut best: Option<(f64, usize, usize)> = None;
    let mut i = 0;
    while i < order.len() {
        let t = z[order[i]].abs();
        while i < order.len() && z[order[i]].abs() == t {
            let v = order[i];
            let s: i8 = if z[v] > 0.0 { 1 } else { -1 };
            for &u in g.neighbors(v) {
                if labels[u] == 0 {
                    num += 1;
                } else if labels[u] != s {
                    num -= 1;
                } else {
                    num += 1;
                }
            }
            den += g.degree(v);
            labels[v] = s;
            i += 1;
        }
        if best.is_none_or(|(_, bn, bd)| num * bd < bn * den) {
            best = Some((t, num, den));
        }
    }
    let (t, penalty, labeled_volume) = best.expect("eigenvector is nonzero");
    let labels = z.iter().map(|&zv| if zv.abs() >= t { if zv > 0.0 { 1 } else { -1 } } else { 0 }).collect();
    Ok(BipartiteLabeling {
        labels,
        beta: penalty as f64 / labeled_volume as f64,
        penalty,
        labeled_volume,
        lambda_max: eig.value,
    })
}
