//! Reversible lazy random-walk kernel, killed restrictions, exact exit and
//! hitting distributions, the discrete heat kernel and a Monte Carlo sampler.
//!
//! Discrete-time conventions: the walk holds with probability `alpha` and
//! otherwise moves to a neighbor with probability proportional to the edge
//! weight. Exit times satisfy `T >= 1`; the hitting time of a set containing
//! the start vertex is `0`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Ball, Vertex, WeightedGraph};
use crate::rng::RngStream;

/// Per-trajectory step cap; hitting it signals a ball-escapes-graph misuse.
pub const MC_STEP_CAP: u64 = 10_000_000;

/// Reversible lazy walk `P(x,y) = (1-alpha) w(x,y)/mu(x)`, `P(x,x) = alpha`.
#[derive(Debug, Clone)]
pub struct TransitionOperator {
    graph: Arc<WeightedGraph>,
    alpha: f64,
}

impl TransitionOperator {
    pub fn new(graph: Arc<WeightedGraph>, alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "lazy parameter {alpha} outside [0,1)"
            )));
        }
        Ok(TransitionOperator { graph, alpha })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> Arc<WeightedGraph> {
        self.graph.clone()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `out = v P` (distribution evolution). Uses edge symmetry:
    /// `(vP)(y) = alpha v(y) + (1-alpha) sum_x w(x,y) v(x) / mu(x)`.
    pub fn row_step(&self, v: &[f64], out: &mut [f64]) {
        let g = &*self.graph;
        let a = self.alpha;
        for y in 0..g.n() {
            let mut acc = 0.0;
            for &(x, w) in g.neighbors(y as Vertex) {
                acc += w * v[x as usize] / g.mu(x);
            }
            out[y] = a * v[y] + (1.0 - a) * acc;
        }
    }

    /// `out = P v` (expectation evolution).
    pub fn col_step(&self, v: &[f64], out: &mut [f64]) {
        let g = &*self.graph;
        let a = self.alpha;
        for x in 0..g.n() {
            let mut acc = 0.0;
            for &(y, w) in g.neighbors(x as Vertex) {
                acc += w * v[y as usize];
            }
            out[x] = a * v[x] + (1.0 - a) * acc / g.mu(x as Vertex);
        }
    }

    /// Row sums of the kernel (should be exactly 1 up to rounding).
    pub fn row_sum(&self, x: Vertex) -> f64 {
        let total: f64 = self
            .graph
            .neighbors(x)
            .iter()
            .map(|&(_, w)| w)
            .sum::<f64>()
            / self.graph.mu(x);
        self.alpha + (1.0 - self.alpha) * total
    }
}

/// Sub-Markov restriction of a transition operator to a domain, vertices
/// outside the domain absorbing.
#[derive(Debug, Clone)]
pub struct KilledOperator {
    domain: Vec<Vertex>,
    index: Vec<i64>,
    row_ptr: Vec<usize>,
    entries: Vec<(u32, f64)>,
    alpha: f64,
}

impl KilledOperator {
    pub fn new(op: &TransitionOperator, domain: &[Vertex]) -> Result<Self> {
        let g = op.graph();
        if domain.is_empty() {
            return Err(Error::Domain("empty killed domain".into()));
        }
        if domain.len() >= g.n() {
            return Err(Error::Domain("killed domain must be proper".into()));
        }
        let mut index = vec![-1i64; g.n()];
        for (i, &v) in domain.iter().enumerate() {
            g.check_vertex(v)?;
            if i > 0 && domain[i - 1] >= v {
                return Err(Error::Domain("domain must be sorted and unique".into()));
            }
            index[v as usize] = i as i64;
        }
        let mut row_ptr = Vec::with_capacity(domain.len() + 1);
        let mut entries = Vec::new();
        row_ptr.push(0);
        let coeff = 1.0 - op.alpha();
        for &v in domain {
            let mu = g.mu(v);
            for &(u, w) in g.neighbors(v) {
                let j = index[u as usize];
                if j >= 0 {
                    entries.push((j as u32, coeff * w / mu));
                }
            }
            row_ptr.push(entries.len());
        }
        Ok(KilledOperator {
            domain: domain.to_vec(),
            index,
            row_ptr,
            entries,
            alpha: op.alpha(),
        })
    }

    pub fn domain(&self) -> &[Vertex] {
        &self.domain
    }

    pub fn local(&self, v: Vertex) -> Option<usize> {
        let i = self.index[v as usize];
        if i >= 0 {
            Some(i as usize)
        } else {
            None
        }
    }

    /// `out = P_D v` in local indexing.
    pub fn step(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.domain.len() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let (j, c) = self.entries[k];
                acc += c * v[j as usize];
            }
            out[i] = self.alpha * v[i] + acc;
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.alpha
            + self.row_ptr[i..i + 2]
                .windows(2)
                .map(|w| self.entries[w[0]..w[1]].iter().map(|&(_, c)| c).sum::<f64>())
                .next()
                .unwrap_or(0.0)
    }
}

/// Heat kernel `p_t(x,y) = P^t(x,y) / mu(y)`, by `t` sparse products from the
/// indicator at `x`.
pub fn heat_kernel(op: &TransitionOperator, t: u32, x: Vertex, y: Vertex) -> Result<f64> {
    let row = heat_row(op, t, x)?;
    Ok(row[y as usize])
}

/// Full row `p_t(x, .)`.
pub fn heat_row(op: &TransitionOperator, t: u32, x: Vertex) -> Result<Vec<f64>> {
    let g = op.graph();
    g.check_vertex(x)?;
    let mut v = vec![0.0; g.n()];
    v[x as usize] = 1.0;
    let mut tmp = vec![0.0; g.n()];
    for _ in 0..t {
        op.row_step(&v, &mut tmp);
        std::mem::swap(&mut v, &mut tmp);
    }
    for (y, val) in v.iter_mut().enumerate() {
        *val /= g.mu(y as Vertex);
    }
    Ok(v)
}

/// Exact exit-time CDF `t -> P_x(T <= t)` for `t = 0..=t_max`, via killed
/// survival vectors. `T >= 1` by convention, so the first entry is 0.
pub fn exit_distribution(
    op: &TransitionOperator,
    ball: &Ball,
    x: Vertex,
    t_max: u32,
) -> Result<Vec<f64>> {
    let killed = KilledOperator::new(op, &ball.interior)?;
    let local = killed
        .local(x)
        .ok_or_else(|| Error::Domain(format!("start vertex {x} outside ball interior")))?;
    let m = killed.domain().len();
    let mut s = vec![1.0; m];
    let mut tmp = vec![0.0; m];
    let mut cdf = Vec::with_capacity(t_max as usize + 1);
    cdf.push(0.0);
    for _ in 1..=t_max {
        killed.step(&s, &mut tmp);
        std::mem::swap(&mut s, &mut tmp);
        cdf.push(1.0 - s[local]);
    }
    Ok(cdf)
}

/// `P_v(tau_A <= s)` for every start vertex `v` at a single horizon `s`.
pub fn hitting_cdf_all(op: &TransitionOperator, target: &[Vertex], s: u32) -> Result<Vec<f64>> {
    let g = op.graph();
    if target.is_empty() {
        return Err(Error::Domain("empty hitting target".into()));
    }
    let mut h = vec![0.0; g.n()];
    for &v in target {
        g.check_vertex(v)?;
        h[v as usize] = 1.0;
    }
    let mut tmp = vec![0.0; g.n()];
    for _ in 0..s {
        op.col_step(&h, &mut tmp);
        for &v in target {
            tmp[v as usize] = 1.0;
        }
        std::mem::swap(&mut h, &mut tmp);
    }
    Ok(h)
}

/// Exact hitting-time CDF `t -> P_x(tau_A <= t)`, `t = 0..=t_max`.
/// `tau_A = 0` when `x` is already in `A`.
pub fn hitting_distribution(
    op: &TransitionOperator,
    target: &[Vertex],
    x: Vertex,
    t_max: u32,
) -> Result<Vec<f64>> {
    let g = op.graph();
    g.check_vertex(x)?;
    if target.is_empty() {
        return Err(Error::Domain("empty hitting target".into()));
    }
    let mut h = vec![0.0; g.n()];
    for &v in target {
        g.check_vertex(v)?;
        h[v as usize] = 1.0;
    }
    let mut cdf = Vec::with_capacity(t_max as usize + 1);
    cdf.push(h[x as usize]);
    let mut tmp = vec![0.0; g.n()];
    for _ in 1..=t_max {
        op.col_step(&h, &mut tmp);
        for &v in target {
            tmp[v as usize] = 1.0;
        }
        std::mem::swap(&mut h, &mut tmp);
        cdf.push(h[x as usize]);
    }
    Ok(cdf)
}

/// Set kernel `P_t(A,B) = sum_{x in A} sum_{y in B} p_t(x,y) mu(x) mu(y)`.
///
/// Computed as `(mu 1_A)^T P^t 1_B` with a single `t`-step sweep; by linearity
/// this equals the per-indicator sum exactly.
pub fn set_kernel(op: &TransitionOperator, t: u32, a: &[Vertex], b: &[Vertex]) -> Result<f64> {
    let g = op.graph();
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("set kernel of an empty set".into()));
    }
    let mut v = vec![0.0; g.n()];
    for &y in b {
        g.check_vertex(y)?;
        v[y as usize] = 1.0;
    }
    let mut tmp = vec![0.0; g.n()];
    for _ in 0..t {
        op.col_step(&v, &mut tmp);
        std::mem::swap(&mut v, &mut tmp);
    }
    let mut total = 0.0;
    for &x in a {
        g.check_vertex(x)?;
        total += g.mu(x) * v[x as usize];
    }
    Ok(total)
}

/// Mean exit time as the tail sum `sum_{t>=0} P_x(T > t)` of the exact
/// survival sequence, with a geometric remainder once the survival mass is
/// far below the target accuracy. Independent of the linear-solve route.
pub fn exit_tail_sum(op: &TransitionOperator, ball: &Ball, x: Vertex) -> Result<f64> {
    let killed = KilledOperator::new(op, &ball.interior)?;
    let local = killed
        .local(x)
        .ok_or_else(|| Error::Domain(format!("start vertex {x} outside ball interior")))?;
    let m = killed.domain().len();
    let mut s = vec![1.0; m];
    let mut tmp = vec![0.0; m];
    let mut total = 1.0; // t = 0 term: survival is 1
    let mut prev = 1.0;
    let cap = 200_000_000u64;
    let mut t = 0u64;
    loop {
        killed.step(&s, &mut tmp);
        std::mem::swap(&mut s, &mut tmp);
        t += 1;
        let cur = s[local];
        total += cur;
        if cur < 1e-13 * (1.0 + total) {
            // geometric remainder from the decay ratio of the principal mode
            let lambda = if prev > 0.0 { (cur / prev).min(0.999_999) } else { 0.0 };
            total += cur * lambda / (1.0 - lambda);
            return Ok(total);
        }
        prev = cur;
        if t > cap {
            return Err(Error::Runaway(cap));
        }
    }
}

/// `n` independent exit-time samples from `ball` started at `x`, sorted.
/// Trajectory `i` consumes stream `(seed, stream0 + i)`, so the result is
/// byte-identical for any worker count.
pub fn mc_exit_samples(
    op: &TransitionOperator,
    ball: &Ball,
    x: Vertex,
    n: usize,
    seed: u64,
    stream0: u64,
) -> Result<Vec<u32>> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let g = op.graph();
    let mut inside = vec![false; g.n()];
    for &v in &ball.interior {
        inside[v as usize] = true;
    }
    if !inside[x as usize] {
        return Err(Error::Domain(format!("start vertex {x} outside ball interior")));
    }
    let alpha = op.alpha();
    let samples: Result<Vec<u32>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, stream0 + i);
            let mut pos = x;
            let mut steps = 0u64;
            loop {
                steps += 1;
                if steps > MC_STEP_CAP {
                    return Err(Error::Runaway(MC_STEP_CAP));
                }
                let u = rng.next_f64();
                if u >= alpha {
                    // map the non-hold mass back to [0,1) and walk the
                    // cumulative neighbor weights
                    let v = (u - alpha) / (1.0 - alpha);
                    let nbrs = g.neighbors(pos);
                    let mu = g.mu(pos);
                    let mut acc = 0.0;
                    let mut next = nbrs[nbrs.len() - 1].0;
                    for &(y, w) in nbrs {
                        acc += w / mu;
                        if v < acc {
                            next = y;
                            break;
                        }
                    }
                    pos = next;
                }
                if !inside[pos as usize] {
                    return Ok(steps as u32);
                }
            }
        })
        .collect();
    let mut samples = samples?;
    samples.sort_unstable();
    Ok(samples)
}
