//! Self-contained invariant suite for a graph: kernel properties, CDF
//! monotonicity, the cross-module mean-exit identity, metric axioms and
//! potential-theoretic contracts. Backs the `verify` CLI command.
//!
//! Sampling is driven entirely by the seed, and every parallel section
//! reduces in a fixed order, so reports are byte-identical for any worker
//! count.

use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::exit::mean_exit;
use crate::graph::{Vertex, WeightedGraph};
use crate::kernel::{exit_distribution, exit_tail_sum, heat_row, TransitionOperator};
use crate::linalg::DirichletSystem;
use crate::potential::{green_column, harmonicity_residual, harmonic_extend};
use crate::rng::RngStream;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub pass: bool,
    pub worst: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub alpha: f64,
    pub seed: u64,
    pub checks: Vec<CheckRow>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn sample_vertices(g: &WeightedGraph, seed: u64, stream: u64, count: usize) -> Vec<Vertex> {
    let mut rng = RngStream::new(seed, stream);
    (0..count)
        .map(|_| rng.next_below(g.n() as u64) as Vertex)
        .collect()
}

/// Largest proper ball radius around `x`, capped.
fn proper_radius(g: &WeightedGraph, x: Vertex, cap: u32) -> u32 {
    let dist = g.bfs_distances(x);
    let ecc = dist.iter().copied().max().unwrap_or(0);
    ecc.min(cap)
}

/// Run the invariant suite on a graph at laziness `alpha`.
pub fn verify_suite(graph: Arc<WeightedGraph>, alpha: f64, seed: u64) -> Result<VerifyReport> {
    let op = TransitionOperator::new(graph.clone(), alpha)?;
    let g = &*graph;
    let mut checks = Vec::new();
    let push = |name: &str, worst: f64, tol: f64, checks: &mut Vec<CheckRow>| {
        checks.push(CheckRow {
            name: name.to_string(),
            pass: worst <= tol,
            worst,
            tol,
        });
    };

    // transition rows sum to one
    let mut worst = 0.0f64;
    for x in sample_vertices(g, seed, 1, 64.min(g.n())) {
        worst = worst.max((op.row_sum(x) - 1.0).abs());
    }
    push("transition_row_sums", worst, 1e-12, &mut checks);

    // reversibility: mu(x) P(x,y) = mu(y) P(y,x) on every edge
    let mut worst = 0.0f64;
    for e in g.edges() {
        let lhs = g.mu(e.u) * (1.0 - alpha) * e.w / g.mu(e.u);
        let rhs = g.mu(e.v) * (1.0 - alpha) * e.w / g.mu(e.v);
        worst = worst.max((lhs - rhs).abs());
    }
    push("reversibility", worst, 1e-12, &mut checks);

    // kernel nonnegativity and normalization at sampled times
    let xs = sample_vertices(g, seed, 2, 6);
    let mut worst_norm = 0.0f64;
    let mut worst_neg = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let t = 1 + (i as u32 % 4) * 2;
        let row = heat_row(&op, t, x)?;
        let total: f64 = (0..g.n() as Vertex).map(|y| row[y as usize] * g.mu(y)).sum();
        worst_norm = worst_norm.max((total - 1.0).abs());
        worst_neg = worst_neg.max(-row.iter().copied().fold(0.0, f64::min));
    }
    push("kernel_nonnegative", worst_neg, 0.0, &mut checks);
    push("kernel_normalization", worst_norm, 1e-10, &mut checks);

    // symmetry p_t(x,y) = p_t(y,x) on sampled pairs
    let pairs = sample_vertices(g, seed, 3, 8);
    let mut worst = 0.0f64;
    for w in pairs.chunks(2) {
        if w.len() < 2 {
            break;
        }
        let (x, y) = (w[0], w[1]);
        let t = 3;
        let pxy = heat_row(&op, t, x)?[y as usize];
        let pyx = heat_row(&op, t, y)?[x as usize];
        worst = worst.max((pxy - pyx).abs());
    }
    push("kernel_symmetry", worst, 1e-12, &mut checks);

    // semigroup identity p_{s+t}(x,y) = sum_z p_s(x,z) p_t(z,y) mu(z)
    let mut worst = 0.0f64;
    for w in sample_vertices(g, seed, 4, 6).chunks(2) {
        if w.len() < 2 {
            break;
        }
        let (x, y) = (w[0], w[1]);
        let (s, t) = (2u32, 3u32);
        let direct = heat_row(&op, s + t, x)?[y as usize];
        let row_s = heat_row(&op, s, x)?;
        let row_t = heat_row(&op, t, y)?;
        let conv: f64 = (0..g.n() as Vertex)
            .map(|z| row_s[z as usize] * row_t[z as usize] * g.mu(z))
            .sum();
        worst = worst.max((direct - conv).abs());
    }
    push("chapman_kolmogorov", worst, 1e-10, &mut checks);

    // exit CDF is monotone in [0,1]; tail sum matches the linear solve
    let mut worst_cdf = 0.0f64;
    let mut worst_identity = 0.0f64;
    for &x in sample_vertices(g, seed, 5, 5).iter() {
        let rmax = proper_radius(g, x, 6);
        if rmax < 2 {
            continue;
        }
        let r = 2 + (x % (rmax - 1)) as u32;
        let ball = match g.ball(x, r) {
            Ok(b) => b,
            Err(_) => continue,
        };
        if ball.interior.binary_search(&x).is_err() {
            continue;
        }
        let cdf = exit_distribution(&op, &ball, x, 200)?;
        for w in cdf.windows(2) {
            worst_cdf = worst_cdf.max(w[0] - w[1]).max(w[1] - 1.0);
        }
        let tail = exit_tail_sum(&op, &ball, x)?;
        let solved = mean_exit(&op, x, r)?;
        worst_identity = worst_identity.max((tail - solved).abs());
    }
    push("exit_cdf_monotone", worst_cdf, 1e-12, &mut checks);
    push("exit_mean_identity", worst_identity, 1e-8, &mut checks);

    // metric axioms on sampled triples
    let mut worst = 0.0f64;
    let trip = sample_vertices(g, seed, 6, 9);
    for w in trip.chunks(3) {
        if w.len() < 3 {
            break;
        }
        let dx = g.bfs_distances(w[0]);
        let dy = g.bfs_distances(w[1]);
        let dxy = dx[w[1] as usize] as f64;
        let dyx = dy[w[0] as usize] as f64;
        worst = worst.max((dxy - dyx).abs());
        let viol = dx[w[2] as usize] as f64 - dxy - dy[w[2] as usize] as f64;
        worst = worst.max(viol);
    }
    push("metric_axioms", worst, 0.0, &mut checks);

    // harmonic extension obeys the maximum principle and is harmonic
    let mut worst_harm = 0.0f64;
    let mut worst_max = 0.0f64;
    for &x in sample_vertices(g, seed, 7, 3).iter() {
        let rmax = proper_radius(g, x, 5);
        if rmax < 2 {
            continue;
        }
        let ball = match g.ball(x, rmax) {
            Ok(b) => b,
            Err(_) => continue,
        };
        let sys = DirichletSystem::new(g, &ball.interior)?;
        let mut exits: Vec<Vertex> = ball
            .interior
            .iter()
            .flat_map(|&v| g.neighbors(v).iter().map(|&(u, _)| u))
            .filter(|&u| sys.local(u).is_none())
            .collect();
        exits.sort_unstable();
        exits.dedup();
        let mut rng = RngStream::new(seed, 100 + x as u64);
        let boundary: std::collections::BTreeMap<Vertex, f64> =
            exits.iter().map(|&z| (z, rng.next_f64())).collect();
        let sol = harmonic_extend(g, &ball.interior, &boundary)?;
        worst_harm = worst_harm.max(harmonicity_residual(g, &sol));
        let bmin = boundary.values().copied().fold(f64::INFINITY, f64::min);
        let bmax = boundary.values().copied().fold(f64::NEG_INFINITY, f64::max);
        for &v in &sol.domain {
            worst_max = worst_max.max(bmin - sol.value(v)).max(sol.value(v) - bmax);
        }
    }
    push("harmonic_residual", worst_harm, 1e-10, &mut checks);
    push("maximum_principle", worst_max, 1e-10, &mut checks);

    // Green column symmetry on one sampled ball
    let mut worst = 0.0f64;
    if let Some(&x) = sample_vertices(g, seed, 8, 1).first() {
        let rmax = proper_radius(g, x, 4);
        if rmax >= 2 {
            if let Ok(ball) = g.ball(x, rmax) {
                let a = ball.interior[0];
                let b = ball.interior[ball.interior.len() / 2];
                let col_a = green_column(&op, &ball, a)?;
                let col_b = green_column(&op, &ball, b)?;
                worst = (col_a[b as usize] - col_b[a as usize]).abs();
            }
        }
    }
    push("green_symmetry", worst, 1e-10, &mut checks);

    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        alpha,
        seed,
        checks,
        pass,
    })
}
