//! Discrete potential theory: harmonic extension, Harnack constants, Green
//! kernels, capacity and effective resistance.
//!
//! Harmonic functions of the lazy walk do not depend on the hold probability,
//! so everything except the Green kernel takes the bare graph; the Green
//! kernel carries the `1/(1-alpha)` occupation-time scaling.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Ball, Vertex, WeightedGraph};
use crate::kernel::TransitionOperator;
use crate::linalg::DirichletSystem;

/// Dense Green tables above this interior size are refused; use
/// `green_column` on demand instead.
pub const GREEN_TABLE_CAP: usize = 5000;

/// Solution of a discrete Dirichlet problem.
#[derive(Debug, Clone)]
pub struct PotentialSolve {
    /// Interior vertices (sorted).
    pub domain: Vec<Vertex>,
    /// Boundary vertices carrying prescribed values (sorted).
    pub boundary: Vec<Vertex>,
    /// Full-length value vector; zero outside `domain ∪ boundary`.
    pub values: Vec<f64>,
    /// Dirichlet energy over all edges with both endpoints valued.
    pub energy: f64,
}

impl PotentialSolve {
    pub fn value(&self, v: Vertex) -> f64 {
        self.values[v as usize]
    }
}

fn energy_over_defined(g: &WeightedGraph, values: &[f64], defined: &[bool]) -> f64 {
    let mut e = 0.0;
    for edge in g.edges() {
        if defined[edge.u as usize] && defined[edge.v as usize] {
            let d = values[edge.u as usize] - values[edge.v as usize];
            e += edge.w * d * d;
        }
    }
    e
}

/// Solve the discrete Dirichlet problem: harmonic on `domain`, prescribed on
/// the boundary. Boundary data must cover every vertex reachable in one step
/// from the domain.
pub fn harmonic_extend(
    g: &WeightedGraph,
    domain: &[Vertex],
    boundary: &BTreeMap<Vertex, f64>,
) -> Result<PotentialSolve> {
    if domain.is_empty() {
        return Err(Error::Domain("empty harmonic domain".into()));
    }
    for &v in boundary.keys() {
        g.check_vertex(v)?;
        if domain.binary_search(&v).is_ok() {
            return Err(Error::Domain(format!(
                "vertex {v} is both interior and boundary"
            )));
        }
    }
    let sys = DirichletSystem::new(g, domain)?;
    let mut rhs = vec![0.0; domain.len()];
    for (i, &v) in domain.iter().enumerate() {
        for &(u, w) in g.neighbors(v) {
            if sys.local(u).is_none() {
                let h = boundary
                    .get(&u)
                    .copied()
                    .ok_or(Error::Underdetermined(u))?;
                rhs[i] += w * h;
            }
        }
    }
    let u = sys.solve(&rhs)?;
    let mut values = vec![0.0; g.n()];
    let mut defined = vec![false; g.n()];
    for (i, &v) in domain.iter().enumerate() {
        values[v as usize] = u[i];
        defined[v as usize] = true;
    }
    for (&v, &h) in boundary {
        values[v as usize] = h;
        defined[v as usize] = true;
    }
    let energy = energy_over_defined(g, &values, &defined);
    Ok(PotentialSolve {
        domain: domain.to_vec(),
        boundary: boundary.keys().copied().collect(),
        values,
        energy,
    })
}

/// Interior harmonicity residual `max_x |u(x) - sum_y P(x,y) u(y)|`; the
/// kernel is alpha-free here because laziness cancels in the mean.
pub fn harmonicity_residual(g: &WeightedGraph, solve: &PotentialSolve) -> f64 {
    let mut worst = 0.0f64;
    for &v in &solve.domain {
        let mut avg = 0.0;
        for &(u, w) in g.neighbors(v) {
            avg += w * solve.values[u as usize];
        }
        worst = worst.max((solve.values[v as usize] - avg / g.mu(v)).abs());
    }
    worst
}

/// Max/min ratio of one exit vertex's harmonic measure over the inner ball.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ExitMeasureRatio {
    pub exit: Vertex,
    pub max: f64,
    pub min: f64,
    pub ratio: f64,
}

/// Exact Harnack constant of the ball pair `(B(x,R), B(x,2R))`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HarnackReport {
    pub center: Vertex,
    pub radius: u32,
    pub constant: f64,
    pub per_exit: Vec<ExitMeasureRatio>,
}

/// Compute the optimal constant `H` with `sup u <= H inf u` over `B(x,R)` for
/// every nonnegative function harmonic on `B(x,2R)`.
///
/// Every such function is a nonnegative combination of the harmonic measures
/// `h_z` of the exit vertices `z`, and `sup u / inf u` over the cone is
/// maximized on an extreme ray, so the worst per-`z` ratio is exact.
pub fn harnack_constant(g: &WeightedGraph, x: Vertex, radius: u32) -> Result<HarnackReport> {
    if radius == 0 {
        return Err(Error::InvalidParameter("harnack needs R >= 1".into()));
    }
    let outer = g.ball(x, 2 * radius)?;
    let inner = g.ball(x, radius)?;
    let sys = DirichletSystem::new(g, &outer.interior)?;
    // exit vertices: outside the domain, one step from it
    let mut exits: Vec<Vertex> = outer
        .interior
        .iter()
        .flat_map(|&v| g.neighbors(v).iter().map(|&(u, _)| u))
        .filter(|&u| sys.local(u).is_none())
        .collect();
    exits.sort_unstable();
    exits.dedup();
    let inner_local: Vec<usize> = inner
        .interior
        .iter()
        .map(|&v| sys.local(v).expect("inner ball inside outer interior"))
        .collect();
    let per_exit: Result<Vec<ExitMeasureRatio>> = exits
        .par_iter()
        .map(|&z| {
            let mut rhs = vec![0.0; sys.len()];
            for &(u, w) in g.neighbors(z) {
                if let Some(i) = sys.local(u) {
                    rhs[i] += w;
                }
            }
            let h = sys.solve(&rhs)?;
            let mut max = f64::NEG_INFINITY;
            let mut min = f64::INFINITY;
            for &i in &inner_local {
                max = max.max(h[i]);
                min = min.min(h[i]);
            }
            Ok(ExitMeasureRatio {
                exit: z,
                max,
                min,
                ratio: max / min,
            })
        })
        .collect();
    let per_exit = per_exit?;
    let constant = per_exit.iter().map(|r| r.ratio).fold(1.0, f64::max);
    Ok(HarnackReport {
        center: x,
        radius,
        constant,
        per_exit,
    })
}

/// Dense Green kernel table `g^B(x,y)` over a ball interior.
#[derive(Debug, Clone)]
pub struct GreenTable {
    pub interior: Vec<Vertex>,
    values: Vec<f64>,
}

impl GreenTable {
    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }

    /// `g(x, y)` by interior position.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.interior.len() + j]
    }

    pub fn get(&self, x: Vertex, y: Vertex) -> Option<f64> {
        let i = self.interior.binary_search(&x).ok()?;
        let j = self.interior.binary_search(&y).ok()?;
        Some(self.at(i, j))
    }
}

/// One column `g^B(., x)` of the Green kernel, full-length (zero outside the
/// interior). `g(w,x) = G(w,x)/mu(x)` where `G` counts expected visits.
pub fn green_column(op: &TransitionOperator, ball: &Ball, x: Vertex) -> Result<Vec<f64>> {
    let g = op.graph();
    let sys = DirichletSystem::new(g, &ball.interior)?;
    let at = sys
        .local(x)
        .ok_or_else(|| Error::Domain(format!("source {x} outside ball interior")))?;
    let mut rhs = vec![0.0; sys.len()];
    rhs[at] = 1.0;
    let u = sys.solve(&rhs)?;
    let scale = 1.0 / (1.0 - op.alpha());
    let mut out = vec![0.0; g.n()];
    for (i, &v) in ball.interior.iter().enumerate() {
        out[v as usize] = u[i] * scale;
    }
    Ok(out)
}

/// Dense Green table by independent parallel columns; refuses interiors
/// larger than `GREEN_TABLE_CAP`.
pub fn green_table(op: &TransitionOperator, ball: &Ball) -> Result<GreenTable> {
    let k = ball.interior.len();
    if k > GREEN_TABLE_CAP {
        return Err(Error::Domain(format!(
            "green table capped at {GREEN_TABLE_CAP} interior vertices, got {k}; use green_column"
        )));
    }
    let cols: Result<Vec<Vec<f64>>> = ball
        .interior
        .par_iter()
        .map(|&x| green_column(op, ball, x))
        .collect();
    let cols = cols?;
    let mut values = vec![0.0; k * k];
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in ball.interior.iter().enumerate() {
            values[i * k + j] = col[v as usize];
        }
    }
    Ok(GreenTable {
        interior: ball.interior.clone(),
        values,
    })
}

/// Capacity between disjoint sets, its reciprocal resistance, and the
/// minimizing potential (1 on `a`, 0 on `b`, harmonic in between).
#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub cap: f64,
    pub rho: f64,
    pub potential: PotentialSolve,
}

pub fn capacity(g: &WeightedGraph, a: &[Vertex], b: &[Vertex]) -> Result<CapacityResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("capacity needs nonempty sets".into()));
    }
    let mut in_a = vec![false; g.n()];
    for &v in a {
        g.check_vertex(v)?;
        in_a[v as usize] = true;
    }
    let mut boundary = BTreeMap::new();
    for &v in b {
        g.check_vertex(v)?;
        if in_a[v as usize] {
            return Err(Error::Domain(format!("sets overlap at vertex {v}")));
        }
        boundary.insert(v, 0.0);
    }
    for &v in a {
        boundary.insert(v, 1.0);
    }
    let domain: Vec<Vertex> = (0..g.n() as Vertex)
        .filter(|v| !boundary.contains_key(v))
        .collect();
    let potential = if domain.is_empty() {
        // no free vertices: energy of the indicator directly
        let mut values = vec![0.0; g.n()];
        for &v in a {
            values[v as usize] = 1.0;
        }
        let defined = vec![true; g.n()];
        let energy = energy_over_defined(g, &values, &defined);
        PotentialSolve {
            domain,
            boundary: boundary.keys().copied().collect(),
            values,
            energy,
        }
    } else {
        harmonic_extend(g, &domain, &boundary)?
    };
    let cap = potential.energy;
    if !(cap > 0.0) {
        return Err(Error::Domain("zero capacity between the sets".into()));
    }
    Ok(CapacityResult {
        cap,
        rho: 1.0 / cap,
        potential,
    })
}

/// Annulus resistance `rho(x, r, R)` between `B(x,r)` and the complement of
/// `B(x,R)`.
pub fn resistance_annulus(g: &WeightedGraph, x: Vertex, r: u32, big_r: u32) -> Result<f64> {
    if r >= big_r {
        return Err(Error::Domain(format!("need r < R, got r={r}, R={big_r}")));
    }
    let inner = g.ball(x, r)?;
    if inner.interior.is_empty() {
        return Err(Error::Domain("inner ball has empty interior".into()));
    }
    let outer = g.ball(x, big_r)?;
    let mut in_outer = vec![false; g.n()];
    for &v in &outer.interior {
        in_outer[v as usize] = true;
    }
    let complement: Vec<Vertex> = (0..g.n() as Vertex)
        .filter(|&v| !in_outer[v as usize])
        .collect();
    Ok(capacity(g, &inner.interior, &complement)?.rho)
}

/// One comparability row: Green column extremes against annulus resistance.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GreenResistanceRow {
    pub center: Vertex,
    pub r: u32,
    pub big_r: u32,
    pub rho: f64,
    pub inf_green_closed_inner: f64,
    pub sup_green_outside_inner: f64,
}

/// For each `(x, r, R)`: `inf_{d(w,x)<=r} g^B(w,x)`, `rho(x,r,R)` and
/// `sup_{r<=d(w,x)<R} g^B(w,x)`; comparability of the three is the content
/// is what the Harnack hypothesis buys at desk scale.
pub fn green_resistance_rows(
    op: &TransitionOperator,
    grid: &[(Vertex, u32, u32)],
) -> Result<Vec<GreenResistanceRow>> {
    let g = op.graph();
    let mut rows = Vec::new();
    for &(x, r, big_r) in grid {
        if r >= big_r {
            return Err(Error::Domain(format!("need r < R, got r={r}, R={big_r}")));
        }
        let ball = g.ball(x, big_r)?;
        let col = green_column(op, &ball, x)?;
        let dist = g.bfs_distances_to(x, big_r);
        let mut inf_in = f64::INFINITY;
        let mut sup_out = f64::NEG_INFINITY;
        for &w in &ball.interior {
            let d = dist[w as usize];
            let v = col[w as usize];
            if d <= r {
                inf_in = inf_in.min(v);
            }
            if d >= r {
                sup_out = sup_out.max(v);
            }
        }
        let rho = resistance_annulus(g, x, r, big_r)?;
        rows.push(GreenResistanceRow {
            center: x,
            r,
            big_r,
            rho,
            inf_green_closed_inner: inf_in,
            sup_green_outside_inner: sup_out,
        });
    }
    Ok(rows)
}

/// Hit-before-exit potential: `u(w) = P_w(reach {d(.,x) <= r} before
/// {d(.,x) >= 5r})`, alpha-free, one linear solve.
#[derive(Debug, Clone)]
pub struct HitBeforeExit {
    pub center: Vertex,
    pub r: u32,
    /// Full-length probabilities: 1 on the closed inner ball, 0 outside the
    /// open 5r-ball.
    pub values: Vec<f64>,
}

pub fn hit_before_exit(g: &WeightedGraph, x: Vertex, r: u32) -> Result<HitBeforeExit> {
    if r == 0 {
        return Err(Error::InvalidParameter("need r >= 1".into()));
    }
    let outer = g.ball(x, 5 * r)?;
    let dist = g.bfs_distances_to(x, 5 * r);
    let mut boundary = BTreeMap::new();
    let mut domain = Vec::new();
    for &v in &outer.interior {
        if dist[v as usize] <= r {
            boundary.insert(v, 1.0);
        } else {
            domain.push(v);
        }
    }
    for &v in &outer.sphere {
        boundary.insert(v, 0.0);
    }
    if domain.is_empty() {
        return Err(Error::Domain("annulus between r and 5r is empty".into()));
    }
    let solve = harmonic_extend(g, &domain, &boundary)?;
    Ok(HitBeforeExit {
        center: x,
        r,
        values: solve.values,
    })
}

/// Per-instance minima of the hit-before-exit probability over starting
/// points `w` with `r <= d(w,x) <= 4r`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HitBeforeExitRow {
    pub center: Vertex,
    pub r: u32,
    pub min_probability: f64,
    pub argmin: Vertex,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct C1Report {
    pub rows: Vec<HitBeforeExitRow>,
    /// Grid minimum; feeds the sensitivity mode `q = 2 / c1_hat`.
    pub c1_hat: f64,
}

pub fn c1_estimate(g: &WeightedGraph, grid: &[(Vertex, u32)]) -> Result<C1Report> {
    let mut rows = Vec::new();
    for &(x, r) in grid {
        let solve = hit_before_exit(g, x, r)?;
        let dist = g.bfs_distances_to(x, 4 * r);
        let mut min_p = f64::INFINITY;
        let mut argmin = x;
        for v in 0..g.n() as Vertex {
            let d = dist[v as usize];
            if d != u32::MAX && d >= r && d <= 4 * r {
                let p = solve.values[v as usize];
                if p < min_p {
                    min_p = p;
                    argmin = v;
                }
            }
        }
        if !min_p.is_finite() {
            return Err(Error::Domain("no starting points in [r, 4r]".into()));
        }
        rows.push(HitBeforeExitRow {
            center: x,
            r,
            min_probability: min_p,
            argmin,
        });
    }
    let c1_hat = rows
        .iter()
        .map(|r| r.min_probability)
        .fold(f64::INFINITY, f64::min);
    if rows.is_empty() {
        return Err(Error::InsufficientData("empty c1 grid".into()));
    }
    Ok(C1Report { rows, c1_hat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_lattice, gen_sierpinski, GraphMeta};
    use crate::rng::RngStream;
    use std::sync::Arc;

    fn path(n: u32) -> WeightedGraph {
        gen_lattice(1, n).unwrap()
    }

    fn op0(g: WeightedGraph) -> TransitionOperator {
        TransitionOperator::new(Arc::new(g), 0.0).unwrap()
    }

    #[test]
    fn constants_are_harmonic() {
        let g = gen_sierpinski(3).unwrap();
        let ball = g.ball(0, 4).unwrap();
        let mut boundary = BTreeMap::new();
        let dist = g.bfs_distances(0);
        for v in 0..g.n() as Vertex {
            if dist[v as usize] >= 4 {
                boundary.insert(v, 2.5);
            }
        }
        let s = harmonic_extend(&g, &ball.interior, &boundary).unwrap();
        for &v in &s.domain {
            assert!((s.value(v) - 2.5).abs() < 1e-10);
        }
        assert!(s.energy.abs() < 1e-12);
        assert!(harmonicity_residual(&g, &s) < 1e-10);
    }

    #[test]
    fn linear_dirichlet_on_path() {
        // interior {-3..3} maps to ids 1..7 on a 9-path; h(0) = 0, h(8) = 1
        let g = path(9);
        let domain: Vec<Vertex> = (1..8).collect();
        let mut boundary = BTreeMap::new();
        boundary.insert(0u32, 0.0);
        boundary.insert(8u32, 1.0);
        let s = harmonic_extend(&g, &domain, &boundary).unwrap();
        for v in 0..9u32 {
            assert!((s.value(v) - v as f64 / 8.0).abs() < 1e-11);
        }
        // maximum principle: interior values strictly between boundary values
        for &v in &s.domain {
            assert!(s.value(v) > 0.0 && s.value(v) < 1.0);
        }
    }

    #[test]
    fn missing_boundary_is_underdetermined() {
        let g = path(9);
        let domain: Vec<Vertex> = (1..8).collect();
        let mut boundary = BTreeMap::new();
        boundary.insert(0u32, 0.0);
        assert!(matches!(
            harmonic_extend(&g, &domain, &boundary),
            Err(Error::Underdetermined(8))
        ));
    }

    #[test]
    fn harmonic_measure_in_unit_interval_and_sums_to_one() {
        let g = gen_lattice(2, 9).unwrap();
        let ball = g.ball(40, 3).unwrap();
        let sys = DirichletSystem::new(&g, &ball.interior).unwrap();
        let mut exits: Vec<Vertex> = ball
            .interior
            .iter()
            .flat_map(|&v| g.neighbors(v).iter().map(|&(u, _)| u))
            .filter(|&u| sys.local(u).is_none())
            .collect();
        exits.sort_unstable();
        exits.dedup();
        let mut total = vec![0.0; ball.interior.len()];
        for &z in &exits {
            let mut boundary = BTreeMap::new();
            for &e in &exits {
                boundary.insert(e, if e == z { 1.0 } else { 0.0 });
            }
            let s = harmonic_extend(&g, &ball.interior, &boundary).unwrap();
            for (i, &v) in ball.interior.iter().enumerate() {
                let h = s.value(v);
                assert!((-1e-12..=1.0 + 1e-12).contains(&h));
                total[i] += h;
            }
        }
        for t in total {
            assert!((t - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn harnack_line_five_thirds() {
        let g = path(41);
        let rep = harnack_constant(&g, 20, 2).unwrap();
        assert!((rep.constant - 5.0 / 3.0).abs() < 1e-10, "H = {}", rep.constant);
        // singleton inner ball
        let rep = harnack_constant(&g, 20, 1).unwrap();
        assert!((rep.constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn harnack_is_optimal_over_random_nonnegative_data() {
        let g = gen_sierpinski(4).unwrap();
        let x = 0u32;
        let radius = 3u32;
        let rep = harnack_constant(&g, x, radius).unwrap();
        let outer = g.ball(x, 2 * radius).unwrap();
        let inner = g.ball(x, radius).unwrap();
        let sys = DirichletSystem::new(&g, &outer.interior).unwrap();
        let mut exits: Vec<Vertex> = outer
            .interior
            .iter()
            .flat_map(|&v| g.neighbors(v).iter().map(|&(u, _)| u))
            .filter(|&u| sys.local(u).is_none())
            .collect();
        exits.sort_unstable();
        exits.dedup();
        let mut rng = RngStream::new(2024, 5);
        let mut best = 0.0f64;
        for _ in 0..100 {
            let mut boundary = BTreeMap::new();
            for &e in &exits {
                boundary.insert(e, rng.next_f64());
            }
            let s = harmonic_extend(&g, &outer.interior, &boundary).unwrap();
            let vals: Vec<f64> = inner.interior.iter().map(|&v| s.value(v)).collect();
            let sup = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let inf = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let ratio = sup / inf;
            assert!(ratio <= rep.constant + 1e-9, "{ratio} > {}", rep.constant);
            best = best.max(ratio);
        }
        // the extreme ray is approached by the worst exit's indicator data
        let worst = rep
            .per_exit
            .iter()
            .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
            .unwrap();
        let mut boundary = BTreeMap::new();
        for &e in &exits {
            boundary.insert(e, if e == worst.exit { 1.0 } else { 0.0 });
        }
        let s = harmonic_extend(&g, &outer.interior, &boundary).unwrap();
        let vals: Vec<f64> = inner.interior.iter().map(|&v| s.value(v)).collect();
        let sup = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let inf = vals.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((sup / inf - rep.constant).abs() < 1e-9);
    }

    #[test]
    fn green_singleton_and_line_values() {
        // G(x,x) = 1/(1-alpha) on the unit ball
        let g = path(9);
        let ball = g.ball(4, 1).unwrap();
        let op = op0(g.clone());
        let col = green_column(&op, &ball, 4).unwrap();
        assert!((col[4] * op.graph().mu(4) - 1.0).abs() < 1e-12);
        let op_half = TransitionOperator::new(Arc::new(g), 0.5).unwrap();
        let col = green_column(&op_half, &ball, 4).unwrap();
        assert!((col[4] * op_half.graph().mu(4) - 2.0).abs() < 1e-12);

        // G(0,0) = R on the integer line at alpha = 0
        for r in [2u32, 3, 5, 8] {
            let g = path(2 * r + 3);
            let c = r + 1;
            let ball = g.ball(c, r).unwrap();
            let op = op0(g);
            let col = green_column(&op, &ball, c).unwrap();
            let g00 = col[c as usize] * op.graph().mu(c);
            assert!((g00 - r as f64).abs() < 1e-9, "G(0,0) = {g00} vs {r}");
        }
    }

    #[test]
    fn green_symmetry_and_offsource_harmonicity() {
        let g = gen_sierpinski(3).unwrap();
        let ball = g.ball(0, 5).unwrap();
        let op = TransitionOperator::new(Arc::new(g), 0.5).unwrap();
        let table = green_table(&op, &ball).unwrap();
        let k = table.len();
        for i in 0..k {
            for j in 0..k {
                assert!((table.at(i, j) - table.at(j, i)).abs() < 1e-10);
                assert!(table.at(i, j) >= -1e-14);
            }
        }
        // g(., x) is harmonic away from x inside the interior
        let x = ball.interior[0];
        let col = green_column(&op, &ball, x).unwrap();
        let gref = op.graph();
        for &v in &ball.interior {
            if v == x {
                continue;
            }
            let mut avg = 0.0;
            for &(u, w) in gref.neighbors(v) {
                avg += w * col[u as usize];
            }
            assert!((col[v as usize] - avg / gref.mu(v)).abs() < 1e-10);
        }
    }

    #[test]
    fn capacity_single_edge_and_symmetry() {
        let g = WeightedGraph::from_edges(2, vec![(0, 1, 1.0)], GraphMeta::new("k2")).unwrap();
        let r = capacity(&g, &[0], &[1]).unwrap();
        assert!((r.cap - 1.0).abs() < 1e-12);
        assert!((r.rho - 1.0).abs() < 1e-12);

        let g = gen_sierpinski(3).unwrap();
        let a = g.ball(0, 2).unwrap().interior;
        let dist = g.bfs_distances(0);
        let b: Vec<Vertex> = (0..g.n() as Vertex)
            .filter(|&v| dist[v as usize] >= 6)
            .collect();
        let ab = capacity(&g, &a, &b).unwrap().cap;
        let ba = capacity(&g, &b, &a).unwrap().cap;
        assert!((ab - ba).abs() < 1e-10);
        assert!(capacity(&g, &a, &a).is_err());
    }

    #[test]
    fn line_resistance_series_parallel() {
        // rho(0,1,3) = 3/2: two disjoint 3-edge paths in parallel
        let g = path(11);
        let rho = resistance_annulus(&g, 5, 1, 3).unwrap();
        assert!((rho - 1.5).abs() < 1e-10, "rho = {rho}");
        // general annulus on the line: (R - r + 1) / 2
        for (r, big) in [(1u32, 4u32), (2, 4), (2, 5), (1, 5)] {
            let g = path(2 * big + 3);
            let rho = resistance_annulus(&g, big + 1, r, big).unwrap();
            let expect = (big - r + 1) as f64 / 2.0;
            assert!((rho - expect).abs() < 1e-10, "rho({r},{big}) = {rho}");
        }
        assert!(resistance_annulus(&g, 5, 3, 3).is_err());
    }

    #[test]
    fn capacity_minimizer_beats_competitors() {
        let g = gen_lattice(2, 11).unwrap();
        let x = (5 * 11 + 5) as u32;
        let a = g.ball(x, 1).unwrap().interior;
        let dist = g.bfs_distances(x);
        let b: Vec<Vertex> = (0..g.n() as Vertex)
            .filter(|&v| dist[v as usize] >= 5)
            .collect();
        let result = capacity(&g, &a, &b).unwrap();
        // competitors: linear ramp in distance, quadratic ramp, step function
        let ramps: Vec<Box<dyn Fn(u32) -> f64>> = vec![
            Box::new(|d| 1.0 - d as f64 / 5.0),
            Box::new(|d| (1.0 - d as f64 / 5.0).powi(2)),
            Box::new(|d| if d < 3 { 1.0 } else { 0.0 }),
        ];
        for ramp in ramps {
            let f: Vec<f64> = (0..g.n() as Vertex)
                .map(|v| {
                    let d = dist[v as usize];
                    if d == 0 {
                        1.0
                    } else if d >= 5 {
                        0.0
                    } else {
                        ramp(d).clamp(0.0, 1.0)
                    }
                })
                .collect();
            let defined = vec![true; g.n()];
            let e = energy_over_defined(&g, &f, &defined);
            assert!(result.cap <= e + 1e-12, "minimizer {} vs competitor {e}", result.cap);
        }
    }

    #[test]
    fn rho_monotone_in_r_and_big_r() {
        let g = gen_sierpinski(5).unwrap();
        let x = 0u32;
        let r1 = resistance_annulus(&g, x, 1, 8).unwrap();
        let r2 = resistance_annulus(&g, x, 2, 8).unwrap();
        let r4 = resistance_annulus(&g, x, 4, 8).unwrap();
        assert!(r1 >= r2 && r2 >= r4);
        let s8 = resistance_annulus(&g, x, 2, 8).unwrap();
        let s12 = resistance_annulus(&g, x, 2, 12).unwrap();
        let s16 = resistance_annulus(&g, x, 2, 16).unwrap();
        assert!(s8 <= s12 && s12 <= s16);
    }

    #[test]
    fn green_resistance_line_closed_forms() {
        // on the line: g(w,0) = (R - |w|)/2 at alpha 0, rho = (R - r + 1)/2
        let op = op0(path(19));
        let rows = green_resistance_rows(&op, &[(9, 1, 4), (9, 2, 4), (9, 1, 8), (9, 2, 8)]).unwrap();
        for row in &rows {
            let expect_inf = (row.big_r - row.r) as f64 / 2.0;
            assert!((row.inf_green_closed_inner - expect_inf).abs() < 1e-10);
            assert!((row.sup_green_outside_inner - expect_inf).abs() < 1e-10);
            let expect_rho = (row.big_r - row.r + 1) as f64 / 2.0;
            assert!((row.rho - expect_rho).abs() < 1e-10);
        }
    }

    #[test]
    fn hit_before_exit_line_ruin() {
        // reach {d <= 1} before {d >= 5} from distance 4: (5-4)/(5-1) = 1/4,
        // independent of laziness
        let g = path(13);
        let sol = hit_before_exit(&g, 6, 1).unwrap();
        assert!((sol.values[(6 + 4) as usize] - 0.25).abs() < 1e-11);
        assert!((sol.values[(6 - 4) as usize] - 0.25).abs() < 1e-11);
        // already inside the closed ball
        assert_eq!(sol.values[6], 1.0);
        assert!((sol.values[7] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn c1_positive_on_harnack_families() {
        let g = gen_sierpinski(5).unwrap();
        let rep = c1_estimate(&g, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(rep.c1_hat > 0.0);
        let g = gen_lattice(2, 31).unwrap();
        let c = (15 * 31 + 15) as u32;
        let rep = c1_estimate(&g, &[(c, 1), (c, 2)]).unwrap();
        assert!(rep.c1_hat > 0.01, "c1 = {}", rep.c1_hat);
    }
}
