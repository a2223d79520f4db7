//! Exact Monge-Kantorovich distances between finite discrete measures.
//!
//! `dist_{MK,r}(mu, nu) = (min_{pi in Pi(mu, nu)} int |x - y|^r dpi)^{1/r}`
//! for `r` in `{1, 2}`. Three exact solvers sit behind [`mk_distance`]:
//!
//! * the monotone (quantile) coupling on the line, optimal for any convex
//!   cost in one dimension;
//! * a shortest-augmenting-path assignment solver for two uniform clouds of
//!   the same size, where an optimal plan is a permutation;
//! * successive shortest paths with node potentials on the complete
//!   bipartite graph for everything else.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::measure::{distance, EmpiricalMeasure};

const MARGINAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    One,
    Two,
}

impl Exponent {
    pub fn from_int(r: u32) -> Result<Self> {
        match r {
            1 => Ok(Exponent::One),
            2 => Ok(Exponent::Two),
            _ => Err(Error::InvalidInput(alloc::format!("exponent {r} not in {{1, 2}}"))),
        }
    }

    #[inline]
    fn cost(self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Exponent::One => distance(x, y),
            Exponent::Two => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum(),
        }
    }

    fn root(self, c: f64) -> f64 {
        match self {
            Exponent::One => c,
            Exponent::Two => c.max(0.0).sqrt(),
        }
    }
}

/// A coupling of two discrete measures, stored by its nonzero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub sources: usize,
    pub targets: usize,
    /// `(i, j, mass)` with `mass > 0`.
    pub entries: Vec<(usize, usize, f64)>,
    /// `int |x - y|^r dpi`
    pub cost: f64,
}

impl TransportPlan {
    /// Dense `sources x targets` row-major coupling matrix.
    pub fn dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.sources * self.targets];
        for &(i, j, m) in &self.entries {
            out[i * self.targets + j] += m;
        }
        out
    }

    /// Largest deviation of the marginals from the given weights.
    pub fn marginal_defect(&self, mu_weights: &[f64], nu_weights: &[f64]) -> f64 {
        let mut rows = vec![0.0; self.sources];
        let mut cols = vec![0.0; self.targets];
        for &(i, j, m) in &self.entries {
            rows[i] += m;
            cols[j] += m;
        }
        let a = rows.iter().zip(mu_weights).map(|(x, w)| (x - w).abs());
        let b = cols.iter().zip(nu_weights).map(|(x, w)| (x - w).abs());
        a.chain(b).fold(0.0, f64::max)
    }

    pub fn is_feasible(&self, mu_weights: &[f64], nu_weights: &[f64]) -> bool {
        self.entries.iter().all(|e| e.2 >= 0.0) && self.marginal_defect(mu_weights, nu_weights) <= MARGINAL_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transport {
    pub distance: f64,
    pub plan: TransportPlan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Monotone coupling in 1D, assignment for equal uniform clouds, min-cost
    /// flow otherwise.
    #[default]
    Auto,
    Monotone,
    Assignment,
    MinCostFlow,
}

pub fn mk_distance(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, r: Exponent) -> Result<Transport> {
    mk_distance_with(mu, nu, r, Solver::Auto)
}

pub fn mk_distance_with(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    r: Exponent,
    solver: Solver,
) -> Result<Transport> {
    check_measures(mu, nu)?;
    let equal_uniform = mu.len() == nu.len() && is_uniform(mu) && is_uniform(nu);
    let solver = match solver {
        Solver::Auto if mu.dim() == 1 => Solver::Monotone,
        Solver::Auto if equal_uniform => Solver::Assignment,
        Solver::Auto => Solver::MinCostFlow,
        other => other,
    };
    let plan = match solver {
        Solver::Monotone => {
            if mu.dim() != 1 {
                return Err(Error::InvalidInput("monotone coupling needs one-dimensional measures".into()));
            }
            monotone_plan(mu, nu, r)
        }
        Solver::Assignment => {
            if !equal_uniform {
                return Err(Error::InvalidInput("assignment needs uniform clouds of equal size".into()));
            }
            assignment_plan(mu, nu, r)?.0
        }
        Solver::MinCostFlow => min_cost_flow_plan(mu, nu, r)?,
        Solver::Auto => unreachable!(),
    };
    Ok(Transport { distance: r.root(plan.cost), plan })
}

fn check_measures(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<()> {
    if mu.is_empty() || nu.is_empty() {
        return Err(Error::InvalidInput("empty measure".into()));
    }
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: nu.dim() });
    }
    for m in [mu, nu] {
        let total: f64 = m.weights().iter().sum();
        if !m.is_normalized() || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(alloc::format!("measure has mass {total}, not 1")));
        }
    }
    Ok(())
}

fn is_uniform(m: &EmpiricalMeasure) -> bool {
    let w = 1.0 / m.len() as f64;
    m.weights().iter().all(|x| (x - w).abs() <= 1e-15)
}

fn monotone_plan(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, r: Exponent) -> TransportPlan {
    let sorted = |m: &EmpiricalMeasure| {
        let mut idx: Vec<usize> = (0..m.len()).collect();
        idx.sort_by(|&a, &b| m.point(a)[0].total_cmp(&m.point(b)[0]).then(a.cmp(&b)));
        idx
    };
    let (sx, sy) = (sorted(mu), sorted(nu));
    let (wx, wy) = (mu.weights(), nu.weights());
    // exact arithmetic for uniform weights: masses in units of 1/(n m)
    let uniform = is_uniform(mu) && is_uniform(nu);
    let (n, m) = (mu.len(), nu.len());
    let mut entries = Vec::with_capacity(n + m);
    let mut cost = 0.0;
    let (mut a, mut b) = (0usize, 0usize);
    if uniform {
        let (mut left_x, mut left_y) = (m, n);
        let unit = 1.0 / (n as f64 * m as f64);
        while a < n && b < m {
            let q = left_x.min(left_y);
            let (i, j) = (sx[a], sy[b]);
            let mass = q as f64 * unit;
            entries.push((i, j, mass));
            cost += mass * r.cost(mu.point(i), nu.point(j));
            left_x -= q;
            left_y -= q;
            if left_x == 0 {
                a += 1;
                left_x = m;
            }
            if left_y == 0 {
                b += 1;
                left_y = n;
            }
        }
    } else {
        let (mut left_x, mut left_y) = (wx[sx[0]], wy[sy[0]]);
        while a < n && b < m {
            let q = left_x.min(left_y);
            let (i, j) = (sx[a], sy[b]);
            if q > 0.0 {
                entries.push((i, j, q));
                cost += q * r.cost(mu.point(i), nu.point(j));
            }
            left_x -= q;
            left_y -= q;
            if left_x <= 1e-15 {
                a += 1;
                if a < n {
                    left_x = wx[sx[a]];
                }
            }
            if left_y <= 1e-15 {
                b += 1;
                if b < m {
                    left_y = wy[sy[b]];
                }
            }
        }
    }
    TransportPlan { sources: n, targets: m, entries, cost }
}

/// Dual variables of the assignment problem: `u_i + v_j <= c_ij` with
/// equality on matched pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentDuals {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `col_for_row[i]` is the target matched to source `i`.
    pub col_for_row: Vec<usize>,
}

/// Minimum-cost perfect matching on a square cost matrix (row-major) by
/// shortest augmenting paths with dual updates.
pub fn solve_assignment(n: usize, cost: &[f64]) -> Result<AssignmentDuals> {
    if cost.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, found: cost.len() });
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("cost matrix has non-finite entries".into()));
    }
    const NONE: usize = usize::MAX;
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut col_for_row = vec![NONE; n];
    let mut row_for_col = vec![NONE; n];
    let mut path = vec![NONE; n];
    let mut shortest = vec![f64::INFINITY; n];
    let mut scanned_rows = vec![false; n];
    let mut scanned_cols = vec![false; n];
    let mut remaining = vec![0usize; n];

    for current in 0..n {
        shortest.fill(f64::INFINITY);
        scanned_rows.fill(false);
        scanned_cols.fill(false);
        // reverse order so that ties resolve to the lowest column index
        for (k, r) in remaining.iter_mut().enumerate() {
            *r = n - 1 - k;
        }
        let mut left = n;
        let mut min_val = 0.0;
        let mut i = current;
        let sink = loop {
            scanned_rows[i] = true;
            let mut lowest = f64::INFINITY;
            let mut index = NONE;
            for (it, &j) in remaining[..left].iter().enumerate() {
                let reduced = min_val + cost[i * n + j] - u[i] - v[j];
                if reduced < shortest[j] {
                    path[j] = i;
                    shortest[j] = reduced;
                }
                if shortest[j] < lowest || (shortest[j] == lowest && row_for_col[j] == NONE) {
                    lowest = shortest[j];
                    index = it;
                }
            }
            min_val = lowest;
            if index == NONE || !min_val.is_finite() {
                return Err(Error::InvalidInput("assignment problem is infeasible".into()));
            }
            let j = remaining[index];
            scanned_cols[j] = true;
            left -= 1;
            remaining[index] = remaining[left];
            if row_for_col[j] == NONE {
                break j;
            }
            i = row_for_col[j];
        };

        u[current] += min_val;
        for r in 0..n {
            if scanned_rows[r] && r != current {
                u[r] += min_val - shortest[col_for_row[r]];
            }
        }
        for c in 0..n {
            if scanned_cols[c] {
                v[c] -= min_val - shortest[c];
            }
        }
        let mut j = sink;
        loop {
            let r = path[j];
            row_for_col[j] = r;
            core::mem::swap(&mut col_for_row[r], &mut j);
            if r == current {
                break;
            }
        }
    }
    Ok(AssignmentDuals { u, v, col_for_row })
}

fn cost_matrix(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, r: Exponent) -> Vec<f64> {
    let mut c = Vec::with_capacity(mu.len() * nu.len());
    for (x, _) in mu.iter() {
        for (y, _) in nu.iter() {
            c.push(r.cost(x, y));
        }
    }
    c
}

fn assignment_plan(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    r: Exponent,
) -> Result<(TransportPlan, AssignmentDuals)> {
    let n = mu.len();
    let cost = cost_matrix(mu, nu, r);
    let duals = solve_assignment(n, &cost)?;
    let w = 1.0 / n as f64;
    let total: f64 = duals.col_for_row.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    let entries = duals.col_for_row.iter().enumerate().map(|(i, &j)| (i, j, w)).collect();
    Ok((TransportPlan { sources: n, targets: n, entries, cost: total / n as f64 }, duals))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn min_cost_flow_plan(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, r: Exponent) -> Result<TransportPlan> {
    let (n, m) = (mu.len(), nu.len());
    let cost = cost_matrix(mu, nu, r);
    // Uniform weights are rescaled to integer supplies (total lcm(n, m)) so
    // that every augmentation moves an exact integer amount.
    let uniform = is_uniform(mu) && is_uniform(nu);
    let (supply, demand, scale, eps) = if uniform {
        let total = n / gcd(n, m) * m;
        (vec![(total / n) as f64; n], vec![(total / m) as f64; m], total as f64, 0.5)
    } else {
        (mu.weights().to_vec(), nu.weights().to_vec(), 1.0, 1e-15)
    };
    let flow = successive_shortest_paths(n, m, &cost, supply, demand, eps)?;
    let mut entries = Vec::new();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..m {
            let f = flow[i * m + j];
            if f > 0.0 {
                let mass = f / scale;
                entries.push((i, j, mass));
                total += mass * cost[i * m + j];
            }
        }
    }
    Ok(TransportPlan { sources: n, targets: m, entries, cost: total })
}

// Transportation problem on the complete bipartite graph. Nodes 0..n are
// sources, n..n+m targets. Dense Dijkstra on reduced costs, multi-source
// from every source with remaining supply.
fn successive_shortest_paths(
    n: usize,
    m: usize,
    cost: &[f64],
    mut supply: Vec<f64>,
    mut demand: Vec<f64>,
    eps: f64,
) -> Result<Vec<f64>> {
    let nodes = n + m;
    let mut flow = vec![0.0; n * m];
    let mut potential = vec![0.0; nodes];
    let mut dist = vec![0.0; nodes];
    let mut parent = vec![usize::MAX; nodes];
    let mut done = vec![false; nodes];
    let max_rounds = 4 * (n + m) * (n + m) + 16;
    for _ in 0..max_rounds {
        if supply.iter().all(|s| *s <= eps) {
            return Ok(flow);
        }
        dist.fill(f64::INFINITY);
        parent.fill(usize::MAX);
        done.fill(false);
        for i in 0..n {
            if supply[i] > eps {
                dist[i] = 0.0;
            }
        }
        loop {
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for (k, d) in dist.iter().enumerate() {
                if !done[k] && *d < best_d {
                    best_d = *d;
                    best = k;
                }
            }
            if best == usize::MAX {
                break;
            }
            done[best] = true;
            if best < n {
                let i = best;
                for j in 0..m {
                    let t = n + j;
                    if done[t] {
                        continue;
                    }
                    let reduced = cost[i * m + j] + potential[i] - potential[t];
                    let cand = best_d + reduced.max(0.0);
                    if cand < dist[t] {
                        dist[t] = cand;
                        parent[t] = i;
                    }
                }
            } else {
                let j = best - n;
                for i in 0..n {
                    if done[i] || flow[i * m + j] <= eps {
                        continue;
                    }
                    let reduced = -cost[i * m + j] + potential[best] - potential[i];
                    let cand = best_d + reduced.max(0.0);
                    if cand < dist[i] {
                        dist[i] = cand;
                        parent[i] = best;
                    }
                }
            }
        }
        // nearest target with unmet demand, lowest index on ties
        let mut sink = usize::MAX;
        let mut sink_d = f64::INFINITY;
        for j in 0..m {
            let t = n + j;
            if demand[j] > eps && dist[t] < sink_d {
                sink_d = dist[t];
                sink = t;
            }
        }
        if sink == usize::MAX {
            return Err(Error::InvalidInput("transportation problem is infeasible".into()));
        }
        for k in 0..nodes {
            potential[k] += dist[k].min(sink_d);
        }
        // bottleneck along the path
        let mut amount = demand[sink - n];
        let mut node = sink;
        while parent[node] != usize::MAX {
            let p = parent[node];
            if node < n {
                // reverse edge target p -> source node
                amount = amount.min(flow[node * m + (p - n)]);
            }
            node = p;
        }
        amount = amount.min(supply[node]);
        let source = node;
        let mut node = sink;
        while parent[node] != usize::MAX {
            let p = parent[node];
            if node >= n {
                flow[p * m + (node - n)] += amount;
            } else {
                flow[node * m + (p - n)] -= amount;
            }
            node = p;
        }
        supply[source] -= amount;
        demand[sink - n] -= amount;
    }
    Err(Error::IterationLimit { iterations: max_rounds, deviations: Vec::new() })
}

/// Exact `dist_{MK,1}` between two uniform clouds of equal size `N <= 8`
/// by enumerating all `N!` matchings.
pub fn brute_force_w1(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    check_measures(mu, nu)?;
    let n = mu.len();
    if nu.len() != n || !is_uniform(mu) || !is_uniform(nu) {
        return Err(Error::InvalidInput("brute force needs uniform clouds of equal size".into()));
    }
    if n > 8 {
        return Err(Error::InvalidInput(alloc::format!("refusing {n}! permutations")));
    }
    let cost = cost_matrix(mu, nu, Exponent::One);
    let mut perm: Vec<usize> = (0..n).collect();
    let eval = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum::<f64>();
    let mut best = eval(&perm);
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(eval(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best / n as f64)
}

/// Best Kantorovich-Rubinstein lower bound `max_phi |<mu - nu, phi>|` over
/// candidates, each certified 1-Lipschitz on the union of the supports.
pub fn kr_dual_bound(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    candidates: &[&dyn Fn(&[f64]) -> f64],
) -> Result<f64> {
    check_measures(mu, nu)?;
    let support: Vec<&[f64]> = mu.iter().chain(nu.iter()).map(|(z, _)| z).collect();
    let mut best = 0.0f64;
    for phi in candidates {
        let values: Vec<f64> = support.iter().map(|z| phi(z)).collect();
        for a in 0..support.len() {
            for b in a + 1..support.len() {
                let gap = distance(support[a], support[b]);
                let jump = (values[a] - values[b]).abs();
                if jump > (1.0 + 1e-9) * gap + 1e-15 {
                    let quotient = if gap > 0.0 { jump / gap } else { f64::INFINITY };
                    return Err(Error::LipschitzViolation { first: a, second: b, quotient });
                }
            }
        }
        let (head, tail) = values.split_at(mu.len());
        let lhs: f64 = head.iter().zip(mu.weights()).map(|(v, w)| v * w).sum();
        let rhs: f64 = tail.iter().zip(nu.weights()).map(|(v, w)| v * w).sum();
        best = best.max((lhs - rhs).abs());
    }
    Ok(best)
}

/// 1-Lipschitz Kantorovich potential `phi(x) = min_j (|x - y_j| - v_j)` built
/// from the assignment duals of two uniform clouds of equal size.
#[derive(Debug, Clone)]
pub struct DualPotential {
    dim: usize,
    targets: Vec<f64>,
    offsets: Vec<f64>,
}

impl DualPotential {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.targets
            .chunks_exact(self.dim)
            .zip(&self.offsets)
            .map(|(y, v)| distance(x, y) - v)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn optimal_dual_potential(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<DualPotential> {
    check_measures(mu, nu)?;
    if mu.len() != nu.len() || !is_uniform(mu) || !is_uniform(nu) {
        return Err(Error::InvalidInput("dual potential needs uniform clouds of equal size".into()));
    }
    let (_, duals) = assignment_plan(mu, nu, Exponent::One)?;
    Ok(DualPotential { dim: nu.dim(), targets: nu.points().to_vec(), offsets: duals.v })
}
