//! Exact solver for the balanced transportation problem
//! `min Σ c_ij x_ij` subject to `Σ_j x_ij = a_i`, `Σ_i x_ij = b_j`, `x ≥ 0`.
//!
//! Primal network simplex on the bipartite graph with one artificial root.
//! Supply nodes start connected to the root by `i → root`, demand nodes by
//! `root → j`, both with a large cost. The starting tree is strongly
//! feasible and the leaving arc rule (last blocking arc met when walking the
//! cycle from the apex) keeps it so, which rules out cycling on degenerate
//! pivots. Entering arcs are chosen by block search.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::neumaier_sum;

/// Largest number of cost entries accepted by the exact solver.
pub const MAX_ENTRIES: usize = 4_000_000;

/// Dense row-major cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn from_fn(rows: usize, cols: usize, cost: impl Fn(usize, usize) -> f64 + Sync) -> Result<Self> {
        let entries = rows.checked_mul(cols).unwrap_or(usize::MAX);
        if entries > MAX_ENTRIES {
            return Err(Error::SizeOverflow(entries));
        }
        let data: Vec<f64> = (0..entries).into_par_iter().map(|e| cost(e / cols, e % cols)).collect();
        if let Some(bad) = data.iter().position(|c| !c.is_finite()) {
            return Err(Error::Evaluation(format!("non-finite cost at entry ({}, {})", bad / cols, bad % cols)));
        }
        Ok(CostMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Optimal plan with a dual certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    /// Nonzero entries `(i, j, x_ij)`.
    pub plan: Vec<(usize, usize, f64)>,
    pub cost: f64,
    /// Dual potentials with `f_i + g_j ≤ c_ij` for every pair.
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub dual_value: f64,
    /// `(cost - dual_value) / max(|cost|, mass)`.
    pub gap: f64,
    /// Largest `|c_ij - f_i - g_j|` over the support of the plan.
    pub slackness: f64,
    pub pivots: usize,
}

/// Dual certificate for a feasible plan: recomputes `g` as the c-transform
/// of `f`, so the returned pair is dual feasible by construction.
pub(crate) fn certify(
    supply: &[f64],
    demand: &[f64],
    cost: &CostMatrix,
    plan: &[(usize, usize, f64)],
    mut f: Vec<f64>,
) -> (Vec<f64>, Vec<f64>, f64, f64, f64, f64) {
    let shift = if f.is_empty() { 0.0 } else { f.iter().sum::<f64>() / f.len() as f64 };
    f.iter_mut().for_each(|v| *v -= shift);
    let g: Vec<f64> = (0..cost.cols())
        .into_par_iter()
        .map(|j| (0..cost.rows()).map(|i| cost.get(i, j) - f[i]).fold(f64::INFINITY, f64::min))
        .collect();
    let primal = neumaier_sum(plan.iter().map(|&(i, j, x)| x * cost.get(i, j)));
    let dual = neumaier_sum(
        supply.iter().zip(&f).map(|(a, v)| a * v).chain(demand.iter().zip(&g).map(|(b, v)| b * v)),
    );
    let mass = neumaier_sum(supply.iter().copied());
    let gap = (primal - dual) / primal.abs().max(mass).max(f64::MIN_POSITIVE);
    let slackness = plan.iter().map(|&(i, j, _)| (cost.get(i, j) - f[i] - g[j]).abs()).fold(0.0, f64::max);
    (f, g, primal, dual, gap, slackness)
}

struct Simplex<'a> {
    n: usize,
    m: usize,
    cost: &'a CostMatrix,
    offset: f64,
    artificial: f64,
    positive_supply: Vec<bool>,
    tree_arcs: Vec<usize>,
    tree_flow: Vec<f64>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    up: Vec<bool>,
    depth: Vec<usize>,
    pi: Vec<f64>,
    // scratch space for rebuilding the tree
    adj_start: Vec<usize>,
    adj: Vec<(usize, usize)>,
    queue: Vec<usize>,
    seen: Vec<u64>,
    epoch: u64,
}

impl<'a> Simplex<'a> {
    fn root(&self) -> usize {
        self.n + self.m
    }

    fn ends(&self, arc: usize) -> (usize, usize) {
        let real = self.n * self.m;
        if arc < real {
            (arc / self.m, self.n + arc % self.m)
        } else if arc < real + self.n {
            // zero-supply sources hang below the root so that every
            // zero-flow tree arc points away from it
            let i = arc - real;
            if self.positive_supply[i] {
                (i, self.root())
            } else {
                (self.root(), i)
            }
        } else {
            (self.root(), self.n + arc - real - self.n)
        }
    }

    fn arc_cost(&self, arc: usize) -> f64 {
        if arc < self.n * self.m {
            self.cost.data[arc] - self.offset
        } else {
            self.artificial
        }
    }

    fn rebuild(&mut self) {
        let nodes = self.n + self.m + 1;
        self.adj_start.iter_mut().for_each(|v| *v = 0);
        for &arc in &self.tree_arcs {
            let (a, b) = self.ends(arc);
            self.adj_start[a + 1] += 1;
            self.adj_start[b + 1] += 1;
        }
        for k in 0..nodes {
            self.adj_start[k + 1] += self.adj_start[k];
        }
        let mut fill = self.adj_start.clone();
        for (t, &arc) in self.tree_arcs.iter().enumerate() {
            let (a, b) = self.ends(arc);
            self.adj[fill[a]] = (b, t);
            fill[a] += 1;
            self.adj[fill[b]] = (a, t);
            fill[b] += 1;
        }
        let root = self.root();
        self.epoch += 1;
        self.seen[root] = self.epoch;
        self.queue.clear();
        self.queue.push(root);
        self.parent[root] = usize::MAX;
        self.depth[root] = 0;
        self.pi[root] = 0.0;
        let mut head = 0;
        while head < self.queue.len() {
            let v = self.queue[head];
            head += 1;
            for k in self.adj_start[v]..self.adj_start[v + 1] {
                let (w, t) = self.adj[k];
                if self.seen[w] == self.epoch {
                    continue;
                }
                self.seen[w] = self.epoch;
                self.parent[w] = v;
                self.pred[w] = t;
                self.depth[w] = self.depth[v] + 1;
                let arc = self.tree_arcs[t];
                let (tail, _) = self.ends(arc);
                self.up[w] = tail == w;
                // reduced cost c + π_tail - π_head vanishes on tree arcs
                let c = self.arc_cost(arc);
                self.pi[w] = if self.up[w] { self.pi[v] - c } else { self.pi[v] + c };
                self.queue.push(w);
            }
        }
        debug_assert_eq!(self.queue.len(), nodes);
    }

    fn reduced_cost(&self, arc: usize) -> f64 {
        let (i, j) = (arc / self.m, self.n + arc % self.m);
        self.cost.data[arc] - self.offset + self.pi[i] - self.pi[j]
    }
}

/// Solves the balanced transportation problem exactly. `supply` and `demand`
/// must be nonnegative with equal sums.
pub fn solve_transportation(supply: &[f64], demand: &[f64], cost: &CostMatrix) -> Result<TransportSolution> {
    let (n, m) = (supply.len(), demand.len());
    if cost.rows() != n || cost.cols() != m {
        return Err(Error::InvalidArgument("cost matrix does not match the marginals".into()));
    }
    if supply.iter().chain(demand).any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidArgument("marginal weights must be finite and nonnegative".into()));
    }
    let (sa, sb) = (neumaier_sum(supply.iter().copied()), neumaier_sum(demand.iter().copied()));
    if (sa - sb).abs() > 1e-9 * sa.max(sb).max(f64::MIN_POSITIVE) {
        return Err(Error::UnbalancedMarginals(sa, sb));
    }
    if n == 0 || m == 0 {
        return Ok(TransportSolution {
            plan: Vec::new(),
            cost: 0.0,
            f: vec![0.0; n],
            g: vec![0.0; m],
            dual_value: 0.0,
            gap: 0.0,
            slackness: 0.0,
            pivots: 0,
        });
    }
    let offset = cost.data.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = cost.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - offset;
    let nodes = n + m + 1;
    let real = n * m;
    let mut s = Simplex {
        n,
        m,
        cost,
        offset,
        artificial: (spread + 1.0) * nodes as f64,
        positive_supply: supply.iter().map(|&a| a > 0.0).collect(),
        tree_arcs: (real..real + n + m).collect(),
        tree_flow: supply.iter().chain(demand).copied().collect(),
        parent: vec![usize::MAX; nodes],
        pred: vec![usize::MAX; nodes],
        up: vec![false; nodes],
        depth: vec![0; nodes],
        pi: vec![0.0; nodes],
        adj_start: vec![0; nodes + 1],
        adj: vec![(0, 0); 2 * (nodes - 1)],
        queue: Vec::with_capacity(nodes),
        seen: vec![0; nodes],
        epoch: 0,
    };
    s.rebuild();

    let block = ((real as f64).sqrt().ceil() as usize).max(16).min(real);
    let mut next = 0usize;
    let mut pivots = 0usize;
    let max_pivots = 50 * real + 10 * nodes + 1000;
    loop {
        let pi_scale = s.pi.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        let tol = 1e-12 * (1.0 + spread) + 4.0 * f64::EPSILON * pi_scale;
        // block search for the entering arc
        let mut entering = None;
        let mut best = -tol;
        let mut examined = 0;
        let mut in_block = 0;
        while examined < real {
            let arc = next;
            next = if next + 1 == real { 0 } else { next + 1 };
            examined += 1;
            in_block += 1;
            let rc = s.reduced_cost(arc);
            if rc < best {
                best = rc;
                entering = Some(arc);
            }
            if in_block == block {
                if entering.is_some() {
                    break;
                }
                in_block = 0;
            }
        }
        let Some(arc) = entering else { break };
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Convergence { iterations: pivots, residual: best });
        }

        let (first, second) = s.ends(arc);
        let (mut a, mut b) = (first, second);
        while a != b {
            if s.depth[a] >= s.depth[b] {
                a = s.parent[a];
            } else {
                b = s.parent[b];
            }
        }
        let join = a;
        let mut delta = f64::INFINITY;
        let mut leaving = usize::MAX;
        let mut w = first;
        while w != join {
            if s.up[w] {
                let d = s.tree_flow[s.pred[w]];
                if d < delta {
                    delta = d;
                    leaving = w;
                }
            }
            w = s.parent[w];
        }
        let mut w = second;
        while w != join {
            if !s.up[w] {
                let d = s.tree_flow[s.pred[w]];
                if d <= delta {
                    delta = d;
                    leaving = w;
                }
            }
            w = s.parent[w];
        }
        debug_assert!(leaving != usize::MAX, "transportation problems are bounded");
        let mut w = first;
        while w != join {
            let t = s.pred[w];
            s.tree_flow[t] += if s.up[w] { -delta } else { delta };
            w = s.parent[w];
        }
        let mut w = second;
        while w != join {
            let t = s.pred[w];
            s.tree_flow[t] += if s.up[w] { delta } else { -delta };
            w = s.parent[w];
        }
        let t = s.pred[leaving];
        s.tree_arcs[t] = arc;
        s.tree_flow[t] = delta;
        s.rebuild();
    }

    let mass = sa.max(sb);
    let mut plan = Vec::with_capacity(n + m);
    for (&arc, &x) in s.tree_arcs.iter().zip(&s.tree_flow) {
        if arc >= real {
            if x > 1e-12 * mass {
                return Err(Error::Degenerate(format!("artificial arc keeps flow {x:e}")));
            }
        } else if x > 0.0 {
            plan.push((arc / m, arc % m, x));
        }
    }
    plan.sort_by(|p, q| (p.0, p.1).cmp(&(q.0, q.1)));
    let f: Vec<f64> = (0..n).map(|i| -s.pi[i] + offset).collect();
    let (f, g, primal, dual, gap, slackness) = certify(supply, demand, cost, &plan, f);
    Ok(TransportSolution { plan, cost: primal, f, g, dual_value: dual, gap, slackness, pivots })
}
