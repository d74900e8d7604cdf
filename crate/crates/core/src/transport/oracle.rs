use crate::error::{invalid, Result};

use super::network_simplex::CostMatrix;

/// Largest number of cost entries the vertex enumeration accepts.
pub const ENUMERATION_LIMIT: usize = 16;

/// Minimum of `Σ c_ij x_ij` over all vertices of the transportation
/// polytope, found by trying every basis: every set of `n + m − 1` cells
/// forming a spanning tree of the bipartite graph, solved by leaf peeling.
///
/// Exponential in the problem size; meant for cross-checking the network
/// simplex on tiny instances. Returns the optimal value and plan.
pub fn enumerate_vertices(
    supply: &[f64],
    demand: &[f64],
    cost: &CostMatrix,
) -> Result<(f64, Vec<(usize, usize, f64)>)> {
    let (n, m) = (supply.len(), demand.len());
    if n == 0 || m == 0 || n * m > ENUMERATION_LIMIT {
        return Err(invalid(format!("vertex enumeration needs 1 ≤ n·m ≤ {ENUMERATION_LIMIT}")));
    }
    let basis = n + m - 1;
    let scale = supply.iter().sum::<f64>().max(1.0);
    let mut best: Option<(f64, Vec<(usize, usize, f64)>)> = None;
    for mask in 0u32..(1u32 << (n * m)) {
        if mask.count_ones() as usize != basis {
            continue;
        }
        let cells: Vec<(usize, usize)> =
            (0..n * m).filter(|e| mask & (1 << e) != 0).map(|e| (e / m, e % m)).collect();
        let Some(flows) = peel(supply, demand, &cells) else { continue };
        if flows.iter().any(|&x| x < -1e-12 * scale) {
            continue;
        }
        let value: f64 = cells.iter().zip(&flows).map(|(&(i, j), x)| x * cost.get(i, j)).sum();
        if best.as_ref().map_or(true, |b| value < b.0) {
            let plan = cells.iter().zip(&flows).filter(|(_, &x)| x > 0.0).map(|(&(i, j), &x)| (i, j, x)).collect();
            best = Some((value, plan));
        }
    }
    best.ok_or_else(|| invalid("no feasible vertex; marginals are unbalanced"))
}

/// Unique flows on a spanning-tree basis, or `None` if `cells` contains a
/// cycle.
fn peel(supply: &[f64], demand: &[f64], cells: &[(usize, usize)]) -> Option<Vec<f64>> {
    let n = supply.len();
    let mut residual: Vec<f64> = supply.iter().chain(demand).copied().collect();
    let mut degree = vec![0usize; residual.len()];
    for &(i, j) in cells {
        degree[i] += 1;
        degree[n + j] += 1;
    }
    let mut flows = vec![0.0; cells.len()];
    let mut solved = vec![false; cells.len()];
    for _ in 0..cells.len() {
        let (c, leaf) = cells.iter().enumerate().find_map(|(c, &(i, j))| {
            if solved[c] {
                None
            } else if degree[i] == 1 {
                Some((c, i))
            } else if degree[n + j] == 1 {
                Some((c, n + j))
            } else {
                None
            }
        })?;
        let (i, j) = cells[c];
        let other = if leaf == i { n + j } else { i };
        flows[c] = residual[leaf];
        residual[other] -= residual[leaf];
        residual[leaf] = 0.0;
        degree[i] -= 1;
        degree[n + j] -= 1;
        solved[c] = true;
    }
    Some(flows)
}
