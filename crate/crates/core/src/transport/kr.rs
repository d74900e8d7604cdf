use crate::error::{Error, Result};
use crate::fields::CellField;

use super::measure::{split_difference, DiscreteMeasure, KrResult, KrSetup, TransportPlan};
use super::network_simplex::{solve_transportation, CostMatrix};

pub(crate) fn check_balanced(plus: &DiscreteMeasure, minus: &DiscreteMeasure) -> Result<()> {
    let (a, b) = (plus.mass(), minus.mass());
    if (a - b).abs() > 1e-9 * a.max(b) || (a == 0.0) != (b == 0.0) {
        return Err(Error::UnbalancedMarginals(a, b));
    }
    Ok(())
}

pub(crate) fn log_cost_matrix(plus: &DiscreteMeasure, minus: &DiscreteMeasure, setup: &KrSetup) -> Result<CostMatrix> {
    let (p, q) = (plus.points(), minus.points());
    CostMatrix::from_fn(p.len(), q.len(), |i, j| setup.cost(p[i], q[j]))
}

/// Exact `D_δ(ρ⁺, ρ⁻)` with cost `log(|x − y| / δ + 1)` by network simplex.
///
/// ```
/// use krlab::transport::{kr_exact, DiscreteMeasure, KrSetup};
///
/// let plus = DiscreteMeasure::on_line(&[0.0], &[1.0]).unwrap();
/// let minus = DiscreteMeasure::on_line(&[0.3], &[1.0]).unwrap();
/// let r = kr_exact(&plus, &minus, &KrSetup::new(0.1, 1.0)).unwrap();
/// assert!((r.value - 4f64.ln()).abs() < 1e-12);
/// ```
pub fn kr_exact(plus: &DiscreteMeasure, minus: &DiscreteMeasure, setup: &KrSetup) -> Result<KrResult> {
    setup.validate()?;
    check_balanced(plus, minus)?;
    if plus.is_empty() {
        return Ok(KrResult::empty(setup.delta));
    }
    let cost = log_cost_matrix(plus, minus, setup)?;
    let sol = solve_transportation(plus.weights(), minus.weights(), &cost)?;
    let plan = TransportPlan { entries: sol.plan, sources: plus.len(), targets: minus.len() };
    let mass = plus.mass();
    Ok(KrResult {
        value: setup.normalize(sol.cost, mass),
        delta: setup.delta,
        cost: sol.cost,
        plan,
        dual_gap: sol.gap,
        slackness: sol.slackness,
        iterations: sol.pivots,
    })
}

/// `D_δ(ρ₁, ρ₂)` of two fields on the same grid, through the split of
/// their difference. The metric and volume come from the grid.
pub fn kr_distance(rho1: &CellField, rho2: &CellField, setup: &KrSetup) -> Result<KrResult> {
    let (plus, minus) = split_difference(rho1, rho2)?;
    kr_exact(&plus, &minus, setup)
}
