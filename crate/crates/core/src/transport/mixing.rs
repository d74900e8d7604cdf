use crate::error::{invalid, Error, Result};
use crate::fields::{CellField, Grid};

use super::measure::{split_difference, Metric};
use super::network_simplex::{solve_transportation, CostMatrix};

/// Mixing scale of a zero-mean field together with the quantities it is
/// built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingScale {
    /// `M(ρ) = exp(Σ π_ij log|x_i − y_j| / Σ π_ij)`, a length.
    pub value: f64,
    /// Optimal `Σ π_ij log|x_i − y_j|`.
    pub log_cost: f64,
    /// Transported mass `Σ π_ij = ∫ρ⁺`.
    pub plan_mass: f64,
    /// Domain volume, for the alternative normalization `log_cost / |Ω|`.
    pub volume: f64,
}

impl MixingScale {
    /// Exponent under domain-average normalization of the plan.
    pub fn domain_exponent(&self) -> f64 {
        self.log_cost / self.volume
    }
}

pub(crate) fn check_zero_mean(rho: &CellField) -> Result<()> {
    let scale = rho.lq_norm(1.0) * rho.grid().volume();
    if rho.mass().abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(invalid(format!("field must have zero mean, mass is {:e}", rho.mass())));
    }
    Ok(())
}

/// Mixing scale `M(ρ)`: exact optimal transport of `ρ⁺` onto `ρ⁻` with cost
/// `log|x − y|`, exponent averaged over the transported mass.
///
/// ```
/// use krlab::fields::{CellField, Grid};
/// use krlab::transport::mixing_scale;
///
/// let g = Grid::unit_interval(2).unwrap();
/// let stripe = CellField::new(g, vec![1.0, -1.0], 0.0).unwrap();
/// assert!((mixing_scale(&stripe).unwrap().value - 0.5).abs() < 1e-15);
/// ```
pub fn mixing_scale(rho: &CellField) -> Result<MixingScale> {
    if rho.values().iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("mixing scale of the zero field is undefined".into()));
    }
    check_zero_mean(rho)?;
    let zero = CellField::constant(*rho.grid(), 0.0);
    let (plus, minus) = split_difference(rho, &zero)?;
    let metric = Metric::of_grid(rho.grid());
    let (p, q) = (plus.points(), minus.points());
    let cost = CostMatrix::from_fn(p.len(), q.len(), |i, j| metric.distance(p[i], q[j]).ln())?;
    let sol = solve_transportation(plus.weights(), minus.weights(), &cost)?;
    let plan_mass = plus.mass();
    Ok(MixingScale {
        value: (sol.cost / plan_mass).exp(),
        log_cost: sol.cost,
        plan_mass,
        volume: rho.grid().volume(),
    })
}

/// `sign(ρ)` with ties sent to `+1`: restores a two-phase field after
/// numerical diffusion.
pub fn sign_field(rho: &CellField) -> CellField {
    let values = rho.values().iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
    CellField::new(*rho.grid(), values, rho.time()).expect("same grid")
}

/// `|∇ρ|_BV = 2 |∂{ρ = 1}| / |Ω|` for a two-phase field `ρ ∈ {±1}`;
/// interfaces across periodic boundaries count.
///
/// ```
/// use krlab::fields::{CellField, Grid};
/// use krlab::transport::bv_seminorm;
///
/// let g = Grid::new(&[(0.0, 1.0), (0.0, 1.0)], &[2, 2]).unwrap();
/// let checkerboard = CellField::new(g, vec![1.0, -1.0, -1.0, 1.0], 0.0).unwrap();
/// assert_eq!(bv_seminorm(&checkerboard).unwrap(), 4.0);
/// ```
pub fn bv_seminorm(rho: &CellField) -> Result<f64> {
    if rho.values().iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(invalid("BV seminorm needs a two-phase field with values ±1"));
    }
    Ok(2.0 * interface_area(rho.grid(), rho.values()) / rho.grid().volume())
}

fn interface_area(grid: &Grid, values: &[f64]) -> f64 {
    grid.faces().iter().filter(|f| values[f.lower] != values[f.upper]).map(|f| grid.face_area(f.axis)).sum()
}
