use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{builtin_velocity, velocity_distance_lp, Builtin, CellField, Grid};

use super::{kr_or_zero, spread, Contract, RateReport, StudyConfig, StudyId, SweepRow, Table};

/// Density transported by the oscillating field `u_k` from `ρ̄ ≡ 1`:
/// `ρ_k(t, x) = (1 + tan²(πkx)) / (e^t + e^{−t} tan²(πkx))`, written as
/// `1 / (e^t cos² + e^{−t} sin²)` so it stays finite where the tangent blows up.
///
/// ```
/// use krlab::experiments::exact_oscillating_solution;
///
/// assert!((exact_oscillating_solution(3.0, 1.0, 0.0) - (-1f64).exp()).abs() < 1e-15);
/// assert!((exact_oscillating_solution(3.0, 1.0, 1.0 / 12.0) - 1.0 / 1f64.cosh()).abs() < 1e-15);
/// ```
pub fn exact_oscillating_solution(k: f64, t: f64, x: f64) -> f64 {
    let (s, c) = (PI * k * x).sin_cos();
    1.0 / (t.exp() * c * c + (-t).exp() * s * s)
}

/// Exact cell averages of `ρ_k(t, ·)` on a one-dimensional grid, from the
/// primitive `x ↦ atan(e^{−t} tan(πkx)) / (πk)` (the backward flow map)
/// unwrapped across periods.
pub fn oscillating_cell_averages(k: f64, t: f64, grid: &Grid) -> Result<CellField> {
    // reduce kx (exact on dyadic grids) rather than πkx so that the branch
    // edges at half-integers are hit exactly
    let primitive = |x: f64| {
        let n = (k * x).round();
        (n + ((-t).exp() * (PI * (k * x - n)).tan()).atan() / PI) / k
    };
    let values = (0..grid.len())
        .map(|c| {
            let (a, b) = grid.cell_bounds(c, 0);
            (primitive(b) - primitive(a)) / (b - a)
        })
        .collect();
    CellField::new(*grid, values, t)
}

/// `δ_k(t) = ∫_0^t ‖u_k − 0‖_{L^p} = t/(2πk) · (⨍ |sin 2πkx|^p)^{1/p}`, by
/// Gauss quadrature on 16 cells per oscillation.
pub fn oscillating_delta(k: f64, t: f64, p: f64) -> Result<f64> {
    let u = builtin_velocity("oscillating", &[k])?;
    let grid = Grid::unit_interval(16 * k as usize)?;
    Ok(t * velocity_distance_lp(&u, &Builtin::Zero, 0.0, p, &grid))
}

/// `(x, ρ_k(t, x))` at the centres of `cells` equal cells of `[0, 1]`.
pub fn oscillating_profile(k: f64, t: f64, cells: usize) -> Vec<(f64, f64)> {
    (0..cells)
        .map(|i| {
            let x = (i as f64 + 0.5) / cells as f64;
            (x, exact_oscillating_solution(k, t, x))
        })
        .collect()
}

/// Smallest admissible sampling of one oscillation.
const MIN_CELLS_PER_OSCILLATION: usize = 16;

struct Point {
    delta: f64,
    kr: f64,
    l1: f64,
}

fn sweep_point(k: f64, config: &StudyConfig) -> Result<Point> {
    let grid = Grid::new(&[(0.0, 1.0)], &[config.cells * k as usize])?;
    let rho_k = oscillating_cell_averages(k, config.t, &grid)?;
    let rho = CellField::constant(grid, 1.0);
    let delta = oscillating_delta(k, config.t, config.p)?;
    Ok(Point { delta, kr: kr_or_zero(&rho, &rho_k, delta)?, l1: rho.l1_distance(&rho_k)? })
}

/// Weak versus strong convergence for the oscillating family: the `L¹`
/// distance between `ρ ≡ 1` and `ρ_k` does not decay in `k` while
/// `D_{δ_k}(ρ, ρ_k)` stays bounded and coincides with `D_{δ_1}(ρ, ρ_1)`
/// after rescaling lengths by `k`.
pub fn study_oscillating(config: &StudyConfig) -> Result<RateReport> {
    if config.cells < MIN_CELLS_PER_OSCILLATION {
        return Err(Error::UnderResolved(format!(
            "{} cells per oscillation, at least {MIN_CELLS_PER_OSCILLATION} needed",
            config.cells
        )));
    }
    let points: Vec<Point> = config.parameters.par_iter().map(|&k| sweep_point(k, config)).collect::<Result<_>>()?;
    let reference = sweep_point(1.0, config)?;

    let mut report = RateReport::new(StudyId::Oscillating);
    let rows = config
        .parameters
        .iter()
        .zip(&points)
        .map(|(&k, pt)| SweepRow {
            parameter: k,
            delta_scale: Some(pt.delta),
            kr_value: Some(pt.kr),
            l1_distance: Some(pt.l1),
            ..Default::default()
        })
        .collect();
    report.tables.push(Table { name: "oscillating".into(), rows });
    report.add_rate_fit("kr", "oscillating", |r| r.kr_value);
    report.add_rate_fit("l1", "oscillating", |r| r.l1_distance);
    report.add_rate_fit("delta", "oscillating", |r| r.delta_scale);
    report.constants.insert("kr_reference_k1".into(), reference.kr);
    report.constants.insert("l1_reference_k1".into(), reference.l1);

    let l1: Vec<f64> = points.iter().map(|p| p.l1).collect();
    let (lo, hi) = spread(&l1);
    report.contracts.push(Contract::new(
        "l1 does not decay",
        (hi - lo) / hi < 0.02 && lo >= 0.2,
        format!("L1 in [{lo:.6}, {hi:.6}], relative spread {:.2e} (< 2%), min >= 0.2", (hi - lo) / hi),
    ));
    let kr: Vec<f64> = points.iter().map(|p| p.kr).collect();
    let (lo, hi) = spread(&kr);
    report.contracts.push(Contract::new(
        "kr bounded",
        lo > 0.0 && hi / lo <= 1.2,
        format!("D in [{lo:.6}, {hi:.6}], max/min {:.4} (<= 1.2)", hi / lo),
    ));
    let worst = kr.iter().map(|d| (d / reference.kr - 1.0).abs()).fold(0.0, f64::max);
    report.contracts.push(Contract::new(
        "rescaling identity",
        worst <= 0.05,
        format!("max |D_k / D_1 - 1| = {worst:.2e} (<= 5%), D_1 = {:.6}", reference.kr),
    ));
    Ok(report)
}
