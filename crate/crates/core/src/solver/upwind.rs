use crate::error::{invalid, Error, Result};
use crate::fields::{boundary_normal_speed, CellField, Grid, VelocityField};

use super::flux::{cfl_step, face_fluxes, FluxTable, DEFAULT_CFL};
use super::{clip_to_snapshot, Diagnostics, SolveReport};

/// Outflow factors above `1 + STABILITY_SLACK` are CFL violations. The slack
/// admits unit Courant numbers, which hit 1 up to rounding.
const STABILITY_SLACK: f64 = 1e-12;

/// Options for [`solve_upwind`].
#[derive(Debug, Clone, PartialEq)]
pub struct UpwindOptions {
    /// CFL safety factor `λ ∈ (0, 1]`.
    pub cfl: f64,
    /// Times at which to store a copy of the field.
    pub snapshot_times: Vec<f64>,
}

impl Default for UpwindOptions {
    fn default() -> Self {
        UpwindOptions { cfl: DEFAULT_CFL, snapshot_times: Vec::new() }
    }
}

impl UpwindOptions {
    pub fn with_cfl(cfl: f64) -> Self {
        UpwindOptions { cfl, ..Default::default() }
    }
}

/// One step of the upwind scheme
/// `ρ_K ← ρ_K + δt Σ_{L∼K} (|K|L| / |K|)(u_LK^+ ρ_L − u_KL^+ ρ_K)`.
///
/// Mass leaving one cell is added to its neighbour in the same operation,
/// so the scheme conserves mass up to rounding.
///
/// ```
/// use krlab::fields::{builtin_velocity, CellField, Grid};
/// use krlab::solver::{face_fluxes, upwind_step};
///
/// let grid = Grid::torus(&[(0.0, 1.0)], &[3]).unwrap();
/// let u = builtin_velocity("constant", &[1.0]).unwrap();
/// let rho = CellField::new(grid, vec![1.0, 0.0, 0.0], 0.0).unwrap();
/// let next = upwind_step(&rho, &face_fluxes(&u, &grid, 0.0, 1.0 / 6.0)).unwrap();
/// assert_eq!(next.values(), &[0.5, 0.5, 0.0]);
/// ```
pub fn upwind_step(field: &CellField, fluxes: &FluxTable) -> Result<CellField> {
    let grid = field.grid();
    if grid != fluxes.grid() {
        return Err(invalid("flux table and field live on different grids"));
    }
    for (cell, &factor) in fluxes.outflow_factors().iter().enumerate() {
        if factor > 1.0 + STABILITY_SLACK {
            return Err(Error::Stability { cell, factor });
        }
    }
    let rho = field.values();
    let mut next = rho.to_vec();
    let dt = fluxes.dt();
    let vol = grid.cell_volume();
    for (f, &u) in fluxes.faces().iter().zip(fluxes.flows()) {
        let a = dt * grid.face_area(f.axis) / vol;
        let moved = if u > 0.0 { a * u * rho[f.lower] } else { a * u * rho[f.upper] };
        next[f.lower] -= moved;
        next[f.upper] += moved;
    }
    CellField::new(*grid, next, fluxes.time() + dt)
}

pub(crate) fn check_setup(field: &dyn VelocityField, grid: &Grid, horizon: f64) -> Result<()> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(invalid(format!("final time must be positive, got {horizon}")));
    }
    if let Some(d) = field.dim() {
        if d != grid.dim() {
            return Err(invalid(format!("{}-dimensional field on a {}-dimensional grid", d, grid.dim())));
        }
    }
    let probes: &[f64] = if field.is_autonomous() { &[0.0] } else { &[0.0, 0.25, 0.5, 0.75, 1.0] };
    for &s in probes {
        let t = s * horizon;
        let normal = boundary_normal_speed(field, t, grid);
        let scale = field.sup_norm(t, grid).max(1.0);
        if normal > 1e-10 * scale {
            return Err(invalid(format!(
                "{} is not tangential at the boundary (|u·ν| = {normal:e} at t = {t})",
                field.label()
            )));
        }
    }
    Ok(())
}

pub(crate) fn check_cfl(cfl: f64) -> Result<()> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(invalid(format!("CFL safety factor must lie in (0, 1], got {cfl}")));
    }
    Ok(())
}

pub(crate) fn sorted_snapshots(times: &[f64], horizon: f64) -> Result<Vec<f64>> {
    let mut out = times.to_vec();
    if out.iter().any(|&s| !(0.0..=horizon).contains(&s)) {
        return Err(invalid("snapshot times must lie in [0, T]"));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

/// Repeats `cfl_step → face_fluxes → upwind_step` until time `horizon`.
///
/// The field must be tangential at every non-periodic boundary.
pub fn solve_upwind(
    field: &dyn VelocityField,
    initial: &CellField,
    horizon: f64,
    options: &UpwindOptions,
) -> Result<SolveReport> {
    let grid = *initial.grid();
    check_setup(field, &grid, horizon)?;
    check_cfl(options.cfl)?;
    let mut pending = sorted_snapshots(&options.snapshot_times, horizon)?;

    let mut rho = initial.clone().with_time(0.0);
    let mut series = vec![Diagnostics::of(&rho)];
    let mut snapshots = Vec::new();
    let mut compressibility = 0.0;
    let mut steps = 0;
    let mut t = 0.0;
    take_snapshots(&rho, &mut pending, &mut snapshots);
    while horizon - t > 1e-13 * horizon {
        let mut dt = cfl_step(field, &grid, t, horizon - t, options.cfl);
        dt = clip_to_snapshot(t, dt, &pending);
        let table = face_fluxes(field, &grid, t, dt);
        rho = upwind_step(&rho, &table)?;
        compressibility += dt * field.negative_divergence_sup(t + 0.5 * dt);
        t += dt;
        if horizon - t <= 1e-13 * horizon {
            t = horizon;
        }
        rho = rho.with_time(t);
        steps += 1;
        series.push(Diagnostics::of(&rho));
        take_snapshots(&rho, &mut pending, &mut snapshots);
    }
    Ok(SolveReport {
        final_field: rho,
        series,
        snapshots,
        steps,
        compressibility_integral: compressibility,
        gradient_time_integral: None,
    })
}

pub(crate) fn take_snapshots(rho: &CellField, pending: &mut Vec<f64>, out: &mut Vec<CellField>) {
    while let Some(&s) = pending.first() {
        if (s - rho.time()).abs() <= 1e-12 * s.abs().max(1.0) || s < rho.time() {
            out.push(rho.clone().with_time(s));
            pending.remove(0);
        } else {
            break;
        }
    }
}
