use crate::error::{invalid, Result};
use crate::fields::{CellField, VelocityField};

use super::flux::{cfl_step, face_fluxes, DEFAULT_CFL};
use super::upwind::{check_cfl, check_setup, sorted_snapshots, take_snapshots, upwind_step};
use super::{clip_to_snapshot, Diagnostics, SolveReport};

/// Safety factor on the parabolic step limit `h_min² / (2 d κ)`.
pub const DIFFUSION_SAFETY: f64 = 0.9;

/// Options for [`solve_advection_diffusion`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionOptions {
    pub cfl: f64,
    pub diffusion_safety: f64,
    pub snapshot_times: Vec<f64>,
}

impl Default for DiffusionOptions {
    fn default() -> Self {
        DiffusionOptions { cfl: DEFAULT_CFL, diffusion_safety: DIFFUSION_SAFETY, snapshot_times: Vec::new() }
    }
}

/// One explicit centred diffusion step with zero-flux (ghost cell)
/// boundaries on non-periodic axes.
pub fn diffusion_step(field: &CellField, kappa: f64, dt: f64) -> CellField {
    let grid = field.grid();
    let rho = field.values();
    let mut next = rho.to_vec();
    for f in grid.faces() {
        let h = grid.spacing(f.axis);
        let moved = dt * kappa * (rho[f.upper] - rho[f.lower]) / (h * h);
        next[f.lower] += moved;
        next[f.upper] -= moved;
    }
    CellField::new(*grid, next, field.time() + dt).expect("same grid")
}

/// `⨍ |∇ρ|` of a piecewise-constant field: jumps across faces times face
/// areas, divided by the domain volume.
pub(crate) fn total_variation(field: &CellField) -> f64 {
    let grid = field.grid();
    let rho = field.values();
    let jumps: f64 = grid.faces().iter().map(|f| (rho[f.upper] - rho[f.lower]).abs() * grid.face_area(f.axis)).sum();
    jumps / grid.volume()
}

/// Operator-split solver for `∂_t ρ + div(uρ) = κ Δρ` with no-flux
/// boundaries: an upwind step followed by a centred diffusion step.
pub fn solve_advection_diffusion(
    field: &dyn VelocityField,
    kappa: f64,
    initial: &CellField,
    horizon: f64,
    options: &DiffusionOptions,
) -> Result<SolveReport> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(invalid(format!("diffusivity must be positive, got {kappa}")));
    }
    if initial.min() < 0.0 {
        return Err(invalid("advection-diffusion requires nonnegative initial data"));
    }
    if !(options.diffusion_safety > 0.0 && options.diffusion_safety <= 1.0) {
        return Err(invalid("diffusion safety factor must lie in (0, 1]"));
    }
    let grid = *initial.grid();
    check_setup(field, &grid, horizon)?;
    check_cfl(options.cfl)?;
    let mut pending = sorted_snapshots(&options.snapshot_times, horizon)?;
    let parabolic = options.diffusion_safety * grid.h_min().powi(2) / (2.0 * grid.dim() as f64 * kappa);

    let mut rho = initial.clone().with_time(0.0);
    let mut series = vec![Diagnostics::of(&rho)];
    let mut snapshots = Vec::new();
    let mut compressibility = 0.0;
    let mut gradient_integral = 0.0;
    let mut steps = 0;
    let mut t = 0.0;
    take_snapshots(&rho, &mut pending, &mut snapshots);
    while horizon - t > 1e-13 * horizon {
        let mut dt = cfl_step(field, &grid, t, horizon - t, options.cfl).min(parabolic);
        dt = clip_to_snapshot(t, dt, &pending);
        let table = face_fluxes(field, &grid, t, dt);
        rho = upwind_step(&rho, &table)?;
        rho = diffusion_step(&rho, kappa, dt);
        compressibility += dt * field.negative_divergence_sup(t + 0.5 * dt);
        gradient_integral += dt * total_variation(&rho);
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
        gradient_time_integral: Some(gradient_integral),
    })
}
