//! Explicit upwind finite-volume scheme for the continuity equation and an
//! operator-split advection–diffusion solver.

mod diffusion;
mod flux;
mod snapshot;
mod upwind;

pub use diffusion::{diffusion_step, solve_advection_diffusion, DiffusionOptions, DIFFUSION_SAFETY};
pub use flux::{cfl_step, face_fluxes, FluxTable, DEFAULT_CFL};
pub use snapshot::write_snapshots_csv;
pub use upwind::{solve_upwind, upwind_step, UpwindOptions};

use crate::fields::CellField;

/// Diagnostics recorded after every time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub time: f64,
    pub mass: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    /// `⨍ ρ log ρ`, when the field is nonnegative.
    pub entropy: Option<f64>,
    pub min: f64,
    pub max: f64,
}

impl Diagnostics {
    pub fn of(field: &CellField) -> Self {
        Diagnostics {
            time: field.time(),
            mass: field.mass(),
            l1: field.lq_norm(1.0),
            l2: field.lq_norm(2.0),
            linf: field.lq_norm(f64::INFINITY),
            entropy: field.entropy().ok(),
            min: field.min(),
            max: field.max(),
        }
    }
}

/// Outcome of a time-dependent solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub final_field: CellField,
    /// Diagnostics of the initial field followed by one entry per step.
    pub series: Vec<Diagnostics>,
    /// Fields at the requested snapshot times, in increasing time.
    pub snapshots: Vec<CellField>,
    pub steps: usize,
    /// `∫_0^T ‖(div u)^-‖_∞ dt` over the steps taken.
    pub compressibility_integral: f64,
    /// `∫_0^T ⨍ |∇ρ| dt` from face differences (diffusive solver only).
    pub gradient_time_integral: Option<f64>,
}

impl SolveReport {
    /// Largest relative deviation of the mass from its initial value.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.series[0].mass;
        let scale = m0.abs().max(self.series[0].l1 * self.final_field.grid().volume()).max(f64::MIN_POSITIVE);
        self.series.iter().map(|d| (d.mass - m0).abs() / scale).fold(0.0, f64::max)
    }
}

/// Advance the clock to `t` while honouring pending snapshot times: returns
/// the step, shortened to hit the next snapshot exactly.
pub(crate) fn clip_to_snapshot(t: f64, dt: f64, pending: &[f64]) -> f64 {
    match pending.first() {
        Some(&s) if s > t && s < t + dt => s - t,
        _ => dt,
    }
}
