use rayon::prelude::*;

use crate::fields::{Face, Grid, VelocityField};
use crate::quadrature::{gauss3_avg, gauss5_avg};

/// Default CFL safety factor.
pub const DEFAULT_CFL: f64 = 0.45;

/// Net flows `u_KL^n` across every interior face for one time step.
#[derive(Debug, Clone)]
pub struct FluxTable {
    grid: Grid,
    faces: Vec<Face>,
    /// Space-time average of `u · ν` on each face, `ν` pointing from
    /// `lower` to `upper`.
    flows: Vec<f64>,
    t: f64,
    dt: f64,
}

impl FluxTable {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn flows(&self) -> &[f64] {
        &self.flows
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Net flow from cell `from` into its neighbour `to`, if they share a face.
    pub fn net_flow(&self, from: usize, to: usize) -> Option<f64> {
        self.faces.iter().zip(&self.flows).find_map(|(f, &u)| {
            if f.lower == from && f.upper == to {
                Some(u)
            } else if f.lower == to && f.upper == from {
                Some(-u)
            } else {
                None
            }
        })
    }

    /// Discrete divergence `Σ_{L∼K} (|K|L| / |K|) u_KL` for every cell.
    pub fn cell_divergence(&self) -> Vec<f64> {
        let mut div = vec![0.0; self.grid.len()];
        for (f, &u) in self.faces.iter().zip(&self.flows) {
            let a = self.grid.face_area(f.axis) / self.grid.cell_volume();
            div[f.lower] += a * u;
            div[f.upper] -= a * u;
        }
        div
    }

    /// `δt Σ_{L∼K} (|K|L| / |K|) u_KL^+`: the fraction of a cell's content
    /// leaving it in one step.
    pub fn outflow_factors(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (f, &u) in self.faces.iter().zip(&self.flows) {
            let a = self.dt * self.grid.face_area(f.axis) / self.grid.cell_volume();
            if u > 0.0 {
                out[f.lower] += a * u;
            } else {
                out[f.upper] -= a * u;
            }
        }
        out
    }
}

/// Largest step with `∫ ‖u‖_∞ dt ≤ λ h`, capped at `remaining` and at the
/// next switching time of the field. For `u ≡ 0` the step is `h`.
pub fn cfl_step(field: &dyn VelocityField, grid: &Grid, t: f64, remaining: f64, safety: f64) -> f64 {
    let h = grid.h();
    let budget = safety * h;
    let mut speed = field.sup_norm(t, grid);
    let mut dt = if speed > 0.0 { budget / speed } else { h };
    if !field.is_autonomous() {
        // sup-norm may change within the step; take the worse of both ends
        speed = speed.max(field.sup_norm(t + dt, grid));
        if speed > 0.0 {
            dt = dt.min(budget / speed);
        }
        if let Some(sw) = field.next_switch(t) {
            dt = dt.min(sw - t);
        }
    }
    dt.min(remaining)
}

/// Face averages `⨍_{t}^{t+δt} ⨍_{K|L} u · ν_KL` by a five-point Gauss rule
/// on the face and a three-point rule in time.
pub fn face_fluxes(field: &dyn VelocityField, grid: &Grid, t: f64, dt: f64) -> FluxTable {
    let faces = grid.faces();
    let times: Vec<(f64, f64)> = gauss3_avg(t, t + dt).collect();
    let flows = faces
        .par_iter()
        .map(|f| {
            let mut acc = 0.0;
            for &(s, ws) in &times {
                if grid.dim() == 1 {
                    acc += ws * field.value(s, [f.position, 0.0])[0];
                } else {
                    for (r, wr) in gauss5_avg(f.span.0, f.span.1) {
                        let mut x = [0.0; 2];
                        x[f.axis] = f.position;
                        x[1 - f.axis] = r;
                        acc += ws * wr * field.value(s, x)[f.axis];
                    }
                }
            }
            acc
        })
        .collect();
    FluxTable { grid: *grid, faces, flows, t, dt }
}
