//! Flow maps of `ẋ = u(t, x)`, Jacobians along trajectories and averaged
//! logarithmic trajectory distances.
//!
//! Trajectories are integrated with the classical fourth-order Runge–Kutta
//! method on a fixed step `dt`. Steps are shortened to land exactly on the
//! final time and on the switching times of piecewise-in-time fields, so a
//! given `(field, dt, t)` always produces the same partition.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fields::{gradient_lp, velocity_distance_lp, CellField, Grid, Point, VelocityField};
use crate::quadrature::gauss5_avg;

/// Trajectories leaving a bounded axis by more than this are an error.
pub const EXIT_TOLERANCE: f64 = 1e-8;

/// Flow `φ(t, x)` of a velocity field on the box of `domain`.
#[derive(Clone, Copy)]
pub struct FlowMap<'a> {
    field: &'a dyn VelocityField,
    dt: f64,
    domain: Grid,
}

/// `J φ(t, x)` together with the lower bound `Λ = exp(-∫‖(div u)^-‖_∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianSample {
    pub jacobian: f64,
    pub lower_bound: f64,
}

/// Result of comparing the flows of two fields over an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoFlowDistance {
    /// `δ(t) = ∫_0^t ‖u - v‖_{L^p} dt`.
    pub delta: f64,
    /// Ensemble mean of `log(|φ - ψ| / δ + 1)`.
    pub mean_log_distance: f64,
    /// Same mean with every sample weighted by the initial density.
    pub weighted_log_distance: f64,
    /// `∫_0^t ‖∇u‖_{L^p} dt` of the first field.
    pub gradient_integral: f64,
    /// `mean_log_distance / (gradient_integral + 1)`.
    pub ratio: f64,
}

/// Time partition `[t_n, t_{n+1}]` with a flag marking steps that end on a
/// switching time of the field.
fn partition(field: &dyn VelocityField, dt: f64, t: f64) -> Vec<(f64, f64, bool)> {
    let mut out = Vec::new();
    let mut s = 0.0;
    while t - s > 1e-14 * t.max(1.0) {
        let mut end = (s + dt).min(t);
        let mut at_switch = false;
        if let Some(sw) = field.next_switch(s) {
            if sw <= end {
                end = sw;
                at_switch = true;
            }
        }
        if t - end <= 1e-14 * t.max(1.0) {
            end = t;
        }
        out.push((s, end, at_switch));
        s = end;
    }
    out
}

fn axpy(x: Point, a: f64, v: Point) -> Point {
    [x[0] + a * v[0], x[1] + a * v[1]]
}

impl<'a> FlowMap<'a> {
    pub fn new(field: &'a dyn VelocityField, dt: f64, domain: Grid) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid("time step must be positive"));
        }
        if let Some(d) = field.dim() {
            if d != domain.dim() {
                return Err(invalid(format!("{}-dimensional field on a {}-dimensional domain", d, domain.dim())));
            }
        }
        Ok(FlowMap { field, dt, domain })
    }

    pub fn field(&self) -> &'a dyn VelocityField {
        self.field
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn domain(&self) -> &Grid {
        &self.domain
    }

    fn check_inside(&self, x: &mut Point) -> Result<()> {
        for axis in 0..self.domain.dim() {
            if self.domain.is_periodic(axis) {
                continue;
            }
            let lo = self.domain.origin(axis);
            let hi = lo + self.domain.length(axis);
            if x[axis] < lo - EXIT_TOLERANCE || x[axis] > hi + EXIT_TOLERANCE {
                return Err(Error::Integration(format!(
                    "trajectory left the domain along axis {axis} at {:?}",
                    &x[..self.domain.dim()]
                )));
            }
            x[axis] = x[axis].clamp(lo, hi);
        }
        Ok(())
    }

    /// One RK4 step for the augmented state (position, log-Jacobian).
    fn rk4(&self, s: f64, end: f64, at_switch: bool, x: Point, with_div: bool) -> (Point, f64) {
        let h = end - s;
        let u = self.field;
        let t_end = if at_switch { end.next_down() } else { end };
        let tm = s + 0.5 * h;
        let k1 = u.value(s, x);
        let x2 = axpy(x, 0.5 * h, k1);
        let k2 = u.value(tm, x2);
        let x3 = axpy(x, 0.5 * h, k2);
        let k3 = u.value(tm, x3);
        let x4 = axpy(x, h, k3);
        let k4 = u.value(t_end, x4);
        let next = [
            x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        let dlog = if with_div {
            h / 6.0
                * (u.divergence(s, x) + 2.0 * u.divergence(tm, x2) + 2.0 * u.divergence(tm, x3) + u.divergence(t_end, x4))
        } else {
            0.0
        };
        (next, dlog)
    }

    fn integrate(&self, x0: Point, t: f64, with_div: bool) -> Result<(Point, f64)> {
        if t < 0.0 || !t.is_finite() {
            return Err(invalid("flow time must be nonnegative"));
        }
        let mut x = x0;
        self.check_inside(&mut x)?;
        let mut log_j = 0.0;
        for (s, end, sw) in partition(self.field, self.dt, t) {
            let (next, dl) = self.rk4(s, end, sw, x, with_div);
            x = next;
            log_j += dl;
            self.check_inside(&mut x)?;
        }
        Ok((x, log_j))
    }

    /// `φ(t, x0)`.
    pub fn flow(&self, x0: Point, t: f64) -> Result<Point> {
        self.integrate(x0, t, false).map(|(x, _)| x)
    }

    /// `J φ(t, x0) = exp ∫ div u(s, φ(s, x0)) ds` and its lower bound `Λ`.
    pub fn jacobian_along_flow(&self, x0: Point, t: f64) -> Result<JacobianSample> {
        let (_, log_j) = self.integrate(x0, t, true)?;
        let mut neg = 0.0;
        for (s, end, _) in partition(self.field, self.dt, t) {
            neg += (end - s) * self.field.negative_divergence_sup(0.5 * (s + end));
        }
        Ok(JacobianSample { jacobian: log_j.exp(), lower_bound: (-neg).exp() })
    }

    /// `log(|φ(t, x) - φ(t, y)| / |x - y|)`.
    pub fn two_particle_log_ratio(&self, x: Point, y: Point, t: f64) -> Result<f64> {
        let d0 = self.domain.distance(x, y);
        if d0 == 0.0 {
            return Err(invalid("two-particle ratio needs distinct points"));
        }
        let fx = self.flow(x, t)?;
        let fy = self.flow(y, t)?;
        Ok((self.domain.distance(fx, fy) / d0).ln())
    }

    /// `∫_0^t g(s) ds` by the midpoint rule on the flow partition.
    fn time_integral(&self, t: f64, g: impl Fn(f64) -> f64) -> f64 {
        partition(self.field, self.dt, t).into_iter().map(|(s, e, _)| (e - s) * g(0.5 * (s + e))).sum()
    }

    /// Lipschitz bound `∫_0^t ‖∇u‖_∞ ds`.
    pub fn lipschitz_integral(&self, t: f64) -> f64 {
        self.time_integral(t, |s| self.field.gradient_sup(s))
    }

    /// Densities pushed forward by the flow, `ρ(t) = φ(t, ·)_# ρ̄`, as cell
    /// averages on `grid`: each cell receives the `ρ̄`-mass between its
    /// backward-traced edges. One-dimensional autonomous fields only.
    pub fn push_forward_1d(&self, initial: impl Fn(f64) -> f64 + Sync, grid: &Grid, t: f64) -> Result<CellField> {
        if grid.dim() != 1 {
            return Err(invalid("push-forward is implemented in one dimension"));
        }
        if !self.field.is_autonomous() {
            return Err(invalid("push-forward needs an autonomous field"));
        }
        let reversed = Reversed(self.field);
        let back = FlowMap { field: &reversed, dt: self.dt, domain: self.domain };
        let n = grid.len();
        let edges: Vec<f64> = (0..=n)
            .into_par_iter()
            .map(|e| {
                let x = grid.origin(0) + e as f64 * grid.spacing(0);
                back.flow([x, 0.0], t).map(|p| p[0])
            })
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(n);
        for k in 0..n {
            let (a, b) = (edges[k], edges[k + 1]);
            let pieces = 8;
            let mut mass = 0.0;
            for q in 0..pieces {
                let lo = a + (b - a) * q as f64 / pieces as f64;
                let hi = a + (b - a) * (q + 1) as f64 / pieces as f64;
                mass += (hi - lo) * gauss5_avg(lo, hi).map(|(x, w)| w * initial(x)).sum::<f64>();
            }
            values.push(mass / grid.cell_volume());
        }
        Ok(CellField::new(*grid, values, t)?)
    }
}

/// `-u` for autonomous fields: its flow inverts the original one.
struct Reversed<'a>(&'a dyn VelocityField);

impl VelocityField for Reversed<'_> {
    fn dim(&self) -> Option<usize> {
        self.0.dim()
    }
    fn value(&self, t: f64, x: Point) -> Point {
        let v = self.0.value(t, x);
        [-v[0], -v[1]]
    }
    fn divergence(&self, t: f64, x: Point) -> f64 {
        -self.0.divergence(t, x)
    }
    fn gradient(&self, t: f64, x: Point) -> [[f64; 2]; 2] {
        let g = self.0.gradient(t, x);
        [[-g[0][0], -g[0][1]], [-g[1][0], -g[1][1]]]
    }
    fn is_divergence_free(&self) -> bool {
        self.0.is_divergence_free()
    }
    fn is_autonomous(&self) -> bool {
        true
    }
    fn sup_norm(&self, t: f64, domain: &Grid) -> f64 {
        self.0.sup_norm(t, domain)
    }
    fn gradient_sup(&self, t: f64) -> f64 {
        self.0.gradient_sup(t)
    }
    fn negative_divergence_sup(&self, _t: f64) -> f64 {
        f64::NAN
    }
    fn label(&self) -> String {
        format!("-{}", self.0.label())
    }
}

/// Initial points for averaged trajectory functionals: the cell centers of
/// a lattice grid, each carrying a weight (the initial density there).
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    lattice: Grid,
    points: Vec<Point>,
    weights: Vec<f64>,
}

/// Minimum ensemble size.
pub const MIN_SAMPLES: usize = 16;

impl TrajectoryEnsemble {
    /// Equi-spaced lattice with unit weights.
    pub fn lattice(lattice: Grid) -> Result<Self> {
        Self::weighted(lattice, |_| 1.0)
    }

    pub fn weighted(lattice: Grid, weight: impl Fn(Point) -> f64) -> Result<Self> {
        if lattice.len() < MIN_SAMPLES {
            return Err(invalid(format!("ensembles need at least {MIN_SAMPLES} samples")));
        }
        let points: Vec<Point> = (0..lattice.len()).map(|k| lattice.cell_center(k)).collect();
        let weights = points.iter().map(|&p| weight(p)).collect();
        Ok(TrajectoryEnsemble { lattice, points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn lattice_grid(&self) -> &Grid {
        &self.lattice
    }

    /// Positions of every sample at time `t`, in ensemble order.
    pub fn advect(&self, flow: &FlowMap<'_>, t: f64) -> Result<Vec<Point>> {
        self.points.par_iter().map(|&x| flow.flow(x, t)).collect()
    }
}

/// Averaged logarithmic distance between the trajectories of two fields,
/// measured relative to `δ(t) = ∫_0^t ‖u - v‖_{L^p}`.
///
/// Both flows must share the domain; `δ` is computed on the ensemble
/// lattice by Gauss quadrature in space and the midpoint rule over the
/// steps of `flow_u` in time. When both flows coincide exactly the mean is
/// zero (`0/0 → 0`).
pub fn two_flow_log_distance(
    flow_u: &FlowMap<'_>,
    flow_v: &FlowMap<'_>,
    ensemble: &TrajectoryEnsemble,
    t: f64,
    p: f64,
) -> Result<TwoFlowDistance> {
    if !(p >= 1.0) {
        return Err(invalid("p must lie in [1, ∞]"));
    }
    let grid = ensemble.lattice;
    let delta = flow_u.time_integral(t, |s| velocity_distance_lp(flow_u.field, flow_v.field, s, p, &grid));
    let gradient_integral = flow_u.time_integral(t, |s| gradient_lp(flow_u.field, s, p, &grid));
    let a = ensemble.advect(flow_u, t)?;
    let b = ensemble.advect(flow_v, t)?;
    let dist: Vec<f64> = a.iter().zip(&b).map(|(&x, &y)| flow_u.domain.distance(x, y)).collect();
    let (mean, weighted) = if delta == 0.0 {
        if dist.iter().any(|&d| d > 0.0) {
            return Err(Error::Degenerate("δ = 0 but the trajectories differ".into()));
        }
        (0.0, 0.0)
    } else {
        let n = dist.len() as f64;
        let logs: Vec<f64> = dist.iter().map(|d| (d / delta).ln_1p()).collect();
        (
            logs.iter().sum::<f64>() / n,
            logs.iter().zip(&ensemble.weights).map(|(l, w)| l * w).sum::<f64>() / n,
        )
    };
    Ok(TwoFlowDistance {
        delta,
        mean_log_distance: mean,
        weighted_log_distance: weighted,
        gradient_integral,
        ratio: mean / (gradient_integral + 1.0),
    })
}
