use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fields::{CellField, Grid, Point};
use crate::quadrature::neumaier_sum;

/// Distance used for transport costs: Euclidean, with minimum-image
/// wrapping on periodic axes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Metric {
    periods: [Option<f64>; 2],
}

impl Metric {
    pub fn euclidean() -> Self {
        Metric::default()
    }

    /// Metric of a grid's domain: periodic axes wrap.
    pub fn of_grid(grid: &Grid) -> Self {
        Metric { periods: grid.periods() }
    }

    pub fn distance(&self, a: Point, b: Point) -> f64 {
        let mut d = [a[0] - b[0], a[1] - b[1]];
        for (axis, p) in self.periods.iter().enumerate() {
            if let Some(p) = *p {
                d[axis] -= p * (d[axis] / p).round();
            }
        }
        d[0].hypot(d[1])
    }
}

/// Weighted support points; zero weights are dropped on construction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteMeasure {
    points: Vec<Point>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(invalid("points and weights differ in length"));
        }
        let mut m = DiscreteMeasure::default();
        for (p, w) in points.into_iter().zip(weights) {
            if !(w >= 0.0) || !w.is_finite() || !p[0].is_finite() || !p[1].is_finite() {
                return Err(invalid(format!("invalid support point {p:?} with weight {w}")));
            }
            if w > 0.0 {
                m.points.push(p);
                m.weights.push(w);
            }
        }
        Ok(m)
    }

    /// One-dimensional convenience constructor.
    pub fn on_line(points: &[f64], weights: &[f64]) -> Result<Self> {
        Self::new(points.iter().map(|&x| [x, 0.0]).collect(), weights.to_vec())
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mass(&self) -> f64 {
        neumaier_sum(self.weights.iter().copied())
    }

    pub(crate) fn scale_weights(&mut self, c: f64) {
        self.weights.iter_mut().for_each(|w| *w *= c);
    }
}

/// Sparse coupling `(source, target, mass)` between two measures.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransportPlan {
    pub entries: Vec<(usize, usize, f64)>,
    pub sources: usize,
    pub targets: usize,
}

impl TransportPlan {
    pub fn mass(&self) -> f64 {
        neumaier_sum(self.entries.iter().map(|e| e.2))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.sources];
        for &(i, _, m) in &self.entries {
            r[i] += m;
        }
        r
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.targets];
        for &(_, j, m) in &self.entries {
            c[j] += m;
        }
        c
    }

    /// Largest marginal deviation relative to the total mass.
    pub fn marginal_error(&self, source: &DiscreteMeasure, target: &DiscreteMeasure) -> f64 {
        let scale = source.mass().max(target.mass()).max(f64::MIN_POSITIVE);
        let rows = self.row_sums().iter().zip(source.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let cols = self.column_sums().iter().zip(target.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        rows.max(cols) / scale
    }

    /// CSV export `source_x,source_y,target_x,target_y,mass`.
    pub fn write_csv<W: Write>(&self, out: &mut W, source: &DiscreteMeasure, target: &DiscreteMeasure) -> Result<()> {
        writeln!(out, "source_x,source_y,target_x,target_y,mass")?;
        for &(i, j, m) in &self.entries {
            let (a, b) = (source.points()[i], target.points()[j]);
            writeln!(out, "{},{},{},{},{}", a[0], a[1], b[0], b[1], m)?;
        }
        Ok(())
    }
}

/// How the transported cost is turned into a distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Normalization {
    /// Cost divided by the domain volume.
    #[default]
    Domain,
    /// Cost divided by the transported mass.
    Mass,
}

/// Parameters of a logarithmic Kantorovich–Rubinstein distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KrSetup {
    pub delta: f64,
    pub volume: f64,
    pub metric: Metric,
    pub normalization: Normalization,
}

impl KrSetup {
    pub fn new(delta: f64, volume: f64) -> Self {
        KrSetup { delta, volume, metric: Metric::euclidean(), normalization: Normalization::Domain }
    }

    /// Setup on the domain of `grid`, including its periodicity.
    pub fn on_grid(delta: f64, grid: &Grid) -> Self {
        KrSetup { metric: Metric::of_grid(grid), ..Self::new(delta, grid.volume()) }
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(invalid(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.volume > 0.0) {
            return Err(invalid("domain volume must be positive"));
        }
        Ok(())
    }

    pub(crate) fn cost(&self, a: Point, b: Point) -> f64 {
        (self.metric.distance(a, b) / self.delta).ln_1p()
    }

    pub(crate) fn normalize(&self, cost: f64, plan_mass: f64) -> f64 {
        match self.normalization {
            Normalization::Domain => cost / self.volume,
            Normalization::Mass if plan_mass > 0.0 => cost / plan_mass,
            Normalization::Mass => 0.0,
        }
    }
}

/// Outcome of a Kantorovich–Rubinstein solve.
#[derive(Debug, Clone, PartialEq)]
pub struct KrResult {
    /// Normalized distance `D_δ`.
    pub value: f64,
    pub delta: f64,
    /// Unnormalized optimal cost `Σ π_ij c_ij`.
    pub cost: f64,
    pub plan: TransportPlan,
    /// Relative gap between primal cost and the certified dual value.
    pub dual_gap: f64,
    /// Largest `|c_ij - f_i - g_j|` on the support of the plan.
    pub slackness: f64,
    pub iterations: usize,
}

impl KrResult {
    pub(crate) fn empty(delta: f64) -> Self {
        KrResult {
            value: 0.0,
            delta,
            cost: 0.0,
            plan: TransportPlan::default(),
            dual_gap: 0.0,
            slackness: 0.0,
            iterations: 0,
        }
    }
}

/// Positive and negative parts of `ρ₁ − ρ₂` as point masses at cell centres.
///
/// Shared mass stays in place, so the distance between `ρ₁` and `ρ₂` only
/// depends on these two measures. The lighter part is rescaled to restore
/// exact balance after checking that the total masses agree.
///
/// ```
/// use krlab::fields::{CellField, Grid};
/// use krlab::transport::split_difference;
///
/// let g = Grid::unit_interval(2).unwrap();
/// let a = CellField::new(g, vec![2.0, 0.0], 0.0).unwrap();
/// let b = CellField::new(g, vec![0.0, 2.0], 0.0).unwrap();
/// let (plus, minus) = split_difference(&a, &b).unwrap();
/// assert_eq!(plus.points()[0][0], 0.25);
/// assert_eq!(minus.points()[0][0], 0.75);
/// assert_eq!(plus.mass(), 1.0);
/// ```
pub fn split_difference(rho1: &CellField, rho2: &CellField) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    rho1.check_same_grid(rho2)?;
    let (m1, m2) = (rho1.mass(), rho2.mass());
    let grid = rho1.grid();
    let tolerance = 1e-10 * m1.abs().max(m2.abs()).max(grid.volume());
    if (m1 - m2).abs() > tolerance {
        return Err(Error::UnbalancedMarginals(m1, m2));
    }
    let vol = grid.cell_volume();
    let (mut pp, mut pw, mut mp, mut mw) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (k, (a, b)) in rho1.values().iter().zip(rho2.values()).enumerate() {
        let d = a - b;
        if d > 0.0 {
            pp.push(grid.cell_center(k));
            pw.push(d * vol);
        } else if d < 0.0 {
            mp.push(grid.cell_center(k));
            mw.push(-d * vol);
        }
    }
    let mut plus = DiscreteMeasure::new(pp, pw)?;
    let mut minus = DiscreteMeasure::new(mp, mw)?;
    balance(&mut plus, &mut minus, tolerance)?;
    Ok((plus, minus))
}

/// Rescales the lighter measure to the mass of the heavier one.
pub(crate) fn balance(plus: &mut DiscreteMeasure, minus: &mut DiscreteMeasure, tolerance: f64) -> Result<()> {
    let (a, b) = (plus.mass(), minus.mass());
    if (a - b).abs() > tolerance {
        return Err(Error::UnbalancedMarginals(a, b));
    }
    if a == 0.0 || b == 0.0 {
        if a.max(b) > 0.0 {
            return Err(Error::UnbalancedMarginals(a, b));
        }
        return Ok(());
    }
    if a < b {
        plus.scale_weights(b / a);
    } else if b < a {
        minus.scale_weights(a / b);
    }
    Ok(())
}
