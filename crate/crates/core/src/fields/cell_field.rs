use crate::error::{Error, Result};
use crate::quadrature::{gauss5_avg, neumaier_sum};

use super::grid::{Grid, Point};

/// Piecewise-constant density: one value (mass per volume) per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    grid: Grid,
    values: Vec<f64>,
    time: f64,
}

impl CellField {
    pub fn new(grid: Grid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        Ok(CellField { grid, values, time })
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        CellField { grid, values: vec![value; grid.len()], time: 0.0 }
    }

    /// Cell values from a function of the cell center.
    pub fn from_centers(grid: Grid, f: impl Fn(Point) -> f64) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.cell_center(k))).collect();
        CellField { grid, values, time: 0.0 }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// Total mass `Σ ρ_K |K|`.
    pub fn mass(&self) -> f64 {
        let vol = self.grid.cell_volume();
        neumaier_sum(self.values.iter().map(|v| v * vol))
    }

    /// Spatial average `⨍ ρ`.
    pub fn mean(&self) -> f64 {
        self.mass() / self.grid.volume()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Volume-averaged norm `(⨍ |ρ|^q)^{1/q}`; `q = ∞` gives the maximum modulus.
    pub fn lq_norm(&self, q: f64) -> f64 {
        lq_average(&self.values, q)
    }

    /// `⨍ ρ log ρ` with `0 log 0 = 0`.
    pub fn entropy(&self) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.values.len());
        for (k, &v) in self.values.iter().enumerate() {
            if v < 0.0 || v.is_nan() {
                return Err(Error::Domain(format!("entropy of negative value {v} in cell {k}")));
            }
            terms.push(if v == 0.0 { 0.0 } else { v * v.ln() });
        }
        Ok(neumaier_sum(terms) / self.values.len() as f64)
    }

    /// `⨍ |ρ - σ|`; both fields must live on the same grid.
    pub fn l1_distance(&self, other: &CellField) -> Result<f64> {
        self.check_same_grid(other)?;
        let diff: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(lq_average(&diff, 1.0))
    }

    pub fn difference(&self, other: &CellField) -> Result<CellField> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(CellField { grid: self.grid, values, time: self.time })
    }

    pub fn scaled(&self, c: f64) -> CellField {
        CellField { grid: self.grid, values: self.values.iter().map(|v| c * v).collect(), time: self.time }
    }

    pub(crate) fn check_same_grid(&self, other: &CellField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument("fields live on different grids".into()));
        }
        Ok(())
    }

    /// Block averages over `factor` cells per axis.
    pub fn coarsen(&self, factor: usize) -> Result<CellField> {
        let g = &self.grid;
        if factor == 0 || (0..g.dim()).any(|a| g.cells(a) % factor != 0) {
            return Err(Error::InvalidArgument(format!("cannot coarsen by {factor}")));
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let cells: Vec<usize> = (0..g.dim()).map(|a| g.cells(a) / factor).collect();
        let coarse = g.with_cells(&cells)?;
        let mut values = vec![0.0; coarse.len()];
        for k in 0..g.len() {
            let (i, j) = g.coords(k);
            values[coarse.index(i / factor, j / factor)] += self.values[k];
        }
        let per_block = (factor as f64).powi(g.dim() as i32);
        values.iter_mut().for_each(|v| *v /= per_block);
        Ok(CellField { grid: coarse, values, time: self.time })
    }
}

pub(crate) fn lq_average(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    if q.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let n = values.len() as f64;
    if q == 1.0 {
        return neumaier_sum(values.iter().map(|v| v.abs())) / n;
    }
    let scale = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s = neumaier_sum(values.iter().map(|v| (v.abs() / scale).powf(q))) / n;
    scale * s.powf(1.0 / q)
}

/// Cell averages `⨍_K ρ̄` by the tensor five-point Gauss rule.
pub fn cell_average(density: impl Fn(Point) -> f64, grid: &Grid) -> Result<CellField> {
    let mut values = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let (x0, x1) = grid.cell_bounds(k, 0);
        let mut acc = 0.0;
        if grid.dim() == 1 {
            for (x, w) in gauss5_avg(x0, x1) {
                acc += w * density([x, 0.0]);
            }
        } else {
            let (y0, y1) = grid.cell_bounds(k, 1);
            for (x, wx) in gauss5_avg(x0, x1) {
                for (y, wy) in gauss5_avg(y0, y1) {
                    acc += wx * wy * density([x, y]);
                }
            }
        }
        if !acc.is_finite() {
            return Err(Error::Evaluation(format!("non-finite density average in cell {k}")));
        }
        values.push(acc);
    }
    Ok(CellField { grid: *grid, values, time: 0.0 })
}
