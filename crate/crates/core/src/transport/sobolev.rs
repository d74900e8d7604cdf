use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{CellField, Grid};

use super::mixing::check_zero_mean;

/// Boundary treatment of the Poisson problem behind [`neg_sobolev`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundary {
    /// Wrap every axis.
    Periodic,
    /// Zero normal derivative on every axis.
    Neumann,
}

/// Cell pairs coupled by the five-point Laplacian.
fn couplings(grid: &Grid, boundary: Boundary) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for k in 0..grid.len() {
        for axis in 0..grid.dim() {
            let (i, j) = grid.coords(k);
            let pos = if axis == 0 { i } else { j };
            let n = grid.cells(axis);
            let next = if pos + 1 < n {
                Some(pos + 1)
            } else if boundary == Boundary::Periodic && n > 1 {
                Some(0)
            } else {
                None
            };
            if let Some(q) = next {
                let other = if axis == 0 { grid.index(q, j) } else { grid.index(i, q) };
                out.push((k, other, 1.0 / grid.spacing(axis).powi(2)));
            }
        }
    }
    out
}

fn apply(pairs: &[(usize, usize, f64)], x: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for &(a, b, w) in pairs {
        let d = w * (x[a] - x[b]);
        out[a] += d;
        out[b] -= d;
    }
}

fn project_mean(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Homogeneous `H^{-1}` norm `|∇^{-1}ρ|_{L²} = (⨍ |∇ψ|²)^{1/2}` where
/// `−Δψ = ρ` is solved with the five-point stencil by conjugate gradients on
/// the mean-zero subspace.
///
/// ```
/// use krlab::fields::{cell_average, Grid};
/// use krlab::transport::{neg_sobolev, Boundary};
/// use std::f64::consts::PI;
///
/// let g = Grid::torus(&[(0.0, 1.0)], &[256]).unwrap();
/// let rho = cell_average(|p| (2.0 * PI * p[0]).cos(), &g).unwrap();
/// let norm = neg_sobolev(&rho, Boundary::Periodic).unwrap();
/// assert!((norm / (1.0 / (2.0 * PI * 2f64.sqrt())) - 1.0).abs() < 0.01);
/// ```
pub fn neg_sobolev(rho: &CellField, boundary: Boundary) -> Result<f64> {
    let grid = rho.grid();
    if rho.values().iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    check_zero_mean(rho)?;
    let pairs = couplings(grid, boundary);
    let n = grid.len();
    let mut b = rho.values().to_vec();
    project_mean(&mut b);
    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let b_norm = dot(&b, &b).sqrt();
    let mut rr = dot(&r, &r);
    let max_iter = 20 * n + 100;
    let mut iterations = 0;
    while rr.sqrt() > 1e-12 * b_norm {
        if iterations == max_iter {
            return Err(Error::Convergence { iterations, residual: rr.sqrt() / b_norm });
        }
        apply(&pairs, &p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
        project_mean(&mut r);
        let next = dot(&r, &r);
        let beta = next / rr;
        rr = next;
        p.iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + beta * *pi);
        iterations += 1;
    }
    // ⨍|∇ψ|² from face differences: each coupling carries one cell volume
    let energy: f64 = pairs.iter().map(|&(a, c, w)| w * (x[a] - x[c]).powi(2)).sum();
    Ok((energy / n as f64).sqrt())
}
