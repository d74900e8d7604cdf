use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::fields::{cell_average, CellField, Grid, Point};

/// Initial data of the studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `1` on `[a, b)`, `0` elsewhere; one-dimensional.
    Indicator { a: f64, b: f64 },
    /// `1 + sin(2πx)`.
    Sine,
    /// `1 + cos(πx)`, the first Neumann eigenmode on `[0, 1]` plus one.
    Cosine,
    /// `±1` on a `blocks × blocks` board (stripes in one dimension).
    Checkerboard { blocks: usize },
}

impl Profile {
    pub fn value(&self, x: Point, dim: usize) -> f64 {
        match *self {
            Profile::Constant(c) => c,
            Profile::Indicator { a, b } => f64::from(u8::from(a <= x[0] && x[0] < b)),
            Profile::Sine => 1.0 + (2.0 * PI * x[0]).sin(),
            Profile::Cosine => 1.0 + (PI * x[0]).cos(),
            Profile::Checkerboard { blocks } => {
                let n = blocks as f64;
                let i = (x[0] * n).floor() as i64;
                let j = if dim == 2 { (x[1] * n).floor() as i64 } else { 0 };
                if (i + j).rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// Cell averages on `grid`; exact except for checkerboards whose blocks
    /// do not align with the cells.
    pub fn average(&self, grid: &Grid) -> Result<CellField> {
        match *self {
            Profile::Checkerboard { blocks } => {
                let dim = grid.dim();
                if (0..dim).all(|a| grid.cells(a) % blocks == 0) {
                    Ok(CellField::from_centers(*grid, |x| self.value(x, dim)))
                } else {
                    cell_average(|x| self.value(x, dim), grid)
                }
            }
            Profile::Constant(c) => Ok(CellField::constant(*grid, c)),
            _ => self.shifted_average(grid, 0.0),
        }
    }

    /// Exact cell averages of `x ↦ ρ̄(x − shift)` on a one-dimensional grid,
    /// the solution of transport with constant speed. Indicators wrap with
    /// the grid length on periodic grids.
    pub fn shifted_average(&self, grid: &Grid, shift: f64) -> Result<CellField> {
        if grid.dim() != 1 {
            return Err(invalid("shifted profiles are one-dimensional"));
        }
        let (o, len) = (grid.origin(0), grid.length(0));
        let primitive = |x: f64| -> Result<f64> {
            Ok(match *self {
                Profile::Constant(c) => c * x,
                Profile::Sine => x - (2.0 * PI * x).cos() / (2.0 * PI),
                Profile::Cosine => x + (PI * x).sin() / PI,
                Profile::Indicator { a, b } => {
                    if !grid.is_periodic(0) {
                        (x.min(b) - a).max(0.0)
                    } else {
                        let y = x - o;
                        let periods = (y / len).floor();
                        let r = y - periods * len + o;
                        periods * (b - a) + (r.min(b) - a).max(0.0)
                    }
                }
                Profile::Checkerboard { .. } => return Err(invalid("checkerboards have no shifted form")),
            })
        };
        let values = (0..grid.len())
            .map(|k| {
                let (x0, x1) = grid.cell_bounds(k, 0);
                Ok((primitive(x1 - shift)? - primitive(x0 - shift)?) / (x1 - x0))
            })
            .collect::<Result<Vec<_>>>()?;
        CellField::new(*grid, values, 0.0)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => write!(f, "constant({c})"),
            Profile::Indicator { a, b } => write!(f, "indicator({a}, {b})"),
            Profile::Sine => write!(f, "sine"),
            Profile::Cosine => write!(f, "cosine"),
            Profile::Checkerboard { blocks } => write!(f, "checkerboard({blocks})"),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            None => (s, Vec::new()),
            Some(open) => {
                let inner =
                    s[open + 1..].strip_suffix(')').ok_or_else(|| invalid(format!("missing `)` in `{s}`")))?;
                let args = inner
                    .split(',')
                    .map(|a| a.trim().parse::<f64>().map_err(|_| invalid(format!("bad profile argument `{a}`"))))
                    .collect::<Result<Vec<_>>>()?;
                (s[..open].trim(), args)
            }
        };
        match (name, args.as_slice()) {
            ("constant", [c]) => Ok(Profile::Constant(*c)),
            ("indicator", [a, b]) if a < b => Ok(Profile::Indicator { a: *a, b: *b }),
            ("sine", []) => Ok(Profile::Sine),
            ("cosine", []) => Ok(Profile::Cosine),
            ("checkerboard", [n]) if *n >= 1.0 && n.fract() == 0.0 => Ok(Profile::Checkerboard { blocks: *n as usize }),
            _ => Err(invalid(format!(
                "unknown initial profile `{s}`; expected constant(c), indicator(a, b), sine, cosine or checkerboard(n)"
            ))),
        }
    }
}
