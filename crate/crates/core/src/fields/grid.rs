use serde::Serialize;

use crate::error::{invalid, Result};

/// A point in the plane. One-dimensional problems use the first coordinate
/// and keep the second at zero.
pub type Point = [f64; 2];

/// Minimum ratio `h_i / h` accepted between cell edge lengths.
pub const REGULARITY: f64 = 0.5;

/// Tensor tessellation of a box in one or two dimensions into equal
/// rectangular cells.
///
/// Cells are numbered `i + nx * j`. Axes flagged periodic wrap around, which
/// turns the box into a torus along that axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    dim: usize,
    origin: [f64; 2],
    length: [f64; 2],
    cells: [usize; 2],
    spacing: [f64; 2],
    periodic: [bool; 2],
}

/// Interface `K|L` between two neighbouring cells, oriented from `lower`
/// to `upper` along `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub lower: usize,
    pub upper: usize,
    pub axis: usize,
    /// Coordinate of the face along `axis` (for wrap faces, the upper edge
    /// of the lower cell).
    pub position: f64,
    /// Extent of the face along the other axis (empty in 1D).
    pub span: (f64, f64),
}

/// Portion of the outer boundary belonging to one cell (non-periodic axes only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace {
    pub cell: usize,
    pub axis: usize,
    /// Outward normal direction along `axis`: `-1.0` or `1.0`.
    pub outward: f64,
    pub position: f64,
    pub span: (f64, f64),
}

impl Grid {
    /// Build a grid over `bounds` (one `(lo, hi)` pair per axis) with the
    /// given number of cells per axis.
    pub fn new(bounds: &[(f64, f64)], cells: &[usize]) -> Result<Self> {
        Self::build(bounds, cells, [false; 2])
    }

    /// Same as [`Grid::new`] with every axis periodic.
    pub fn torus(bounds: &[(f64, f64)], cells: &[usize]) -> Result<Self> {
        Self::build(bounds, cells, [true; 2])
    }

    /// Unit interval `[0, 1]` with `n` cells.
    pub fn unit_interval(n: usize) -> Result<Self> {
        Self::new(&[(0.0, 1.0)], &[n])
    }

    fn build(bounds: &[(f64, f64)], cells: &[usize], periodic: [bool; 2]) -> Result<Self> {
        let dim = bounds.len();
        if !(1..=2).contains(&dim) {
            return Err(invalid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if cells.len() != dim {
            return Err(invalid("one cell count per axis required"));
        }
        let mut origin = [0.0; 2];
        let mut length = [1.0; 2];
        let mut count = [1usize; 2];
        let mut spacing = [1.0; 2];
        for axis in 0..dim {
            let (lo, hi) = bounds[axis];
            let extent = hi - lo;
            if !(extent.is_finite() && extent > 0.0) {
                return Err(invalid(format!("extent along axis {axis} must be positive")));
            }
            if cells[axis] == 0 {
                return Err(invalid(format!("cell count along axis {axis} must be positive")));
            }
            if periodic[axis] && cells[axis] < 2 {
                return Err(invalid("periodic axes need at least two cells"));
            }
            origin[axis] = lo;
            length[axis] = extent;
            count[axis] = cells[axis];
            spacing[axis] = extent / cells[axis] as f64;
        }
        let h = spacing[..dim].iter().cloned().fold(0.0, f64::max);
        for axis in 0..dim {
            if spacing[axis] < REGULARITY * h {
                return Err(invalid(format!(
                    "irregular tessellation: h_{axis} = {} < {REGULARITY}·h = {}",
                    spacing[axis],
                    REGULARITY * h
                )));
            }
        }
        let mut periodic_flags = [false; 2];
        periodic_flags[..dim].copy_from_slice(&periodic[..dim]);
        Ok(Grid { dim, origin, length, cells: count, spacing, periodic: periodic_flags })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self, axis: usize) -> usize {
        self.cells[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacing[axis]
    }

    /// Maximal edge length.
    pub fn h(&self) -> f64 {
        self.spacing[..self.dim].iter().cloned().fold(0.0, f64::max)
    }

    pub fn h_min(&self) -> f64 {
        self.spacing[..self.dim].iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn origin(&self, axis: usize) -> f64 {
        self.origin[axis]
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.length[axis]
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.periodic[axis]
    }

    /// Periods of the periodic axes, `None` for bounded axes.
    pub fn periods(&self) -> [Option<f64>; 2] {
        let mut out = [None; 2];
        for axis in 0..self.dim {
            if self.periodic[axis] {
                out[axis] = Some(self.length[axis]);
            }
        }
        out
    }

    /// Measure of the whole domain.
    pub fn volume(&self) -> f64 {
        self.length[..self.dim].iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing[..self.dim].iter().product()
    }

    /// Measure of a face orthogonal to `axis` (1 in one dimension).
    pub fn face_area(&self, axis: usize) -> f64 {
        self.cell_volume() / self.spacing[axis]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.cells[0] * j
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.cells[0], idx / self.cells[0])
    }

    /// Lower and upper bounds of a cell along `axis`.
    pub fn cell_bounds(&self, idx: usize, axis: usize) -> (f64, f64) {
        let (i, j) = self.coords(idx);
        let k = if axis == 0 { i } else { j };
        let lo = self.origin[axis] + k as f64 * self.spacing[axis];
        (lo, lo + self.spacing[axis])
    }

    pub fn cell_center(&self, idx: usize) -> Point {
        let mut p = [0.0; 2];
        for (axis, c) in p.iter_mut().enumerate().take(self.dim) {
            let (lo, hi) = self.cell_bounds(idx, axis);
            *c = 0.5 * (lo + hi);
        }
        p
    }

    /// Neighbour across the `side` (`-1` or `+1`) face along `axis`,
    /// wrapping on periodic axes.
    pub fn neighbor(&self, idx: usize, axis: usize, side: isize) -> Option<usize> {
        if axis >= self.dim {
            return None;
        }
        let (i, j) = self.coords(idx);
        let k = if axis == 0 { i } else { j } as isize;
        let n = self.cells[axis] as isize;
        let mut next = k + side;
        if next < 0 || next >= n {
            if !self.periodic[axis] {
                return None;
            }
            next = next.rem_euclid(n);
        }
        let next = next as usize;
        Some(if axis == 0 { self.index(next, j) } else { self.index(i, next) })
    }

    /// All interior faces (including wrap faces on periodic axes), in a
    /// fixed deterministic order.
    pub fn faces(&self) -> Vec<Face> {
        let mut out = Vec::new();
        for axis in 0..self.dim {
            for idx in 0..self.len() {
                if let Some(upper) = self.neighbor(idx, axis, 1) {
                    let (_, hi) = self.cell_bounds(idx, axis);
                    out.push(Face { lower: idx, upper, axis, position: hi, span: self.span(idx, axis) });
                }
            }
        }
        out
    }

    /// Faces on the outer boundary of non-periodic axes.
    pub fn boundary_faces(&self) -> Vec<BoundaryFace> {
        let mut out = Vec::new();
        for axis in 0..self.dim {
            if self.periodic[axis] {
                continue;
            }
            for idx in 0..self.len() {
                let (lo, hi) = self.cell_bounds(idx, axis);
                if self.neighbor(idx, axis, -1).is_none() {
                    out.push(BoundaryFace { cell: idx, axis, outward: -1.0, position: lo, span: self.span(idx, axis) });
                }
                if self.neighbor(idx, axis, 1).is_none() {
                    out.push(BoundaryFace { cell: idx, axis, outward: 1.0, position: hi, span: self.span(idx, axis) });
                }
            }
        }
        out
    }

    fn span(&self, idx: usize, axis: usize) -> (f64, f64) {
        if self.dim == 1 {
            (0.0, 0.0)
        } else {
            self.cell_bounds(idx, 1 - axis)
        }
    }

    /// Distance between two points; minimum-image along periodic axes.
    pub fn distance(&self, a: Point, b: Point) -> f64 {
        let mut s = 0.0;
        for axis in 0..self.dim {
            let mut d = (a[axis] - b[axis]).abs();
            if self.periodic[axis] {
                let l = self.length[axis];
                d %= l;
                d = d.min(l - d);
            }
            s += d * d;
        }
        s.sqrt()
    }

    /// Same geometry with the given number of cells per axis.
    pub fn with_cells(&self, cells: &[usize]) -> Result<Self> {
        let bounds: Vec<(f64, f64)> =
            (0..self.dim).map(|a| (self.origin[a], self.origin[a] + self.length[a])).collect();
        Self::build(&bounds, cells, self.periodic)
    }
}
