//! Grids, piecewise-constant densities and the analytic velocity catalog.

mod cell_field;
mod grid;
mod velocity;

pub use cell_field::{cell_average, CellField};
pub use grid::{BoundaryFace, Face, Grid, Point, REGULARITY};
pub use velocity::{
    boundary_normal_speed, builtin_velocity, gradient_lp, velocity_distance_lp, Builtin, VelocityField, CATALOG,
};
