use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::quadrature::gauss5_avg;

use super::grid::{Grid, Point};

/// Time-dependent velocity field `u(t, x)` with the analytic metadata the
/// solvers and estimates need.
pub trait VelocityField: Send + Sync {
    /// Spatial dimension, or `None` if the field makes sense in any dimension.
    fn dim(&self) -> Option<usize>;

    fn value(&self, t: f64, x: Point) -> Point;

    fn divergence(&self, t: f64, x: Point) -> f64;

    /// Velocity gradient `∂_j u_i` as `[[∂_x u_x, ∂_y u_x], [∂_x u_y, ∂_y u_y]]`.
    fn gradient(&self, t: f64, x: Point) -> [[f64; 2]; 2];

    fn is_divergence_free(&self) -> bool;

    fn is_autonomous(&self) -> bool;

    /// `‖u(t, ·)‖_∞` over the box of `domain`.
    fn sup_norm(&self, t: f64, domain: &Grid) -> f64;

    /// Lipschitz constant `sup_x |∇u(t, x)|` (Frobenius norm).
    fn gradient_sup(&self, t: f64) -> f64;

    /// `‖(div u)^-(t, ·)‖_∞`.
    fn negative_divergence_sup(&self, t: f64) -> f64;

    /// First time strictly after `t` at which the field jumps in time.
    fn next_switch(&self, _t: f64) -> Option<f64> {
        None
    }

    fn label(&self) -> String;
}

/// Catalog of analytic velocity fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    Zero,
    /// Uniform translation; `dim` is 1 or 2.
    Constant { c: Point, dim: usize },
    /// `u_k(x) = sin(2πkx) / (2πk)` on the line.
    Oscillating { k: f64 },
    /// Rigid rotation with angular velocity `omega` about `center`.
    RigidRotation { omega: f64, center: Point },
    /// `(A sin(2πmy), 0)`.
    ShearX { amplitude: f64, modes: f64 },
    /// `(0, A sin(2πmx))`.
    ShearY { amplitude: f64, modes: f64 },
    /// `ShearX` on the first half of every period, `ShearY` on the second.
    AlternatingShear { amplitude: f64, modes: f64, period: f64 },
    /// Linear strain `u(x) = rate · x` in one dimension.
    Linear { rate: f64 },
}

/// Names accepted by [`builtin_velocity`], with parameter lists.
pub const CATALOG: &[(&str, &str)] = &[
    ("zero", "zero"),
    ("constant", "constant(c) | constant(c1, c2)"),
    ("oscillating", "oscillating(k): u = sin(2πkx)/(2πk), 1D, compressible"),
    ("rigid_rotation", "rigid_rotation(ω[, cx, cy]): rotation about (cx, cy), default (0.5, 0.5)"),
    ("shear_x", "shear_x(A, m): u = (A sin(2πmy), 0), divergence-free"),
    ("shear_y", "shear_y(A, m): u = (0, A sin(2πmx)), divergence-free"),
    ("alternating_shear", "alternating_shear(A, m, period): shear_x then shear_y every half period"),
    ("linear", "linear(a): u = a·x, 1D"),
];

/// Look up a catalog field by name.
pub fn builtin_velocity(name: &str, params: &[f64]) -> Result<Builtin> {
    let arity = |n: usize| -> Result<()> {
        if params.len() != n {
            Err(invalid(format!("{name} takes {n} parameter(s), got {}", params.len())))
        } else {
            Ok(())
        }
    };
    if params.iter().any(|p| !p.is_finite()) {
        return Err(invalid("field parameters must be finite"));
    }
    let field = match name {
        "zero" => {
            arity(0)?;
            Builtin::Zero
        }
        "constant" => match params {
            [c] => Builtin::Constant { c: [*c, 0.0], dim: 1 },
            [a, b] => Builtin::Constant { c: [*a, *b], dim: 2 },
            _ => return Err(invalid("constant takes 1 or 2 parameters")),
        },
        "oscillating" => {
            arity(1)?;
            if params[0] < 1.0 || params[0].fract() != 0.0 {
                return Err(invalid("oscillating(k) needs a positive integer k"));
            }
            Builtin::Oscillating { k: params[0] }
        }
        "rigid_rotation" => match params {
            [w] => Builtin::RigidRotation { omega: *w, center: [0.5, 0.5] },
            [w, cx, cy] => Builtin::RigidRotation { omega: *w, center: [*cx, *cy] },
            _ => return Err(invalid("rigid_rotation takes 1 or 3 parameters")),
        },
        "shear_x" => {
            arity(2)?;
            Builtin::ShearX { amplitude: params[0], modes: params[1] }
        }
        "shear_y" => {
            arity(2)?;
            Builtin::ShearY { amplitude: params[0], modes: params[1] }
        }
        "alternating_shear" => {
            arity(3)?;
            if params[2] <= 0.0 {
                return Err(invalid("alternating_shear period must be positive"));
            }
            Builtin::AlternatingShear { amplitude: params[0], modes: params[1], period: params[2] }
        }
        "linear" => {
            arity(1)?;
            Builtin::Linear { rate: params[0] }
        }
        other => return Err(invalid(format!("unknown velocity field `{other}`"))),
    };
    Ok(field)
}

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Zero => "zero",
            Builtin::Constant { .. } => "constant",
            Builtin::Oscillating { .. } => "oscillating",
            Builtin::RigidRotation { .. } => "rigid_rotation",
            Builtin::ShearX { .. } => "shear_x",
            Builtin::ShearY { .. } => "shear_y",
            Builtin::AlternatingShear { .. } => "alternating_shear",
            Builtin::Linear { .. } => "linear",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Builtin::Zero => vec![],
            Builtin::Constant { c, dim } => c[..dim].to_vec(),
            Builtin::Oscillating { k } => vec![k],
            Builtin::RigidRotation { omega, center } => vec![omega, center[0], center[1]],
            Builtin::ShearX { amplitude, modes } | Builtin::ShearY { amplitude, modes } => {
                vec![amplitude, modes]
            }
            Builtin::AlternatingShear { amplitude, modes, period } => vec![amplitude, modes, period],
            Builtin::Linear { rate } => vec![rate],
        }
    }

    /// The shear active at time `t` for the alternating driver; the field
    /// itself otherwise.
    fn active(&self, t: f64) -> Builtin {
        match *self {
            Builtin::AlternatingShear { amplitude, modes, period } => {
                let phase = t.rem_euclid(period);
                if phase < 0.5 * period {
                    Builtin::ShearX { amplitude, modes }
                } else {
                    Builtin::ShearY { amplitude, modes }
                }
            }
            other => other,
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params();
        if params.is_empty() {
            return write!(f, "{}", self.name());
        }
        let list: Vec<String> = params.iter().map(|p| p.to_string()).collect();
        write!(f, "{}({})", self.name(), list.join(", "))
    }
}

impl FromStr for Builtin {
    type Err = Error;

    /// Parses `name` or `name(p1, p2, ...)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, params) = match s.find('(') {
            None => (s, Vec::new()),
            Some(open) => {
                let inner = s[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| invalid(format!("missing `)` in field `{s}`")))?;
                let params = inner
                    .split(',')
                    .map(|p| p.trim())
                    .filter(|p| !p.is_empty())
                    .map(|p| p.parse::<f64>().map_err(|_| invalid(format!("bad field parameter `{p}`"))))
                    .collect::<Result<Vec<_>>>()?;
                (s[..open].trim(), params)
            }
        };
        builtin_velocity(name, &params)
    }
}

fn corner_radius(domain: &Grid, center: Point) -> f64 {
    let mut r: f64 = 0.0;
    let dim = domain.dim();
    for cx in [domain.origin(0), domain.origin(0) + domain.length(0)] {
        if dim == 1 {
            r = r.max((cx - center[0]).abs());
            continue;
        }
        for cy in [domain.origin(1), domain.origin(1) + domain.length(1)] {
            r = r.max((cx - center[0]).hypot(cy - center[1]));
        }
    }
    r
}

impl VelocityField for Builtin {
    fn dim(&self) -> Option<usize> {
        match self {
            Builtin::Zero => None,
            Builtin::Constant { dim, .. } => Some(*dim),
            Builtin::Oscillating { .. } | Builtin::Linear { .. } => Some(1),
            _ => Some(2),
        }
    }

    fn value(&self, t: f64, x: Point) -> Point {
        match self.active(t) {
            Builtin::Zero => [0.0, 0.0],
            Builtin::Constant { c, .. } => c,
            Builtin::Oscillating { k } => [(2.0 * PI * k * x[0]).sin() / (2.0 * PI * k), 0.0],
            Builtin::RigidRotation { omega, center } => {
                [-omega * (x[1] - center[1]), omega * (x[0] - center[0])]
            }
            Builtin::ShearX { amplitude, modes } => [amplitude * (2.0 * PI * modes * x[1]).sin(), 0.0],
            Builtin::ShearY { amplitude, modes } => [0.0, amplitude * (2.0 * PI * modes * x[0]).sin()],
            Builtin::Linear { rate } => [rate * x[0], 0.0],
            Builtin::AlternatingShear { .. } => unreachable!(),
        }
    }

    fn divergence(&self, t: f64, x: Point) -> f64 {
        let g = self.gradient(t, x);
        g[0][0] + g[1][1]
    }

    fn gradient(&self, t: f64, x: Point) -> [[f64; 2]; 2] {
        match self.active(t) {
            Builtin::Zero | Builtin::Constant { .. } => [[0.0; 2]; 2],
            Builtin::Oscillating { k } => [[(2.0 * PI * k * x[0]).cos(), 0.0], [0.0, 0.0]],
            Builtin::RigidRotation { omega, .. } => [[0.0, -omega], [omega, 0.0]],
            Builtin::ShearX { amplitude, modes } => {
                let w = 2.0 * PI * modes;
                [[0.0, amplitude * w * (w * x[1]).cos()], [0.0, 0.0]]
            }
            Builtin::ShearY { amplitude, modes } => {
                let w = 2.0 * PI * modes;
                [[0.0, 0.0], [amplitude * w * (w * x[0]).cos(), 0.0]]
            }
            Builtin::Linear { rate } => [[rate, 0.0], [0.0, 0.0]],
            Builtin::AlternatingShear { .. } => unreachable!(),
        }
    }

    fn is_divergence_free(&self) -> bool {
        !matches!(self, Builtin::Oscillating { .. } | Builtin::Linear { .. })
    }

    fn is_autonomous(&self) -> bool {
        !matches!(self, Builtin::AlternatingShear { .. })
    }

    fn sup_norm(&self, t: f64, domain: &Grid) -> f64 {
        match self.active(t) {
            Builtin::Zero => 0.0,
            Builtin::Constant { c, .. } => c[0].hypot(c[1]),
            Builtin::Oscillating { k } => 1.0 / (2.0 * PI * k),
            Builtin::RigidRotation { omega, center } => omega.abs() * corner_radius(domain, center),
            Builtin::ShearX { amplitude, .. } | Builtin::ShearY { amplitude, .. } => amplitude.abs(),
            Builtin::Linear { rate } => rate.abs() * corner_radius(domain, [0.0, 0.0]),
            Builtin::AlternatingShear { .. } => unreachable!(),
        }
    }

    fn gradient_sup(&self, t: f64) -> f64 {
        match self.active(t) {
            Builtin::Zero | Builtin::Constant { .. } => 0.0,
            Builtin::Oscillating { .. } => 1.0,
            Builtin::RigidRotation { omega, .. } => omega.abs() * 2f64.sqrt(),
            Builtin::ShearX { amplitude, modes } | Builtin::ShearY { amplitude, modes } => {
                (amplitude * 2.0 * PI * modes).abs()
            }
            Builtin::Linear { rate } => rate.abs(),
            Builtin::AlternatingShear { .. } => unreachable!(),
        }
    }

    fn negative_divergence_sup(&self, _t: f64) -> f64 {
        match *self {
            Builtin::Oscillating { .. } => 1.0,
            Builtin::Linear { rate } => (-rate).max(0.0),
            _ => 0.0,
        }
    }

    fn next_switch(&self, t: f64) -> Option<f64> {
        match *self {
            Builtin::AlternatingShear { period, .. } => {
                let half = 0.5 * period;
                let mut n = (t / half).floor() + 1.0;
                // guard against t sitting a rounding error below a switch
                if n * half - t <= 1e-12 * half.max(t.abs()) {
                    n += 1.0;
                }
                Some(n * half)
            }
            _ => None,
        }
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

/// Sample points `(x, weight)` of the tensor five-point rule over every
/// cell of `grid`; weights sum to one.
pub(crate) fn domain_quadrature(grid: &Grid) -> Vec<(Point, f64)> {
    let n = grid.len() as f64;
    let mut out = Vec::with_capacity(grid.len() * 25);
    for k in 0..grid.len() {
        let (x0, x1) = grid.cell_bounds(k, 0);
        if grid.dim() == 1 {
            for (x, w) in gauss5_avg(x0, x1) {
                out.push(([x, 0.0], w / n));
            }
        } else {
            let (y0, y1) = grid.cell_bounds(k, 1);
            for (x, wx) in gauss5_avg(x0, x1) {
                for (y, wy) in gauss5_avg(y0, y1) {
                    out.push(([x, y], wx * wy / n));
                }
            }
        }
    }
    out
}

fn power_average(samples: impl Iterator<Item = (f64, f64)>, p: f64) -> f64 {
    if p.is_infinite() {
        return samples.fold(0.0, |m, (v, _)| m.max(v));
    }
    let s: f64 = samples.map(|(v, w)| w * v.powf(p)).sum();
    s.powf(1.0 / p)
}

/// Volume-averaged Sobolev seminorm `(⨍ |∇u(t, ·)|^p)^{1/p}` over the
/// domain of `grid`, by per-cell Gauss quadrature.
pub fn gradient_lp(field: &dyn VelocityField, t: f64, p: f64, grid: &Grid) -> f64 {
    let nodes = domain_quadrature(grid);
    power_average(
        nodes.iter().map(|&(x, w)| {
            let g = field.gradient(t, x);
            ((g[0][0].powi(2) + g[0][1].powi(2) + g[1][0].powi(2) + g[1][1].powi(2)).sqrt(), w)
        }),
        p,
    )
}

/// Volume-averaged distance `(⨍ |u(t, ·) - v(t, ·)|^p)^{1/p}`.
pub fn velocity_distance_lp(u: &dyn VelocityField, v: &dyn VelocityField, t: f64, p: f64, grid: &Grid) -> f64 {
    let nodes = domain_quadrature(grid);
    power_average(
        nodes.iter().map(|&(x, w)| {
            let a = u.value(t, x);
            let b = v.value(t, x);
            ((a[0] - b[0]).hypot(a[1] - b[1]), w)
        }),
        p,
    )
}

/// Largest `|u · ν|` over sampled points of the non-periodic boundary.
pub fn boundary_normal_speed(field: &dyn VelocityField, t: f64, grid: &Grid) -> f64 {
    let mut worst: f64 = 0.0;
    for face in grid.boundary_faces() {
        let mut probe = |along: f64| {
            let mut x = [0.0; 2];
            x[face.axis] = face.position;
            if grid.dim() == 2 {
                x[1 - face.axis] = along;
            }
            worst = worst.max(field.value(t, x)[face.axis].abs());
        };
        if grid.dim() == 1 {
            probe(0.0);
        } else {
            for (s, _) in gauss5_avg(face.span.0, face.span.1) {
                probe(s);
            }
        }
    }
    worst
}
