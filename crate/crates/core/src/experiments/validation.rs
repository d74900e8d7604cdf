use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fields::{builtin_velocity, Builtin, Grid, Point, VelocityField};
use crate::lagrangian::FlowMap;
use crate::solver::{solve_upwind, UpwindOptions};
use crate::transport::{
    enumerate_vertices, kr_entropic, kr_exact, CostMatrix, DiscreteMeasure, EntropicOptions, KrSetup, Metric,
};

use super::{Contract, Profile};

const SEED: u64 = 0x6b72_6c61_62;

fn random_measure(rng: &mut ChaCha8Rng, n: usize, mass: f64) -> DiscreteMeasure {
    let points: Vec<Point> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    DiscreteMeasure::new(points, raw.iter().map(|w| w * mass / total).collect()).expect("positive weights")
}

fn metric_axioms(rng: &mut ChaCha8Rng, instances: usize) -> Result<Contract> {
    let setup = KrSetup::new(0.1, 1.0);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let n = rng.gen_range(1..=10);
        let [a, b, c] = [0, 1, 2].map(|_| random_measure(rng, n, 1.0));
        let ab = kr_exact(&a, &b, &setup)?.value;
        let ba = kr_exact(&b, &a, &setup)?.value;
        let bc = kr_exact(&b, &c, &setup)?.value;
        let ac = kr_exact(&a, &c, &setup)?.value;
        let aa = kr_exact(&a, &a, &setup)?.value;
        let defects = [(ab - ba).abs(), ac - ab - bc, aa.abs()];
        let d = defects.iter().copied().fold(0.0, f64::max);
        worst = worst.max(d);
        violations += usize::from(d > 1e-9);
    }
    Ok(Contract::new(
        "metric axioms",
        violations == 0,
        format!("{violations} violations in {instances} triples, worst defect {worst:.2e}"),
    ))
}

fn oracle_equivalence(rng: &mut ChaCha8Rng, instances: usize) -> Result<Contract> {
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (n, m) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let a = random_measure(rng, n, 1.0);
        let b = random_measure(rng, m, 1.0);
        let setup = KrSetup::new(rng.gen_range(0.01..1.0), 1.0);
        let exact = kr_exact(&a, &b, &setup)?;
        let cost = CostMatrix::from_fn(n, m, |i, j| (Metric::euclidean().distance(a.points()[i], b.points()[j]) / setup.delta).ln_1p())?;
        let (brute, _) = enumerate_vertices(a.weights(), b.weights(), &cost)?;
        worst = worst.max((exact.cost - brute).abs());
    }
    Ok(Contract::new(
        "oracle equivalence",
        worst <= 1e-9,
        format!("network simplex vs vertex enumeration on {instances} instances, max gap {worst:.2e}"),
    ))
}

fn entropic_agreement(rng: &mut ChaCha8Rng, instances: usize) -> Result<Contract> {
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let n = rng.gen_range(100..=200);
        let a = random_measure(rng, n, 1.0);
        let b = random_measure(rng, n, 1.0);
        let setup = KrSetup::new(0.05, 1.0);
        let exact = kr_exact(&a, &b, &setup)?.value;
        let approx = kr_entropic(&a, &b, &setup, &EntropicOptions::default())?.value;
        worst = worst.max((exact - approx).abs());
    }
    Ok(Contract::new(
        "entropic agreement",
        worst <= 1e-3,
        format!("max |entropic - exact| {worst:.2e} on {instances} instances (<= 1e-3)"),
    ))
}

fn conservation(steps: usize) -> Result<Contract> {
    let grid = Grid::torus(&[(0.0, 1.0), (0.0, 1.0)], &[16, 16])?;
    let u = builtin_velocity("alternating_shear", &[1.0, 1.0, 1.0])?;
    let initial = Profile::Checkerboard { blocks: 2 }.average(&grid)?.scaled(0.5);
    let initial = crate::fields::CellField::new(grid, initial.values().iter().map(|v| v + 1.0).collect(), 0.0)?;
    // CFL step is 0.45 h / ‖u‖∞ with h = 1/16
    let horizon = steps as f64 * 0.45 / 16.0;
    let report = solve_upwind(&u, &initial, horizon, &UpwindOptions::default())?;
    let drift = report.mass_drift();
    Ok(Contract::new(
        "mass conservation",
        drift <= 1e-12,
        format!("relative mass drift {drift:.2e} over {} steps (<= 1e-12)", report.steps),
    ))
}

fn gronwall(rng: &mut ChaCha8Rng, pairs: usize) -> Result<Contract> {
    let square = Grid::new(&[(0.0, 1.0), (0.0, 1.0)], &[8, 8])?;
    let torus = Grid::torus(&[(0.0, 1.0), (0.0, 1.0)], &[8, 8])?;
    let line = Grid::new(&[(0.0, 1.0)], &[8])?;
    let cases: Vec<(Builtin, Grid)> = vec![
        (builtin_velocity("rigid_rotation", &[1.0])?, square),
        (builtin_velocity("shear_x", &[0.5, 1.0])?, torus),
        (builtin_velocity("alternating_shear", &[0.5, 1.0, 1.0])?, torus),
        (builtin_velocity("oscillating", &[2.0])?, line),
    ];
    let t = 0.5;
    let mut violations = 0;
    let mut total = 0;
    for (u, domain) in &cases {
        let flow = FlowMap::new(u, 1e-3, *domain)?;
        let bound = flow.lipschitz_integral(t);
        let inside = |rng: &mut ChaCha8Rng| -> Point {
            match u {
                Builtin::RigidRotation { .. } => {
                    // stay on circles inside the unit square
                    let (r, a) = (rng.gen_range(0.0..0.45), rng.gen_range(0.0..std::f64::consts::TAU));
                    [0.5 + r * a.cos(), 0.5 + r * a.sin()]
                }
                _ if u.dim() == Some(1) => [rng.gen(), 0.0],
                _ => [rng.gen(), rng.gen()],
            }
        };
        for _ in 0..pairs {
            let (x, y) = (inside(rng), inside(rng));
            if domain.distance(x, y) < 1e-6 {
                continue;
            }
            let r = flow.two_particle_log_ratio(x, y, t)?;
            total += 1;
            violations += usize::from(r.abs() > bound * (1.0 + 1e-9) + 1e-12);
        }
    }
    Ok(Contract::new(
        "gronwall sandwich",
        violations == 0,
        format!("{violations} violations in {total} pairs over {} fields", cases.len()),
    ))
}

/// Invariant checks behind the `validate` subcommand: metric axioms of
/// `D_δ`, agreement with the brute-force and entropic solvers, mass
/// conservation of the upwind scheme and the Gronwall bounds on flows.
/// `quick` shrinks every sample count.
pub fn validation_suite(quick: bool) -> Result<Vec<Contract>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let scale = |full: usize, small: usize| if quick { small } else { full };
    Ok(vec![
        metric_axioms(&mut rng, scale(500, 50))?,
        oracle_equivalence(&mut rng, scale(200, 40))?,
        entropic_agreement(&mut rng, scale(5, 1))?,
        conservation(scale(10_000, 1_000))?,
        gronwall(&mut rng, scale(1000, 100))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let out = validation_suite(true).unwrap();
        assert_eq!(out.len(), 5);
        for c in &out {
            assert!(c.passed, "{c}");
        }
    }
}
