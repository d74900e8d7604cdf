use std::f64::consts::PI;

use krlab::fields::{cell_average, CellField, Grid};
use krlab::transport::{
    bv_seminorm, kr_distance, kr_exact, mixing_scale, neg_sobolev, Boundary, DiscreteMeasure, KrSetup,
    Normalization,
};
use proptest::prelude::*;

fn measure(points: &[(f64, f64)], weights: &[f64]) -> DiscreteMeasure {
    let total: f64 = weights.iter().sum();
    DiscreteMeasure::new(points.iter().map(|&(x, y)| [x, y]).collect(), weights.iter().map(|w| w / total).collect())
        .unwrap()
}

fn points(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), n)
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n)
}

fn positive_field(grid: Grid) -> impl Strategy<Value = CellField> {
    prop::collection::vec(0.1f64..2.0, grid.len()).prop_map(move |v| {
        let f = CellField::new(grid, v, 0.0).unwrap();
        f.scaled(1.0 / f.mass())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_a_metric(
        pa in points(6), pb in points(6), pc in points(6),
        wa in weights(6), wb in weights(6), wc in weights(6),
        delta in 0.01f64..1.0,
    ) {
        let setup = KrSetup::new(delta, 1.0);
        let (a, b, c) = (measure(&pa, &wa), measure(&pb, &wb), measure(&pc, &wc));
        let d = |x: &DiscreteMeasure, y: &DiscreteMeasure| kr_exact(x, y, &setup).unwrap().value;
        prop_assert!(d(&a, &a).abs() < 1e-12);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-12);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
        prop_assert!(d(&a, &b) >= 0.0);
    }

    #[test]
    fn distance_decreases_as_delta_grows(
        pa in points(5), pb in points(5), wa in weights(5), wb in weights(5),
        d1 in 0.001f64..0.5, factor in 1.0f64..20.0,
    ) {
        let (a, b) = (measure(&pa, &wa), measure(&pb, &wb));
        let small = kr_exact(&a, &b, &KrSetup::new(d1, 1.0)).unwrap().value;
        let large = kr_exact(&a, &b, &KrSetup::new(d1 * factor, 1.0)).unwrap().value;
        prop_assert!(large <= small + 1e-12);
    }

    #[test]
    fn shared_mass_does_not_move(
        (r1, r2) in positive_field(Grid::new(&[(0.0, 1.0), (0.0, 1.0)], &[3, 3]).unwrap())
            .prop_flat_map(|r1| (Just(r1.clone()), positive_field(*r1.grid()))),
        delta in 0.01f64..1.0,
    ) {
        let grid = *r1.grid();
        let setup = KrSetup::on_grid(delta, &grid);
        let split = kr_distance(&r1, &r2, &setup).unwrap();
        let full = |f: &CellField| {
            let pts = (0..grid.len()).map(|k| grid.cell_center(k)).collect();
            let w = f.values().iter().map(|v| v * grid.cell_volume()).collect();
            DiscreteMeasure::new(pts, w).unwrap()
        };
        let whole = kr_exact(&full(&r1), &full(&r2), &setup).unwrap();
        prop_assert!((split.value - whole.value).abs() < 1e-9, "{} vs {}", split.value, whole.value);
    }

    #[test]
    fn optimal_plans_are_certified(
        pa in points(7), pb in points(5), wa in weights(7), wb in weights(5), delta in 0.01f64..1.0,
    ) {
        let (a, b) = (measure(&pa, &wa), measure(&pb, &wb));
        let r = kr_exact(&a, &b, &KrSetup::new(delta, 1.0)).unwrap();
        prop_assert!(r.plan.marginal_error(&a, &b) < 1e-12);
        prop_assert!(r.dual_gap.abs() < 1e-9);
        prop_assert!(r.slackness < 1e-9);
    }
}

fn half_stripe(n: usize) -> CellField {
    CellField::from_centers(Grid::unit_interval(n).unwrap(), |p| if p[0] < 0.5 { 1.0 } else { -1.0 })
}

#[test]
fn mixing_scale_of_the_half_stripe_converges_to_one_over_e() {
    // continuum optimum is the reflection x ↦ 1 − x: ⨍ log(1 − 2x) = −1
    let mut previous = f64::INFINITY;
    for n in [16, 64, 256] {
        let m = mixing_scale(&half_stripe(n)).unwrap().value;
        let gap = (m - (-1f64).exp()).abs();
        assert!(gap < previous, "n = {n}: {m}");
        previous = gap;
    }
    assert!(previous < 5e-3);
}

#[test]
fn small_delta_limit_recovers_the_mixing_scale_under_mass_normalization() {
    let rho = half_stripe(64);
    let grid = *rho.grid();
    let zero = CellField::constant(grid, 0.0);
    let m = mixing_scale(&rho).unwrap();
    for delta in [1e-2, 1e-3, 1e-4] {
        let r = kr_distance(&rho, &zero, &KrSetup::on_grid(delta, &grid)).unwrap();
        let mass_normalized = (r.value * grid.volume() / r.plan.mass() + delta.ln()).exp();
        // |x − y| ≥ h in the plan, so the log(d/δ + 1) − log(d/δ) error is at most δ/h
        let tolerance = if delta <= 1e-3 { 0.01 } else { 0.7 };
        assert!((mass_normalized / m.value - 1.0).abs() < tolerance, "δ = {delta}: {mass_normalized} vs {}", m.value);
        // weighting log δ by ‖ρ‖_{L¹} = 2 × plan mass instead drifts off by a factor δ^{1/2}
        let l1_weighted = (r.value + delta.ln() * rho.lq_norm(1.0)).exp();
        assert!(l1_weighted < 0.5 * m.value, "δ = {delta}: {l1_weighted}");
    }
    let r = kr_distance(&rho, &zero, &KrSetup::on_grid(1e-4, &grid).with_normalization(Normalization::Mass)).unwrap();
    assert!(((r.value + 1e-4f64.ln()).exp() / m.value - 1.0).abs() < 0.01);
}

#[test]
fn negative_sobolev_norm_of_a_fourier_mode() {
    // −ψ'' = cos(2πkx) gives |ψ'|_{L²} = 1 / (2πk√2)
    for k in [1.0, 2.0, 4.0] {
        let g = Grid::torus(&[(0.0, 1.0)], &[512]).unwrap();
        let rho = cell_average(|p| (2.0 * PI * k * p[0]).cos(), &g).unwrap();
        let norm = neg_sobolev(&rho, Boundary::Periodic).unwrap();
        assert!((norm * 2.0 * PI * k * 2f64.sqrt() - 1.0).abs() < 1e-3, "k = {k}: {norm}");
    }
}

#[test]
fn negative_sobolev_norm_of_the_half_stripe() {
    // ∇ψ = x on [0, 1/2], 1 − x on [1/2, 1]: |∇ψ|_{L²} = 1/√12
    let norm = neg_sobolev(&half_stripe(256), Boundary::Neumann).unwrap();
    assert!((norm * 12f64.sqrt() - 1.0).abs() < 1e-3, "{norm}");
}

fn stripes(grid: Grid, n: usize) -> CellField {
    CellField::from_centers(grid, |p| if ((p[0] * n as f64).floor() as i64) % 2 == 0 { 1.0 } else { -1.0 })
}

fn checkerboard(grid: Grid, n: usize) -> CellField {
    CellField::from_centers(grid, |p| {
        let (i, j) = ((p[0] * n as f64).floor() as i64, (p[1] * n as f64).floor() as i64);
        if (i + j) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    })
}

#[test]
fn sandwich_on_stripes_and_checkerboards() {
    // |∇^{-1}ρ|² ≤ M |∇ρ|_BV holds with constant one; the upper bound
    // M ≤ C |∇^{-1}ρ| needs C = |Ω| / plan mass (Jensen plus Kantorovich duality)
    let square = Grid::new(&[(0.0, 1.0), (0.0, 1.0)], &[16, 16]).unwrap();
    let mut cases: Vec<CellField> = [1, 2, 4].iter().map(|&n| stripes(square, 2 * n)).collect();
    cases.extend([1, 2, 4].iter().map(|&n| checkerboard(square, 2 * n)));
    for rho in &cases {
        let m = mixing_scale(rho).unwrap();
        let hm1 = neg_sobolev(rho, Boundary::Neumann).unwrap();
        let bv = bv_seminorm(rho).unwrap();
        assert!(hm1 * hm1 <= m.value * bv, "lower: {hm1}² vs {} · {bv}", m.value);
        assert!(m.value <= m.volume / m.plan_mass * hm1, "upper: {} vs {hm1}", m.value);
    }
}

#[test]
fn upper_sandwich_with_constant_one_fails_on_the_half_stripe() {
    // M = 1/e exceeds |∇^{-1}ρ| = 1/√12 in the continuum
    let rho = half_stripe(256);
    let m = mixing_scale(&rho).unwrap().value;
    let hm1 = neg_sobolev(&rho, Boundary::Neumann).unwrap();
    assert!(m > 1.2 * hm1, "{m} vs {hm1}");
}

#[test]
fn mixing_scale_of_periodic_stripes_halves_with_the_period() {
    let grid = Grid::torus(&[(0.0, 1.0)], &[256]).unwrap();
    let ms: Vec<f64> = [2, 4, 8, 16].iter().map(|&n| mixing_scale(&stripes(grid, n)).unwrap().value).collect();
    for w in ms.windows(2) {
        assert!((w[1] / w[0] - 0.5).abs() < 0.02, "{ms:?}");
    }
}
