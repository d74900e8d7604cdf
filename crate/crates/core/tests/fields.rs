use krlab::fields::{builtin_velocity, cell_average, CellField, Grid, VelocityField};
use proptest::prelude::*;

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

// ∫_a^b Σ c_k x^k / (b - a)
fn poly_average(c: &[f64], a: f64, b: f64) -> f64 {
    let prim = |x: f64| c.iter().enumerate().map(|(k, &ck)| ck * x.powi(k as i32 + 1) / (k + 1) as f64).sum::<f64>();
    (prim(b) - prim(a)) / (b - a)
}

proptest! {
    #[test]
    fn cell_average_is_exact_on_quartics_1d(
        c in prop::collection::vec(-5.0f64..5.0, 5),
        n in 1usize..40,
    ) {
        let g = Grid::unit_interval(n).unwrap();
        let avg = cell_average(|p| poly(&c, p[0]), &g).unwrap();
        for (k, v) in avg.values().iter().enumerate() {
            let (a, b) = g.cell_bounds(k, 0);
            prop_assert!((v - poly_average(&c, a, b)).abs() < 1e-12);
        }
    }

    #[test]
    fn cell_average_is_exact_on_tensor_quartics_2d(
        cx in prop::collection::vec(-2.0f64..2.0, 5),
        cy in prop::collection::vec(-2.0f64..2.0, 5),
        n in 1usize..12,
    ) {
        let g = Grid::new(&[(0.0, 1.0), (-1.0, 1.0)], &[n, n + 1]).unwrap();
        let avg = cell_average(|p| poly(&cx, p[0]) * poly(&cy, p[1]), &g).unwrap();
        for (k, v) in avg.values().iter().enumerate() {
            let (x0, x1) = g.cell_bounds(k, 0);
            let (y0, y1) = g.cell_bounds(k, 1);
            let exact = poly_average(&cx, x0, x1) * poly_average(&cy, y0, y1);
            prop_assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn lq_norm_is_monotone_in_q(values in prop::collection::vec(-10.0f64..10.0, 1..64)) {
        let g = Grid::unit_interval(values.len()).unwrap();
        let f = CellField::new(g, values, 0.0).unwrap();
        let qs = [1.0, 1.5, 2.0, 3.0, 8.0, f64::INFINITY];
        for w in qs.windows(2) {
            let (a, b) = (f.lq_norm(w[0]), f.lq_norm(w[1]));
            prop_assert!(a <= b * (1.0 + 1e-12) + 1e-300, "q = {} gives {a}, q = {} gives {b}", w[0], w[1]);
        }
    }

    #[test]
    fn mass_is_the_volume_weighted_sum(
        values in prop::collection::vec(-3.0f64..3.0, 16),
        lx in 1.0f64..2.0,
        ly in 1.0f64..2.0,
    ) {
        let g = Grid::new(&[(0.0, lx), (1.0, 1.0 + ly)], &[4, 4]).unwrap();
        let f = CellField::new(g, values.clone(), 0.0).unwrap();
        let direct: f64 = values.iter().map(|v| v * lx * ly / 16.0).sum();
        prop_assert!((f.mass() - direct).abs() < 1e-12);
    }
}

#[test]
fn divergence_free_fields_have_vanishing_sampled_divergence() {
    let fields = [
        builtin_velocity("rigid_rotation", &[1.3]).unwrap(),
        builtin_velocity("shear_x", &[0.7, 3.0]).unwrap(),
        builtin_velocity("shear_y", &[1.1, 2.0]).unwrap(),
        builtin_velocity("alternating_shear", &[1.0, 1.0, 0.5]).unwrap(),
        builtin_velocity("constant", &[0.3, -0.2]).unwrap(),
    ];
    // centred differences on a 10×10 lattice at 10 times
    let h = 1e-5;
    for u in &fields {
        assert!(u.is_divergence_free());
        for s in 0..10 {
            let t = 0.013 + 0.1 * s as f64;
            for i in 0..10 {
                for j in 0..10 {
                    let x = [0.05 + 0.1 * i as f64, 0.05 + 0.1 * j as f64];
                    let fd = (u.value(t, [x[0] + h, x[1]])[0] - u.value(t, [x[0] - h, x[1]])[0]
                        + u.value(t, [x[0], x[1] + h])[1]
                        - u.value(t, [x[0], x[1] - h])[1])
                        / (2.0 * h);
                    assert!(u.divergence(t, x).abs() <= 1e-10, "{}", u.label());
                    assert!(fd.abs() <= 1e-8, "{} at {x:?}: {fd}", u.label());
                }
            }
        }
    }
}

#[test]
fn oscillating_field_has_the_stated_divergence() {
    let u = builtin_velocity("oscillating", &[3.0]).unwrap();
    for i in 0..50 {
        let x = (i as f64 + 0.5) / 50.0;
        let exact = (6.0 * std::f64::consts::PI * x).cos();
        assert!((u.divergence(0.0, [x, 0.0]) - exact).abs() < 1e-12);
    }
}
