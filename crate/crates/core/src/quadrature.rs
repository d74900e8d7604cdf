//! Fixed Gauss–Legendre rules on reference intervals.

/// Five-point rule on [-1, 1]; exact for polynomials of degree ≤ 9.
pub const GAUSS5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
pub const GAUSS5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Three-point rule on [-1, 1]; exact for polynomials of degree ≤ 5.
pub const GAUSS3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
pub const GAUSS3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Nodes and weights of the five-point rule mapped to `[a, b]`, weights
/// normalised to sum to one (the rule computes an average).
pub fn gauss5_avg(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GAUSS5_NODES
        .iter()
        .zip(GAUSS5_WEIGHTS.iter())
        .map(move |(&x, &w)| (mid + half * x, 0.5 * w))
}

/// Three-point analogue of [`gauss5_avg`].
pub fn gauss3_avg(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GAUSS3_NODES
        .iter()
        .zip(GAUSS3_WEIGHTS.iter())
        .map(move |(&x, &w)| (mid + half * x, 0.5 * w))
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
