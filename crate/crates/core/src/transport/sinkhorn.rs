use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

use super::kr::{check_balanced, log_cost_matrix};
use super::measure::{DiscreteMeasure, KrResult, KrSetup, TransportPlan};
use super::network_simplex::{certify, CostMatrix};

/// Options for [`kr_entropic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropicOptions {
    /// Final regularization as a fraction of the largest cost entry.
    pub epsilon: f64,
    /// Iteration budget over all ε stages.
    pub max_iter: usize,
    /// Target `L¹` marginal error of the unit-mass plan at the final ε.
    /// Rounding then moves the cost by at most `2 · tolerance · max|c|`.
    pub tolerance: f64,
    /// Over-relaxation factor in `[1, 2)` for the final ε stage; 1 is plain
    /// Sinkhorn.
    pub relaxation: f64,
}

impl Default for EntropicOptions {
    fn default() -> Self {
        EntropicOptions { epsilon: 5e-4, max_iter: 1_000_000, tolerance: 1e-5, relaxation: 1.5 }
    }
}

/// Scaling iterations `u = a / K v`, `v = b / Kᵀ u` on the kernel
/// `K_ij = exp((f_i + g_j − c_ij) / ε)`. Large scalings are absorbed into
/// the potentials `f, g` and the kernel is rebuilt, which keeps the
/// iteration stable for small ε.
struct Scaling<'a> {
    cost: &'a CostMatrix,
    a: Vec<f64>,
    b: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    kernel: Vec<f64>,
    eps: f64,
    omega: f64,
}

/// Scalings beyond `e^ABSORB` in either direction trigger an absorption.
const ABSORB: f64 = 30.0;

impl Scaling<'_> {
    fn rebuild(&mut self) {
        let (c, f, g, eps) = (self.cost, &self.f, &self.g, self.eps);
        let m = c.cols();
        self.kernel = (0..c.rows() * m)
            .into_par_iter()
            .map(|e| {
                let (i, j) = (e / m, e % m);
                ((f[i] + g[j] - c.get(i, j)) / eps).exp()
            })
            .collect();
    }

    fn absorb(&mut self) {
        for (f, u) in self.f.iter_mut().zip(&mut self.u) {
            *f += self.eps * u.ln();
            *u = 1.0;
        }
        for (g, v) in self.g.iter_mut().zip(&mut self.v) {
            *g += self.eps * v.ln();
            *v = 1.0;
        }
        self.rebuild();
    }

    fn set_eps(&mut self, eps: f64) {
        self.absorb();
        self.eps = eps;
        self.rebuild();
    }

    /// One row and column update. `None` on breakdown, otherwise whether the
    /// scalings should be absorbed.
    fn sweep(&mut self) -> Option<bool> {
        let m = self.b.len();
        for (i, u) in self.u.iter_mut().enumerate() {
            let row = &self.kernel[i * m..(i + 1) * m];
            let kv: f64 = row.iter().zip(&self.v).map(|(k, v)| k * v).sum();
            *u = u.powf(1.0 - self.omega) * (self.a[i] / kv).powf(self.omega);
        }
        let mut ktu = vec![0.0; m];
        for (i, u) in self.u.iter().enumerate() {
            let row = &self.kernel[i * m..(i + 1) * m];
            ktu.iter_mut().zip(row).for_each(|(s, k)| *s += k * u);
        }
        for ((v, s), b) in self.v.iter_mut().zip(&ktu).zip(&self.b) {
            *v = v.powf(1.0 - self.omega) * (b / s).powf(self.omega);
        }
        let mut all = self.u.iter().chain(&self.v);
        if !all.all(|x| x.is_finite() && *x > 0.0) {
            return None;
        }
        Some(self.u.iter().chain(&self.v).any(|x| x.ln().abs() > ABSORB))
    }

    /// `Σ_i |row_i − a_i|`; columns are exact right after a sweep.
    fn row_error(&self) -> f64 {
        let m = self.b.len();
        (0..self.a.len())
            .map(|i| {
                let row = &self.kernel[i * m..(i + 1) * m];
                let kv: f64 = row.iter().zip(&self.v).map(|(k, v)| k * v).sum();
                (self.u[i] * kv - self.a[i]).abs()
            })
            .sum()
    }

    fn plan(&self) -> Vec<f64> {
        let m = self.b.len();
        self.kernel.iter().enumerate().map(|(e, k)| self.u[e / m] * k * self.v[e % m]).collect()
    }
}

/// Projects a nearly feasible dense plan onto the transportation polytope:
/// scale down overfull rows and columns, then spread the missing mass as a
/// rank-one correction.
fn round_plan(mut p: Vec<f64>, a: &[f64], b: &[f64]) -> Vec<f64> {
    let (n, m) = (a.len(), b.len());
    for i in 0..n {
        let row: f64 = p[i * m..(i + 1) * m].iter().sum();
        if row > a[i] {
            let s = a[i] / row;
            p[i * m..(i + 1) * m].iter_mut().for_each(|x| *x *= s);
        }
    }
    for j in 0..m {
        let col: f64 = (0..n).map(|i| p[i * m + j]).sum();
        if col > b[j] {
            let s = b[j] / col;
            (0..n).for_each(|i| p[i * m + j] *= s);
        }
    }
    let er: Vec<f64> = (0..n).map(|i| (a[i] - p[i * m..(i + 1) * m].iter().sum::<f64>()).max(0.0)).collect();
    let ec: Vec<f64> = (0..m).map(|j| (b[j] - (0..n).map(|i| p[i * m + j]).sum::<f64>()).max(0.0)).collect();
    let total: f64 = er.iter().sum();
    if total > 0.0 {
        for i in 0..n {
            for j in 0..m {
                p[i * m + j] += er[i] * ec[j] / total;
            }
        }
    }
    p
}

/// Entropically regularized approximation of `D_δ(ρ⁺, ρ⁻)`.
///
/// Sinkhorn scaling with absorption, ε decreasing geometrically from the
/// cost scale to `epsilon · cost scale`. The final plan is rounded to be
/// exactly feasible and the reported value is its true transport cost, so it
/// never undercuts the exact optimum. `dual_gap` comes from a c-transformed,
/// hence feasible, dual pair.
pub fn kr_entropic(
    plus: &DiscreteMeasure,
    minus: &DiscreteMeasure,
    setup: &KrSetup,
    options: &EntropicOptions,
) -> Result<KrResult> {
    setup.validate()?;
    check_balanced(plus, minus)?;
    if !(options.epsilon > 0.0) || !(options.tolerance > 0.0) {
        return Err(invalid("entropic regularization and tolerance must be positive"));
    }
    if !(1.0..2.0).contains(&options.relaxation) {
        return Err(invalid("relaxation must lie in [1, 2)"));
    }
    if plus.is_empty() {
        return Ok(KrResult::empty(setup.delta));
    }
    let cost = log_cost_matrix(plus, minus, setup)?;
    let mass = plus.mass();
    let a: Vec<f64> = plus.weights().iter().map(|w| w / mass).collect();
    let b: Vec<f64> = minus.weights().iter().map(|w| w / minus.mass()).collect();
    let scale = cost.max_abs().max(f64::MIN_POSITIVE);
    let target = options.epsilon * scale;

    let (n, m) = (a.len(), b.len());
    let mut s = Scaling {
        cost: &cost,
        a: a.clone(),
        b: b.clone(),
        f: vec![0.0; n],
        g: vec![0.0; m],
        u: vec![1.0; n],
        v: vec![1.0; m],
        kernel: Vec::new(),
        eps: scale,
        omega: 1.0,
    };
    s.rebuild();
    let mut iterations = 0;
    loop {
        let eps = (0.5 * s.eps).max(target);
        s.set_eps(eps);
        let last = eps == target;
        if last {
            s.omega = options.relaxation;
        }
        let stage_tol = if last { options.tolerance } else { 1e-4 };
        loop {
            match s.sweep() {
                None => return Err(Error::Convergence { iterations, residual: f64::NAN }),
                Some(true) => s.absorb(),
                Some(false) => {}
            }
            iterations += 1;
            if iterations % 10 == 0 && s.row_error() <= stage_tol {
                break;
            }
            if iterations >= options.max_iter {
                return Err(Error::Convergence { iterations, residual: s.row_error() });
            }
        }
        if last {
            break;
        }
    }
    s.absorb();

    let rounded = round_plan(s.plan(), &a, &b);
    let entries: Vec<(usize, usize, f64)> = rounded
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.0)
        .map(|(e, &x)| (e / m, e % m, x * mass))
        .collect();
    let supply: Vec<f64> = a.iter().map(|x| x * mass).collect();
    let demand: Vec<f64> = b.iter().map(|x| x * mass).collect();
    let f: Vec<f64> = s.f.clone();
    let (_, _, primal, _, gap, _) = certify(&supply, &demand, &cost, &entries, f);
    // complementary slackness is only meaningful where the plan carries mass
    let heavy: Vec<(usize, usize, f64)> = entries.iter().copied().filter(|e| e.2 > 1e-6 * mass).collect();
    let (_, _, _, _, _, slackness) = certify(&supply, &demand, &cost, &heavy, s.f.clone());
    Ok(KrResult {
        value: setup.normalize(primal, mass),
        delta: setup.delta,
        cost: primal,
        plan: TransportPlan { entries, sources: n, targets: m },
        dual_gap: gap,
        slackness,
        iterations,
    })
}
