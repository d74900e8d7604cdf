use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fields::{gradient_lp, CellField, VelocityField};
use crate::solver::{solve_upwind, UpwindOptions};
use crate::transport::{bv_seminorm, mixing_scale, neg_sobolev, sign_field, Boundary};

use super::diffusion::domain;
use super::{fit_linear, time_integral, Contract, NamedFit, RateReport, StudyConfig, StudyId, SweepRow, Table};

/// Mixing measures of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixingSample {
    pub time: f64,
    /// `∫_0^t ‖∇u‖_{L^p}`.
    pub gradient_integral: f64,
    /// `M(ρ)` on the measuring grid.
    pub mixing_scale: f64,
    /// `|∇^{-1}ρ|_{L²}` on the solver grid.
    pub h_minus1: f64,
    /// `|∇ sign ρ|_BV` on the solver grid.
    pub bv: f64,
    /// `⨍ |ρ|`.
    pub l1_norm: f64,
    /// `M · m / (|Ω| · |∇^{-1}ρ|)` on the measuring grid, `m` the transported
    /// mass; Jensen's inequality with the Kantorovich–Rubinstein duality
    /// bounds it by one.
    pub jensen_ratio: f64,
}

fn measure(config: &StudyConfig, snapshot: &CellField, gradient_integral: f64) -> Result<MixingSample> {
    let boundary = if config.periodic { Boundary::Periodic } else { Boundary::Neumann };
    let coarse = snapshot.coarsen(config.cells / config.measure_cells)?;
    let m = mixing_scale(&coarse)?;
    let coarse_h = neg_sobolev(&coarse, boundary)?;
    Ok(MixingSample {
        time: snapshot.time(),
        gradient_integral,
        mixing_scale: m.value,
        h_minus1: neg_sobolev(snapshot, boundary)?,
        bv: bv_seminorm(&sign_field(snapshot))?,
        l1_norm: snapshot.lq_norm(1.0),
        jensen_ratio: m.value * m.plan_mass / (m.volume * coarse_h),
    })
}

/// Stirring a two-phase mixture by an incompressible driver, evolved with
/// the upwind scheme. Records `M(ρ)`, `|∇^{-1}ρ|_{L²}` and `|∇ρ|_BV` at the
/// output times, fits `log M` against `∫‖∇u‖_{L^p}` and reports the constants
/// of the exponential lower and upper bounds.
///
/// `M` is measured on a coarsened copy of the solution
/// (`measure_cells` per axis) so that the exact transport problem stays
/// tractable; the `BV` seminorm is taken of `sign ρ`.
pub fn study_mixing(config: &StudyConfig) -> Result<RateReport> {
    let field = &config.field;
    if !field.is_divergence_free() {
        return Err(invalid(format!("the mixing study needs an incompressible driver, got {field}")));
    }
    let grid = domain(config)?;
    let initial = config.initial.average(&grid)?;
    let mut times = config.parameters.clone();
    times.sort_by(f64::total_cmp);
    let options = UpwindOptions { cfl: config.cfl, snapshot_times: times.clone() };
    let solved = solve_upwind(field, &initial, config.t, &options)?;

    let quad_grid = grid.with_cells(&vec![config.measure_cells; grid.dim()])?;
    let norm = |s: f64| gradient_lp(field, s, config.p, &quad_grid);
    let mut integrals = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    let mut last = 0.0;
    for &t in &times {
        acc += time_integral(field, last, t, norm);
        integrals.push(acc);
        last = t;
    }
    let samples: Vec<MixingSample> = solved
        .snapshots
        .par_iter()
        .zip(&integrals)
        .map(|(s, &i)| measure(config, s, i))
        .collect::<Result<_>>()?;

    let mut report = RateReport::new(StudyId::Mixing);
    report.tables.push(Table {
        name: "mixing".into(),
        rows: samples
            .iter()
            .map(|s| SweepRow {
                parameter: s.time,
                h_minus1: Some(s.h_minus1),
                bv: Some(s.bv),
                mixing_scale: Some(s.mixing_scale),
                ..Default::default()
            })
            .collect(),
    });
    let column = |f: fn(&MixingSample) -> f64| samples.iter().map(f).collect::<Vec<f64>>();
    report.series.insert("gradient_integral".into(), column(|s| s.gradient_integral));
    report.series.insert("l1_norm".into(), column(|s| s.l1_norm));
    report.series.insert("jensen_ratio".into(), column(|s| s.jensen_ratio));

    let logs: Vec<(f64, f64)> = samples.iter().map(|s| (s.gradient_integral, s.mixing_scale.ln())).collect();
    let (first, last) = (samples[0], samples[samples.len() - 1]);
    let drop = |s: &MixingSample| first.mixing_scale.ln() - s.mixing_scale.ln();
    // largest C with log M(t) ≥ log M(0) − I(t)/C at every output time
    let admissible = samples
        .iter()
        .filter(|s| drop(s) > 0.0)
        .map(|s| s.gradient_integral / drop(s))
        .fold(f64::INFINITY, f64::min);
    report.constants.insert("admissible_C".into(), admissible);
    let change = drop(&last).abs();
    report.constants.insert("C_prime".into(), last.gradient_integral / change);
    let ratios = column(|s| s.mixing_scale / s.h_minus1);
    let worst_ratio = ratios.iter().copied().fold(0.0, f64::max);
    report.constants.insert("max_sandwich_ratio".into(), worst_ratio);
    report.constants.insert("max_jensen_ratio".into(), column(|s| s.jensen_ratio).into_iter().fold(0.0, f64::max));
    report.constants.insert("min_bv_product".into(), column(|s| s.mixing_scale * s.bv).into_iter().fold(f64::INFINITY, f64::min));

    let range = {
        let l: Vec<f64> = logs.iter().map(|p| p.1).collect();
        l.iter().copied().fold(f64::NEG_INFINITY, f64::max) - l.iter().copied().fold(f64::INFINITY, f64::min)
    };
    match fit_linear(&logs) {
        Ok(fit) => {
            report.fits.push(NamedFit { name: "log_mixing_scale".into(), kind: "linear", fit });
            report.constants.insert("fitted_C".into(), -1.0 / fit.slope);
            report.contracts.push(Contract::new(
                "exponential decay",
                fit.slope < 0.0 && fit.residual <= 0.1 * range,
                format!(
                    "log M vs int |grad u|: slope {:.4e} (< 0), residual {:.3e} vs 10% of range {:.3e}",
                    fit.slope,
                    fit.residual,
                    0.1 * range
                ),
            ));
        }
        Err(e) => report.contracts.push(Contract::new("exponential decay", false, format!("no fit: {e}"))),
    }
    report.contracts.push(Contract::new(
        "sandwich",
        worst_ratio <= 1.0,
        format!("max M / |grad^-1 rho| = {worst_ratio:.4} (<= 1)"),
    ));
    Ok(report)
}
