use rayon::prelude::*;

use crate::error::Result;
use crate::lagrangian::{two_flow_log_distance, FlowMap, TrajectoryEnsemble};

use super::diffusion::domain;
use super::{kr_or_zero, Contract, RateReport, StudyConfig, StudyId, SweepRow, Table};

/// Relative slack granted to the Eulerian side for discretization.
const SLACK: f64 = 0.1;

struct Point {
    delta: f64,
    eulerian: f64,
    lagrangian: f64,
    l1: f64,
}

/// Eulerian versus Lagrangian stability: the distance `D_δ(ρ, ρ_k)` between
/// the push-forwards of `ρ̄` by two flows never exceeds the `ρ̄`-weighted
/// mean of `log(|φ − ψ| / δ + 1)`, because `(φ, ψ)_# ρ̄` is an admissible
/// plan. Both sides use `δ(t) = ∫_0^t ‖u − v‖_{L^p}`.
pub fn study_lagrangian(config: &StudyConfig) -> Result<RateReport> {
    let grid = domain(config)?;
    let lattice = grid.with_cells(&vec![config.ensemble; grid.dim()])?;
    let profile = config.initial;
    let ensemble = TrajectoryEnsemble::weighted(lattice, |x| profile.value(x, 1))?;
    let flow_u = FlowMap::new(&config.field, config.flow_dt, grid)?;
    let flow_v = FlowMap::new(&config.compare_field, config.flow_dt, grid)?;

    let points: Vec<Point> = config
        .parameters
        .par_iter()
        .map(|&t| {
            let lag = two_flow_log_distance(&flow_u, &flow_v, &ensemble, t, config.p)?;
            let initial = |x: f64| profile.value([x, 0.0], 1);
            let rho = flow_u.push_forward_1d(initial, &grid, t)?;
            let rho_k = flow_v.push_forward_1d(initial, &grid, t)?;
            Ok(Point {
                delta: lag.delta,
                eulerian: kr_or_zero(&rho, &rho_k, lag.delta)?,
                lagrangian: lag.weighted_log_distance,
                l1: rho.l1_distance(&rho_k)?,
            })
        })
        .collect::<Result<_>>()?;

    let mut report = RateReport::new(StudyId::Lagrangian);
    report.tables.push(Table {
        name: "lagrangian".into(),
        rows: config
            .parameters
            .iter()
            .zip(&points)
            .map(|(&t, p)| SweepRow {
                parameter: t,
                delta_scale: Some(p.delta),
                kr_value: Some(p.eulerian),
                l1_distance: Some(p.l1),
                ..Default::default()
            })
            .collect(),
    });
    report.series.insert("lagrangian".into(), points.iter().map(|p| p.lagrangian).collect());
    for (&t, p) in config.parameters.iter().zip(&points) {
        let bound = (1.0 + SLACK) * p.lagrangian;
        report.contracts.push(Contract::new(
            format!("eulerian below lagrangian at t = {t}"),
            p.eulerian <= bound + 1e-12,
            format!("D = {:.6} vs (1 + {SLACK}) * {:.6}", p.eulerian, p.lagrangian),
        ));
    }
    Ok(report)
}
