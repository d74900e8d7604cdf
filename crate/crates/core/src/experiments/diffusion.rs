use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fields::{Grid, VelocityField};
use crate::solver::{solve_advection_diffusion, solve_upwind, DiffusionOptions, UpwindOptions};

use super::{kr_or_zero, spread, Contract, RateReport, StudyConfig, StudyId, SweepRow, Table};

/// Numerical diffusion must stay this far below the smallest `κ`.
const NUMERICAL_DIFFUSION_MARGIN: f64 = 0.1;

pub(crate) fn domain(config: &StudyConfig) -> Result<Grid> {
    let dim = config.dim();
    let bounds = vec![(0.0, 1.0); dim];
    let cells = vec![config.cells; dim];
    if config.periodic {
        Grid::torus(&bounds, &cells)
    } else {
        Grid::new(&bounds, &cells)
    }
}

struct Point {
    delta: f64,
    kr: f64,
    l1: f64,
    kr_fixed: f64,
}

/// Vanishing diffusivity: advection–diffusion against pure upwind transport
/// from the same data. `D_{√(tκ)}` stays bounded across the sweep while the
/// distance at a fixed `δ₀` decays like `√κ`.
pub fn study_diffusion(config: &StudyConfig) -> Result<RateReport> {
    let grid = domain(config)?;
    let field = &config.field;
    let speed = field.sup_norm(0.0, &grid).max(field.sup_norm(config.t, &grid));
    let kappa_min = config.parameters.iter().copied().filter(|&k| k > 0.0).fold(f64::INFINITY, f64::min);
    if kappa_min.is_finite() && grid.h() * speed > NUMERICAL_DIFFUSION_MARGIN * kappa_min {
        let needed = (speed / (NUMERICAL_DIFFUSION_MARGIN * kappa_min)).ceil() as usize;
        return Err(Error::UnderResolved(format!(
            "h·‖u‖∞ = {:.3e} exceeds {NUMERICAL_DIFFUSION_MARGIN}·κ_min = {:.3e}; use at least {} cells",
            grid.h() * speed,
            NUMERICAL_DIFFUSION_MARGIN * kappa_min,
            needed.next_power_of_two()
        )));
    }
    let initial = config.initial.average(&grid)?;
    if initial.min() < 0.0 {
        return Err(invalid("the diffusion study needs nonnegative initial data"));
    }
    let pure = solve_upwind(field, &initial, config.t, &UpwindOptions::with_cfl(config.cfl))?.final_field;
    let options = DiffusionOptions { cfl: config.cfl, ..Default::default() };

    let points: Vec<Point> = config
        .parameters
        .par_iter()
        .map(|&kappa| {
            let diffused = if kappa == 0.0 {
                pure.clone()
            } else {
                solve_advection_diffusion(field, kappa, &initial, config.t, &options)?.final_field
            };
            let delta = (config.t * kappa).sqrt();
            Ok(Point {
                delta,
                kr: kr_or_zero(&pure, &diffused, delta)?,
                l1: pure.l1_distance(&diffused)?,
                kr_fixed: kr_or_zero(&pure, &diffused, config.delta0)?,
            })
        })
        .collect::<Result<_>>()?;

    let mut report = RateReport::new(StudyId::Diffusion);
    let row = |kappa: f64, delta: f64, kr: f64, l1: f64| SweepRow {
        parameter: kappa,
        delta_scale: Some(delta),
        kr_value: Some(kr),
        l1_distance: Some(l1),
        ..Default::default()
    };
    let kappas = &config.parameters;
    report.tables.push(Table {
        name: "diffusion".into(),
        rows: kappas.iter().zip(&points).map(|(&k, p)| row(k, p.delta, p.kr, p.l1)).collect(),
    });
    report.tables.push(Table {
        name: "fixed_delta".into(),
        rows: kappas.iter().zip(&points).map(|(&k, p)| row(k, config.delta0, p.kr_fixed, p.l1)).collect(),
    });
    report.add_rate_fit("kr", "diffusion", |r| r.kr_value);
    let fixed = report.add_rate_fit("fixed_delta_kr", "fixed_delta", |r| r.kr_value);
    report.add_rate_fit("l1", "diffusion", |r| r.l1_distance);

    let positive: Vec<f64> = kappas.iter().zip(&points).filter(|(&k, _)| k > 0.0).map(|(_, p)| p.kr).collect();
    let (lo, hi) = spread(&positive);
    report.contracts.push(Contract::new(
        "kr bounded",
        !positive.is_empty() && lo > 0.0 && hi / lo <= 2.0,
        format!("D_sqrt(t kappa) in [{lo:.6}, {hi:.6}], max/min {:.4} (<= 2)", hi / lo),
    ));
    let (passed, detail) = match fixed {
        Some(f) => (
            (0.35..=0.65).contains(&f.slope),
            format!("slope {:.4} in [0.35, 0.65] at delta0 = {}, residual {:.2e}", f.slope, config.delta0, f.residual),
        ),
        None => (false, "fewer than three positive diffusivities to fit".to_string()),
    };
    report.contracts.push(Contract::new("fixed-delta rate", passed, detail));
    Ok(report)
}
