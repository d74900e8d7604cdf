use rayon::prelude::*;

use crate::error::Result;
use crate::fields::{Builtin, CellField, Grid, VelocityField};
use crate::solver::{solve_upwind, UpwindOptions};

use super::{kr_or_zero, spread, time_integral, Contract, Profile, RateReport, StudyConfig, StudyId, SweepRow, Table};

/// Refinement of the self-reference when no closed form is available.
const REFERENCE_REFINEMENT: usize = 4;

fn grid_for(h: f64, periodic: bool) -> Result<Grid> {
    let cells = (1.0 / h).round() as usize;
    if periodic {
        Grid::torus(&[(0.0, 1.0)], &[cells])
    } else {
        Grid::new(&[(0.0, 1.0)], &[cells])
    }
}

/// Constant speed on a periodic line: the solution is an exact shift.
fn exact_shift(field: &Builtin, grid: &Grid) -> Option<f64> {
    match *field {
        Builtin::Constant { c, dim: 1 } if grid.is_periodic(0) => Some(c[0]),
        Builtin::Zero => Some(0.0),
        _ => None,
    }
}

fn reference(config: &StudyConfig, profile: &Profile, grid: &Grid) -> Result<CellField> {
    if let Some(c) = exact_shift(&config.field, grid) {
        return profile.shifted_average(grid, c * config.t);
    }
    let cells = [grid.cells(0) * REFERENCE_REFINEMENT];
    let fine = grid.with_cells(&cells)?;
    let solved = solve_upwind(&config.field, &profile.average(&fine)?, config.t, &UpwindOptions::with_cfl(config.cfl))?;
    solved.final_field.coarsen(REFERENCE_REFINEMENT)
}

/// `L¹` error and `D_{δ_h}` of one upwind solve against the reference.
fn error_at(config: &StudyConfig, profile: &Profile, h: f64, cfl: f64, delta: f64) -> Result<(f64, f64)> {
    let grid = grid_for(h, config.periodic)?;
    let exact = reference(config, profile, &grid)?;
    let solved = solve_upwind(&config.field, &profile.average(&grid)?, config.t, &UpwindOptions::with_cfl(cfl))?;
    let approx = solved.final_field;
    Ok((approx.l1_distance(&exact)?, kr_or_zero(&approx, &exact, delta)?))
}

/// Convergence of the upwind scheme: order `1/2` in `L¹` for discontinuous
/// data, order one for smooth data, and `D_{δ_h}` with the numerical
/// diffusion length `δ_h = √(h ∫‖u‖∞)` bounded across the sweep.
pub fn study_upwind(config: &StudyConfig) -> Result<RateReport> {
    let hs = &config.parameters;
    let probe = grid_for(hs[0], config.periodic)?;
    let transport_length = time_integral(&config.field, 0.0, config.t, |s| config.field.sup_norm(s, &probe));
    let delta = |h: f64| (h * transport_length).sqrt();
    let exact_reference = exact_shift(&config.field, &probe).is_some();
    // unit Courant number with a constant speed reproduces the shift exactly
    let degenerate = exact_reference && config.cfl == 1.0;

    let rough: Vec<(f64, f64)> =
        hs.par_iter().map(|&h| error_at(config, &config.initial, h, config.cfl, delta(h))).collect::<Result<_>>()?;
    let smooth: Vec<(f64, f64)> = hs
        .par_iter()
        .map(|&h| error_at(config, &config.smooth_initial, h, config.cfl, delta(h)))
        .collect::<Result<_>>()?;

    let mut report = RateReport::new(StudyId::Upwind);
    let table = |name: &str, data: &[(f64, f64)]| Table {
        name: name.into(),
        rows: hs
            .iter()
            .zip(data)
            .map(|(&h, &(l1, kr))| SweepRow {
                parameter: h,
                delta_scale: Some(delta(h)),
                kr_value: Some(kr),
                l1_distance: Some(l1),
                ..Default::default()
            })
            .collect(),
    };
    report.tables.push(table("upwind", &rough));
    report.tables.push(table("smooth", &smooth));
    report.constants.insert("transport_length".into(), transport_length);
    report.constants.insert("exact_reference".into(), f64::from(u8::from(exact_reference)));
    report.constants.insert("degenerate_cfl".into(), f64::from(u8::from(degenerate)));

    if exact_reference {
        let unit: Vec<(f64, f64)> =
            hs.par_iter().map(|&h| error_at(config, &config.initial, h, 1.0, delta(h))).collect::<Result<_>>()?;
        let worst = unit.iter().map(|e| e.0).fold(0.0, f64::max);
        report.tables.push(table("unit_courant", &unit));
        report.contracts.push(Contract::new(
            "unit Courant exact",
            worst <= 1e-12,
            format!("max L1 error at cfl = 1 is {worst:.2e} (<= 1e-12)"),
        ));
    }
    if degenerate {
        // errors vanish identically: nothing to fit
        return Ok(report);
    }

    let l1_fit = report.add_rate_fit("l1", "upwind", |r| r.l1_distance);
    let smooth_fit = report.add_rate_fit("smooth_l1", "smooth", |r| r.l1_distance);
    report.add_rate_fit("kr", "upwind", |r| r.kr_value);

    report.contracts.push(match l1_fit {
        Some(f) => Contract::new(
            "rough data half order",
            (f.slope - 0.5).abs() <= 0.1,
            format!("L1 slope {:.4} in [0.4, 0.6], residual {:.2e}", f.slope, f.residual),
        ),
        None => Contract::new("rough data half order", false, "fewer than three mesh widths with nonzero error"),
    });
    let kr: Vec<f64> = rough.iter().map(|e| e.1).collect();
    let (lo, hi) = spread(&kr);
    report.contracts.push(Contract::new(
        "kr bounded",
        lo > 0.0 && hi / lo <= 2.0,
        format!("D_delta_h in [{lo:.6}, {hi:.6}], max/min {:.4} (<= 2)", hi / lo),
    ));
    report.contracts.push(match smooth_fit {
        Some(f) => Contract::new(
            "smooth data first order",
            f.slope >= 0.8,
            format!("L1 slope {:.4} (>= 0.8), residual {:.2e}", f.slope, f.residual),
        ),
        None => Contract::new("smooth data first order", false, "fewer than three mesh widths with nonzero error"),
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_cfl_is_flagged_and_not_fitted() {
        let mut c = StudyConfig::preset(StudyId::Upwind);
        c.cfl = 1.0;
        c.parameters = vec![0.125, 0.0625, 0.03125];
        let r = study_upwind(&c).unwrap();
        assert_eq!(r.constants["degenerate_cfl"], 1.0);
        assert!(r.fits.is_empty());
        assert!(r.tables[0].rows.iter().all(|row| row.l1_distance == Some(0.0)));
        assert!(r.all_passed());
    }
}
