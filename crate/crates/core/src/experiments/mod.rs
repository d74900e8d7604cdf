//! Parameter sweeps with rate fits and pass/fail contracts.
//!
//! Every study is a pure function of its [`StudyConfig`]: sweep points run
//! on the rayon pool but are assembled in configuration order, so the same
//! configuration always yields the same report.

mod diffusion;
mod fit;
mod lagrangian;
mod mixing;
mod oscillating;
mod profile;
mod upwind;
mod validation;

pub use diffusion::study_diffusion;
pub use fit::{fit_linear, fit_rate, Fit};
pub use lagrangian::study_lagrangian;
pub use mixing::{study_mixing, MixingSample};
pub use oscillating::{
    exact_oscillating_solution, oscillating_cell_averages, oscillating_delta, oscillating_profile, study_oscillating,
};
pub use profile::Profile;
pub use upwind::study_upwind;
pub use validation::validation_suite;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fields::{builtin_velocity, Builtin, CellField, VelocityField};
use crate::quadrature::gauss3_avg;
use crate::transport::{kr_distance, KrSetup};

/// The five studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyId {
    Oscillating,
    Diffusion,
    Upwind,
    Mixing,
    Lagrangian,
}

impl StudyId {
    pub const ALL: [StudyId; 5] =
        [StudyId::Oscillating, StudyId::Diffusion, StudyId::Upwind, StudyId::Mixing, StudyId::Lagrangian];

    pub fn name(self) -> &'static str {
        match self {
            StudyId::Oscillating => "oscillating",
            StudyId::Diffusion => "diffusion",
            StudyId::Upwind => "upwind",
            StudyId::Mixing => "mixing",
            StudyId::Lagrangian => "lagrangian",
        }
    }

    /// Configuration key holding the swept parameter list.
    pub fn parameter_key(self) -> &'static str {
        match self {
            StudyId::Oscillating => "k",
            StudyId::Diffusion => "kappa",
            StudyId::Upwind => "h",
            StudyId::Mixing | StudyId::Lagrangian => "times",
        }
    }
}

impl fmt::Display for StudyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StudyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StudyId::ALL
            .into_iter()
            .find(|id| id.name() == s.trim())
            .ok_or_else(|| invalid(format!("unknown study `{s}`")))
    }
}

/// Everything a study needs. Keys that a study does not use are carried
/// along unchanged so that configurations round-trip.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub study: StudyId,
    /// `k`, `κ`, `h` or output times, depending on the study.
    pub parameters: Vec<f64>,
    /// Sobolev exponent of `‖∇u‖_{L^p}` and `‖u − v‖_{L^p}`.
    pub p: f64,
    /// Final time.
    pub t: f64,
    /// Cells per axis; cells per oscillation in the oscillating study.
    /// The upwind study derives its grids from `h`.
    pub cells: usize,
    /// Wrap every axis of the domain.
    pub periodic: bool,
    #[serde(serialize_with = "as_display")]
    pub field: Builtin,
    /// Second field of the Lagrangian comparison.
    #[serde(serialize_with = "as_display")]
    pub compare_field: Builtin,
    #[serde(serialize_with = "as_display")]
    pub initial: Profile,
    /// Smooth data for the first-order regime of the upwind study.
    #[serde(serialize_with = "as_display")]
    pub smooth_initial: Profile,
    pub cfl: f64,
    /// Fixed `δ₀` of the diffusion study.
    pub delta0: f64,
    /// Cells per axis on which the mixing scale is measured.
    pub measure_cells: usize,
    /// Trajectory samples per axis in the Lagrangian study.
    pub ensemble: usize,
    /// Runge–Kutta step of the Lagrangian study.
    pub flow_dt: f64,
    pub output: PathBuf,
}

fn as_display<T: fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn catalog(name: &str, params: &[f64]) -> Builtin {
    builtin_velocity(name, params).expect("catalog preset")
}

impl StudyConfig {
    /// Desk-scale defaults of each study.
    pub fn preset(study: StudyId) -> Self {
        let base = StudyConfig {
            study,
            parameters: Vec::new(),
            p: 2.0,
            t: 1.0,
            cells: 1024,
            periodic: false,
            field: Builtin::Zero,
            compare_field: Builtin::Zero,
            initial: Profile::Constant(1.0),
            smooth_initial: Profile::Sine,
            cfl: crate::solver::DEFAULT_CFL,
            delta0: 0.1,
            measure_cells: 32,
            ensemble: 256,
            flow_dt: 1e-3,
            output: PathBuf::from("results"),
        };
        match study {
            StudyId::Oscillating => StudyConfig {
                parameters: vec![4.0, 8.0, 16.0, 32.0],
                cells: 16,
                field: catalog("oscillating", &[1.0]),
                ..base
            },
            StudyId::Diffusion => {
                StudyConfig { parameters: vec![1e-2, 3e-3, 1e-3], field: catalog("oscillating", &[4.0]), ..base }
            }
            StudyId::Upwind => StudyConfig {
                parameters: (6..=10).map(|n| 0.5f64.powi(n)).collect(),
                t: 0.5,
                periodic: true,
                field: catalog("constant", &[1.0]),
                initial: Profile::Indicator { a: 0.25, b: 0.75 },
                ..base
            },
            StudyId::Mixing => StudyConfig {
                parameters: (0..=16).map(|n| 0.5 * n as f64).collect(),
                t: 8.0,
                cells: 128,
                periodic: true,
                field: catalog("alternating_shear", &[1.0, 1.0, 1.0]),
                initial: Profile::Checkerboard { blocks: 2 },
                ..base
            },
            StudyId::Lagrangian => StudyConfig {
                parameters: vec![0.25, 0.5, 1.0],
                cells: 512,
                compare_field: catalog("oscillating", &[8.0]),
                ..base
            },
        }
    }

    /// Checks the invariants shared by all studies and the study-specific
    /// preconditions that do not need a solve.
    pub fn validate(&self) -> Result<()> {
        let ps = &self.parameters;
        if ps.is_empty() {
            return Err(invalid(format!("`{}` must list at least one value", self.study.parameter_key())));
        }
        if ps.iter().any(|v| !v.is_finite()) {
            return Err(invalid("parameters must be finite"));
        }
        let increasing = ps.windows(2).all(|w| w[0] < w[1]);
        let decreasing = ps.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(invalid(format!("`{}` must be strictly monotone", self.study.parameter_key())));
        }
        if !(self.p > 1.0) {
            return Err(invalid(format!("p must exceed 1, got {}", self.p)));
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(invalid("final time must be positive"));
        }
        if !self.cells.is_power_of_two() || !self.measure_cells.is_power_of_two() {
            return Err(invalid("resolutions must be powers of two"));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(invalid(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.delta0 > 0.0) || !(self.flow_dt > 0.0) {
            return Err(invalid("delta0 and flow_dt must be positive"));
        }
        match self.study {
            StudyId::Oscillating => {
                if ps.iter().any(|&k| k < 1.0 || k.fract() != 0.0) {
                    return Err(invalid("oscillation numbers k must be positive integers"));
                }
            }
            StudyId::Diffusion => {
                if ps.iter().any(|&k| k < 0.0) {
                    return Err(invalid("diffusivities must be nonnegative"));
                }
            }
            StudyId::Upwind => check_dyadic(ps)?,
            StudyId::Mixing => {
                if ps.iter().any(|&s| s < 0.0 || s > self.t) {
                    return Err(invalid("output times must lie in [0, t]"));
                }
                if self.measure_cells > self.cells {
                    return Err(invalid("measure_cells cannot exceed cells"));
                }
            }
            StudyId::Lagrangian => {
                if ps.iter().any(|&s| s < 0.0) {
                    return Err(invalid("times must be nonnegative"));
                }
            }
        }
        Ok(())
    }

    /// Dimension of the study domain.
    pub fn dim(&self) -> usize {
        match self.initial {
            Profile::Checkerboard { .. } => self.field.dim().unwrap_or(2),
            _ => self.field.dim().unwrap_or(1),
        }
    }
}

/// Mesh widths `h = 2^{-n}`.
fn check_dyadic(hs: &[f64]) -> Result<()> {
    for &h in hs {
        let n = -h.log2();
        if !(h > 0.0 && h <= 1.0) || n.round() != n || 0.5f64.powi(n as i32) != h {
            return Err(invalid(format!("mesh width {h} is not a power of 1/2")));
        }
    }
    Ok(())
}

/// One line of a sweep table. Columns a study does not measure stay empty.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub delta_scale: Option<f64>,
    pub kr_value: Option<f64>,
    pub l1_distance: Option<f64>,
    pub h_minus1: Option<f64>,
    pub bv: Option<f64>,
    pub mixing_scale: Option<f64>,
}

pub const CSV_HEADER: &str = "parameter,delta_scale,kr_value,l1_distance,h_minus1,bv,mixing_scale";

/// Named sweep. The first table of a report is the primary one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub rows: Vec<SweepRow>,
}

impl Table {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.parameter,
                cell(r.delta_scale),
                cell(r.kr_value),
                cell(r.l1_distance),
                cell(r.h_minus1),
                cell(r.bv),
                cell(r.mixing_scale)
            )?;
        }
        Ok(())
    }

    fn pairs(&self, value: impl Fn(&SweepRow) -> Option<f64>) -> Vec<(f64, f64)> {
        self.rows.iter().filter_map(|r| value(r).map(|v| (r.parameter, v))).collect()
    }
}

/// A fit of one column against another.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedFit {
    pub name: String,
    /// `log-log` for rates, `linear` otherwise.
    pub kind: &'static str,
    #[serde(flatten)]
    pub fit: Fit,
}

/// A pass/fail verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contract {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Contract {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Contract { name: name.into(), passed, detail: detail.into() }
    }
}

impl fmt::Display for Contract {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

/// Raw sweep data, fits over it, reported constants and contracts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub study: StudyId,
    pub tables: Vec<Table>,
    pub fits: Vec<NamedFit>,
    /// Per-row data that has no CSV column, keyed by name.
    pub series: BTreeMap<String, Vec<f64>>,
    pub constants: BTreeMap<String, f64>,
    pub contracts: Vec<Contract>,
}

impl RateReport {
    fn new(study: StudyId) -> Self {
        RateReport {
            study,
            tables: Vec::new(),
            fits: Vec::new(),
            series: BTreeMap::new(),
            constants: BTreeMap::new(),
            contracts: Vec::new(),
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn fit(&self, name: &str) -> Option<&Fit> {
        self.fits.iter().find(|f| f.name == name).map(|f| &f.fit)
    }

    pub fn contract(&self, name: &str) -> Option<&Contract> {
        self.contracts.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.contracts.iter().all(|c| c.passed)
    }

    /// Fits `value` against the parameter of `table` in log-log form.
    fn add_rate_fit(&mut self, name: &str, table: &str, value: impl Fn(&SweepRow) -> Option<f64>) -> Option<Fit> {
        let pairs = self.table(table)?.pairs(value);
        let pairs: Vec<(f64, f64)> = pairs.into_iter().filter(|&(p, v)| p > 0.0 && v > 0.0).collect();
        let fit = fit_rate(&pairs).ok()?;
        self.fits.push(NamedFit { name: name.into(), kind: "log-log", fit });
        Some(fit)
    }
}

/// Runs the study named in `config`.
pub fn run_study(config: &StudyConfig) -> Result<RateReport> {
    config.validate()?;
    match config.study {
        StudyId::Oscillating => study_oscillating(config),
        StudyId::Diffusion => study_diffusion(config),
        StudyId::Upwind => study_upwind(config),
        StudyId::Mixing => study_mixing(config),
        StudyId::Lagrangian => study_lagrangian(config),
    }
}

/// `∫_{t0}^{t1} g(s) ds` by three-point Gauss rules on the pieces between
/// the switching times of `field`, exact for fields that are polynomial of
/// low degree in time between switches.
pub(crate) fn time_integral(field: &dyn VelocityField, t0: f64, t1: f64, g: impl Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    let mut s = t0;
    while s < t1 {
        let end = field.next_switch(s).map_or(t1, |sw| sw.min(t1));
        total += (end - s) * gauss3_avg(s, end).map(|(x, w)| w * g(x)).sum::<f64>();
        s = end;
    }
    total
}

/// `D_δ(ρ₁, ρ₂)`, defined as zero for identical fields even when `δ = 0`.
pub(crate) fn kr_or_zero(rho1: &CellField, rho2: &CellField, delta: f64) -> Result<f64> {
    if rho1.values() == rho2.values() {
        return Ok(0.0);
    }
    Ok(kr_distance(rho1, rho2, &KrSetup::on_grid(delta, rho1.grid()))?.value)
}

fn spread(values: &[f64]) -> (f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}
