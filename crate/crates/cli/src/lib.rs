//! Front end of the `krlab` binary: configuration parsing and the four
//! subcommands, each writing its human-readable output to a caller-supplied
//! sink so that tests can capture it.

pub mod config;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use krlab::experiments::{exact_oscillating_solution, run_study, validation_suite, Contract, RateReport, StudyConfig};
use krlab::fields::CATALOG;
use serde_json::json;
use thiserror::Error;

pub use config::{echo_config, parse_config, ConfigError, RawConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Study(#[from] krlab::Error),

    #[error("cannot write output: {0}")]
    Output(#[from] io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Usage(String),
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Whether every contract held; maps to exit codes 0 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn of(contracts: &[Contract]) -> Self {
        if contracts.iter().all(|c| c.passed) {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 2,
        }
    }
}

/// Reads a configuration file and applies `--set` overrides.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<StudyConfig, CliError> {
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    let mut raw = RawConfig::parse(&text)?;
    for o in overrides {
        raw.set(o)?;
    }
    Ok(raw.build()?)
}

/// JSON summary of a run. The top-level `slope`, `intercept` and `residual`
/// are those of the study's first fit.
pub fn summary(config: &StudyConfig, report: &RateReport) -> serde_json::Value {
    let primary = report.fits.first();
    json!({
        "study": report.study,
        "config": config,
        "config_echo": echo_config(config),
        "slope": primary.map(|f| f.fit.slope),
        "intercept": primary.map(|f| f.fit.intercept),
        "residual": primary.map(|f| f.fit.residual),
        "fits": report.fits,
        "constants": report.constants,
        "series": report.series,
        "contracts": report.contracts,
        "passed": report.all_passed(),
    })
}

/// Writes `<study>.csv` for the primary table, `<study>_<table>.csv` for
/// the others and `<study>.json`. Returns the files written.
pub fn write_report(dir: &Path, config: &StudyConfig, report: &RateReport) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(io_at(dir))?;
    let study = report.study.name();
    let mut written = Vec::new();
    for (i, table) in report.tables.iter().enumerate() {
        let name = if i == 0 { format!("{study}.csv") } else { format!("{study}_{}.csv", table.name) };
        let path = dir.join(name);
        let mut buf = Vec::new();
        table.write_csv(&mut buf)?;
        fs::write(&path, buf).map_err(io_at(&path))?;
        written.push(path);
    }
    let path = dir.join(format!("{study}.json"));
    let mut text = serde_json::to_string_pretty(&summary(config, report))?;
    text.push('\n');
    fs::write(&path, text).map_err(io_at(&path))?;
    written.push(path);
    Ok(written)
}

/// `run`: executes the study, writes its files and prints one verdict line
/// per contract.
pub fn run<W: Write>(config: &StudyConfig, dir: &Path, verbose: bool, out: &mut W) -> Result<Verdict, CliError> {
    let report = run_study(config)?;
    let written = write_report(dir, config, &report)?;
    if verbose {
        for f in &report.fits {
            writeln!(
                out,
                "fit {} ({}): slope {:.4}, intercept {:.4}, residual {:.3e}",
                f.name, f.kind, f.fit.slope, f.fit.intercept, f.fit.residual
            )?;
        }
        for (k, v) in &report.constants {
            writeln!(out, "{k} = {v}")?;
        }
        for p in &written {
            writeln!(out, "wrote {}", p.display())?;
        }
    }
    for c in &report.contracts {
        writeln!(out, "{c}")?;
    }
    let passed = report.contracts.iter().filter(|c| c.passed).count();
    writeln!(out, "{}: {passed}/{} contracts passed", report.study, report.contracts.len())?;
    Ok(Verdict::of(&report.contracts))
}

/// `validate`: the invariant suite as a pass/fail table.
pub fn validate<W: Write>(quick: bool, out: &mut W) -> Result<Verdict, CliError> {
    let contracts = validation_suite(quick)?;
    let width = contracts.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &contracts {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{:<width$}  {verdict}  {}", c.name, c.detail)?;
    }
    Ok(Verdict::of(&contracts))
}

/// `list-fields`: the velocity catalog.
pub fn list_fields<W: Write>(out: &mut W) -> Result<(), CliError> {
    let width = CATALOG.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
    for (name, usage) in CATALOG {
        writeln!(out, "{name:<width$}  {usage}")?;
    }
    Ok(())
}

/// `export-snapshot`: `x,value` rows of the closed-form oscillating
/// solution at the centres of `cells` cells of `[0, 1]`.
pub fn export_snapshot<W: Write>(field: &str, k: u32, t: f64, cells: usize, out: &mut W) -> Result<(), CliError> {
    if field != "oscillating" {
        return Err(CliError::Usage(format!(
            "export-snapshot has a closed form only for `oscillating`, got `{field}`"
        )));
    }
    if k == 0 || cells == 0 || !t.is_finite() || t < 0.0 {
        return Err(CliError::Usage("export-snapshot needs k >= 1, cells >= 1 and a finite t >= 0".into()));
    }
    writeln!(out, "x,value")?;
    for i in 0..cells {
        let x = (i as f64 + 0.5) / cells as f64;
        writeln!(out, "{x},{}", exact_oscillating_solution(f64::from(k), t, x))?;
    }
    Ok(())
}
